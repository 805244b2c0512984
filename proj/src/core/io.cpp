#include "thincount/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "thincount/error.hpp"

namespace thincount {
namespace {

std::string trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto const last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(std::string const& line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto const comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string const& text, std::size_t line)
{
    double value = 0.0;
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        raise(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + text + "'");
    }
    return value;
}

std::int64_t parse_count(std::string const& text, std::size_t line)
{
    std::int64_t value = 0;
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        // Accept integral values written as floats, e.g. "3.0".
        double const d = parse_double(text, line);
        if (d != std::floor(d) || std::abs(d) > 9.0e15) {
            raise(ErrorCode::ParseError,
                  "line " + std::to_string(line) + ": count '" + text + "' is not an integer");
        }
        return static_cast<std::int64_t>(d);
    }
    return value;
}

bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no)
{
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) return true;
    }
    return false;
}

Counts json_counts(nlohmann::json const& doc, char const* key, char const* alias, bool& found)
{
    found = false;
    for (char const* k : {key, alias}) {
        if (doc.contains(k)) {
            found = true;
            return doc.at(k).get<Counts>();
        }
    }
    return {};
}

}  // namespace

CaseData read_case_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!next_data_line(in, line, line_no)) {
        raise(ErrorCode::ParseError, "case CSV is empty");
    }
    auto const header = split_row(line);
    std::map<std::size_t, std::size_t> feature_column;  // feature index -> column
    std::optional<std::size_t> true_column, observed_column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto const& name = header[c];
        if (name == "N") {
            true_column = c;
        } else if (name == "n") {
            observed_column = c;
        } else if (name.size() > 1 && name[0] == 'x') {
            std::size_t index = 0;
            auto const [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (ec != std::errc() || ptr != name.data() + name.size() || index < 1) {
                raise(ErrorCode::ParseError, "bad feature column name '" + name + "'");
            }
            if (!feature_column.emplace(index - 1, c).second) {
                raise(ErrorCode::ParseError, "duplicate column '" + name + "'");
            }
        } else {
            raise(ErrorCode::ParseError, "unknown column '" + name + "'");
        }
    }
    std::size_t const d = feature_column.size();
    if (d == 0 || feature_column.rbegin()->first != d - 1) {
        raise(ErrorCode::ParseError, "feature columns must be x1..xd without gaps");
    }

    std::vector<std::vector<double>> rows;
    Counts true_counts, observed;
    while (next_data_line(in, line, line_no)) {
        auto const fields = split_row(line);
        if (fields.size() != header.size()) {
            raise(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size())
                      + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row(d);
        for (auto const& [feature, column] : feature_column) {
            row[feature] = parse_double(fields[column], line_no);
        }
        rows.push_back(std::move(row));
        if (true_column) true_counts.push_back(parse_count(fields[*true_column], line_no));
        if (observed_column) observed.push_back(parse_count(fields[*observed_column], line_no));
    }
    if (rows.empty()) raise(ErrorCode::ParseError, "case CSV has no data rows");

    FeatureMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        for (std::size_t c = 0; c < d; ++c) {
            X(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = rows[j][c];
        }
    }
    std::optional<Counts> truth;
    if (true_column) truth = std::move(true_counts);
    CaseData data{CaseTable(std::move(X), std::move(truth)), std::nullopt};
    if (observed_column) data.observed = std::move(observed);
    return data;
}

CaseData read_case_json(std::istream& in)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (nlohmann::json::exception const& e) {
        raise(ErrorCode::ParseError, e.what());
    }
    try {
        auto const rows = doc.at("features").get<std::vector<std::vector<double>>>();
        if (rows.empty() || rows.front().empty()) {
            raise(ErrorCode::ParseError, "features must be a non-empty matrix");
        }
        FeatureMatrix X(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (rows[j].size() != rows.front().size()) {
                raise(ErrorCode::ParseError, "feature rows differ in length");
            }
            for (std::size_t c = 0; c < rows[j].size(); ++c) {
                X(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = rows[j][c];
            }
        }
        bool has_truth = false, has_observed = false;
        Counts truth = json_counts(doc, "true_counts", "N", has_truth);
        Counts observed = json_counts(doc, "observed_counts", "n", has_observed);
        std::optional<Counts> maybe_truth;
        if (has_truth) maybe_truth = std::move(truth);
        CaseData data{CaseTable(std::move(X), std::move(maybe_truth)), std::nullopt};
        if (has_observed) data.observed = std::move(observed);
        return data;
    } catch (nlohmann::json::exception const& e) {
        raise(ErrorCode::ParseError, e.what());
    }
}

CaseData load_case_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
    bool const json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    CaseData data = json ? read_case_json(in) : read_case_csv(in);
    if (data.observed && data.observed->size() != data.table.num_cases()) {
        raise(ErrorCode::DimensionMismatch, "observed counts do not match the number of cases");
    }
    return data;
}

void write_case_csv(std::ostream& out, CaseTable const& table,
                    std::optional<std::span<std::int64_t const>> observed)
{
    auto const& X = table.features();
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        out << (c ? "," : "") << 'x' << (c + 1);
    }
    if (table.has_true_counts()) out << ",N";
    if (observed) out << ",n";
    out << '\n';
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            out << (c ? "," : "") << format_double(X(j, c));
        }
        auto const row = static_cast<std::size_t>(j);
        if (table.has_true_counts()) out << ',' << table.true_counts()[row];
        if (observed) out << ',' << (*observed)[row];
        out << '\n';
    }
}

Counts read_counts_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!next_data_line(in, line, line_no) || trim(line) != "n") {
        raise(ErrorCode::ParseError, "counts CSV must start with the header 'n'");
    }
    Counts counts;
    while (next_data_line(in, line, line_no)) {
        auto const value = parse_count(trim(line), line_no);
        if (value < 0) raise(ErrorCode::ParseError, "negative count on line " + std::to_string(line_no));
        counts.push_back(value);
    }
    return counts;
}

Counts load_counts_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
    return read_counts_csv(in);
}

void write_counts_csv(std::ostream& out, std::span<std::int64_t const> counts)
{
    out << "n\n";
    for (auto c : counts) out << c << '\n';
}

std::string format_double(double value)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

namespace {
nlohmann::json vector_json(Eigen::VectorXd const& v)
{
    auto array = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i])) {
            array.push_back(v[i]);
        } else {
            array.push_back(nullptr);
        }
    }
    return array;
}
}  // namespace

nlohmann::json to_json(FitResult const& result)
{
    return {
        {"beta_hat", vector_json(result.beta_hat)},
        {"std_errors", vector_json(result.std_errors)},
        {"loglik", result.loglik},
        {"diagnostics",
         {{"converged", result.converged},
          {"iterations", result.iterations},
          {"gradient_norm", result.gradient_norm}}},
        {"likelihood", std::string(to_string(result.kind))},
        {"link", std::string(to_string(result.link))},
        {"gamma", result.gamma},
        {"num_cases", result.num_cases},
    };
}

}  // namespace thincount
