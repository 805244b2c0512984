#include "thincount/experiments.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "thincount/asymptotics.hpp"
#include "thincount/error.hpp"
#include "thincount/inference.hpp"
#include "thincount/io.hpp"
#include "thincount/parallel.hpp"
#include "thincount/sampler.hpp"

namespace thincount {
namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240601;

void check_keys(json const& params, std::set<std::string> const& allowed)
{
    if (!params.is_object()) raise(ErrorCode::SpecValidation, "parameters must be an object");
    for (auto const& item : params.items()) {
        if (!allowed.contains(item.key())) {
            raise(ErrorCode::SpecValidation, "unknown parameter '" + item.key() + "'");
        }
    }
}

template<class T>
T param(json const& params, char const* key, T fallback)
{
    if (!params.contains(key)) return fallback;
    try {
        return params.at(key).get<T>();
    } catch (json::exception const&) {
        raise(ErrorCode::SpecValidation, std::string("parameter '") + key + "' has the wrong type");
    }
}

template<class T>
std::vector<T> param_list(json const& params, char const* key, std::vector<T> fallback)
{
    if (!params.contains(key)) return fallback;
    auto const& v = params.at(key);
    try {
        if (v.is_array()) return v.get<std::vector<T>>();
        return {v.get<T>()};
    } catch (json::exception const&) {
        raise(ErrorCode::SpecValidation, std::string("parameter '") + key + "' has the wrong type");
    }
}

double gamma_param(json const& params, double fallback)
{
    double const g = param(params, "gamma", fallback);
    if (!(g > 0.0 && g <= 1.0)) raise(ErrorCode::SpecValidation, "gamma must lie in (0, 1]");
    return g;
}

//! {"constant": 10} | {"cycle": [lo, hi]} | {"values": [...]}; default cycles 5..15.
CountGenerator generator_param(json const& params)
{
    if (!params.contains("counts")) return CountGenerator::cycle(5, 15);
    auto const& g = params.at("counts");
    try {
        if (g.contains("constant")) return CountGenerator::constant(g.at("constant").get<std::int64_t>());
        if (g.contains("cycle")) {
            auto const range = g.at("cycle").get<std::vector<std::int64_t>>();
            if (range.size() != 2) raise(ErrorCode::SpecValidation, "cycle needs [lo, hi]");
            return CountGenerator::cycle(range[0], range[1]);
        }
        if (g.contains("values")) return CountGenerator(g.at("values").get<std::vector<std::int64_t>>());
    } catch (json::exception const&) {
        raise(ErrorCode::SpecValidation, "malformed count generator");
    }
    raise(ErrorCode::SpecValidation, "count generator needs 'constant', 'cycle' or 'values'");
}

RngSpec rng_param(json const& params)
{
    return {param<std::uint64_t>(params, "seed", kDefaultSeed), param<std::uint64_t>(params, "stream", 0)};
}

std::string str(double v) { return format_double(v); }
std::string str(std::int64_t v) { return std::to_string(v); }
std::string str(std::size_t v) { return std::to_string(v); }

bool strictly_decreasing(std::vector<double> const& v)
{
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

void run_convergence(ExperimentSpec const& spec, Report& report)
{
    auto const& p = spec.parameters;
    check_keys(p, {"J", "gamma", "counts", "case_index"});
    RegimeSweep sweep;
    sweep.J_values = param_list<std::size_t>(p, "J", {5, 50, 500});
    sweep.generator = generator_param(p);
    sweep.gamma_target = gamma_param(p, 0.3);
    sweep.validate();
    auto const j = param<std::size_t>(p, "case_index", 0);
    bool const wr = spec.kind == ExperimentKind::ConvergenceWr;

    report.columns = {"J", "N_star", "n_star", "tv_distance", "support_truncation_mass", "t_max"};
    std::vector<double> tvs;
    for (auto J : sweep.J_values) {
        auto const inst = sweep.instance(J);
        TvReport const tv = wr ? tv_marginal_wr(inst.N, inst.n_star, j)
                               : tv_marginal_wor(inst.N, inst.n_star, j);
        tvs.push_back(tv.tv_distance);
        report.rows.push_back({str(J), str(inst.N_star), str(inst.n_star), str(tv.tv_distance),
                               str(tv.support_truncation_mass), str(tv.t_max)});
    }
    report.summary = {{"strictly_decreasing", strictly_decreasing(tvs)},
                      {"final_tv_distance", tvs.back()}};
}

void run_stirling(ExperimentSpec const& spec, Report& report)
{
    auto const& p = spec.parameters;
    check_keys(p, {"scheme", "gamma", "J", "counts", "n_star", "N_star"});
    auto const kind = parse_scheme(param<std::string>(p, "scheme", "wr"));
    double const g = gamma_param(p, 0.5);

    struct Instance { std::size_t J; Counts N; std::int64_t n_star; };
    std::vector<Instance> instances;
    if (p.contains("n_star")) {
        // A single case of size n_*, so the Poisson total has rate exactly n_*.
        for (auto n : param_list<std::int64_t>(p, "n_star", {})) instances.push_back({1, {n}, n});
    } else if (p.contains("N_star")) {
        for (auto N : param_list<std::int64_t>(p, "N_star", {})) {
            instances.push_back({1, {N}, std::llround(g * static_cast<double>(N))});
        }
    } else {
        RegimeSweep sweep;
        sweep.J_values = param_list<std::size_t>(p, "J", {10, 100, 1000});
        sweep.generator = generator_param(p);
        sweep.gamma_target = g;
        sweep.validate();
        for (auto J : sweep.J_values) {
            auto inst = sweep.instance(J);
            instances.push_back({J, std::move(inst.N), inst.n_star});
        }
    }
    report.columns = {"J", "N_star", "n_star", "lhs", "rhs", "ratio", "abs_error"};
    double last = 0.0;
    for (auto const& inst : instances) {
        auto const check = stirling_constant_check(inst.N, inst.n_star, kind);
        last = std::abs(check.ratio() - 1.0);
        report.rows.push_back({str(inst.J), str(total(inst.N)), str(inst.n_star), str(check.lhs),
                               str(check.rhs), str(check.ratio()), str(last)});
    }
    report.summary = {{"scheme", std::string(to_string(kind))}, {"final_abs_error", last}};
}

void run_lemma(ExperimentSpec const& spec, Report& report)
{
    auto const& p = spec.parameters;
    check_keys(p, {"x", "k", "M", "eps_scale", "eps_power", "delta_scale", "delta_power"});
    auto const xs = param_list<double>(p, "x", {2.0});
    int const k = param(p, "k", 1);
    auto const Ms = param_list<std::int64_t>(p, "M", {100, 1000, 10000, 100000});
    double const eps_scale = param(p, "eps_scale", 1.0);
    double const eps_power = param(p, "eps_power", 1.0);
    double const delta_scale = param(p, "delta_scale", 1.0);
    double const delta_power = param(p, "delta_power", 0.5);

    report.columns = {"x", "M", "eps", "delta", "value", "rel_error"};
    json decreasing = json::object();
    for (double x : xs) {
        std::vector<double> errors;
        for (auto M : Ms) {
            double const m = static_cast<double>(M);
            double const eps = eps_scale / std::pow(m, eps_power);
            double const delta = delta_scale / std::pow(m, delta_power);
            double const value = lemma_sum_check(x, k, M, eps, delta);
            double const rel = std::abs(value / std::exp(x) - 1.0);
            errors.push_back(rel);
            report.rows.push_back({str(x), str(M), str(eps), str(delta), str(value), str(rel)});
        }
        decreasing[format_double(x)] = strictly_decreasing(errors);
    }
    report.summary = {{"rel_error_decreasing", decreasing}};
}

//! Intercept column plus `covariates` uniform(0, 1) columns from a fixed stream.
FeatureMatrix study_design(std::size_t J, std::size_t covariates, RngSpec rng_spec)
{
    FeatureMatrix X(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(covariates + 1));
    CounterRng rng(substream(rng_spec, 0, 0xD5u));
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        X(j, 0) = 1.0;
        for (Eigen::Index c = 1; c < X.cols(); ++c) X(j, c) = rng.uniform();
    }
    return X;
}

void run_bias(ExperimentSpec const& spec, Report& report)
{
    auto const& p = spec.parameters;
    check_keys(p, {"J", "gamma", "beta", "link", "reps", "seed", "stream", "scheme", "covariates"});
    auto const J = param<std::size_t>(p, "J", 5000);
    double const g = gamma_param(p, 0.25);
    auto const beta_list = param_list<double>(p, "beta", {4.0});
    Link const link = parse_link(param<std::string>(p, "link", "identity"));
    auto const reps = param<std::size_t>(p, "reps", 200);
    auto const scheme = parse_scheme(param<std::string>(p, "scheme", "wor"));
    auto const covariates = param<std::size_t>(p, "covariates", 0);
    RngSpec const rng_spec = rng_param(p);
    if (J < 1 || reps < 1) raise(ErrorCode::SpecValidation, "J and reps must be positive");
    if (beta_list.size() != covariates + 1) {
        raise(ErrorCode::SpecValidation, "beta needs one entry per column (intercept + covariates)");
    }

    CaseTable const design(study_design(J, covariates, rng_spec));
    MeanStructure const ms{Eigen::Map<Eigen::VectorXd const>(beta_list.data(),
                                                             static_cast<Eigen::Index>(beta_list.size())),
                           link};
    mean_vector(design, ms);  // validates the truth before spawning work
    bool const wr = scheme == SchemeKind::WithReplacement;
    auto const base_basis = wr ? std::make_shared<TouchardBasis const>(build_basis()) : nullptr;

    struct Replication
    {
        std::int64_t N_star = 0, n_star = 0;
        FitResult adjusted, naive, touchard;
    };
    std::vector<Replication> results(reps);
    parallel_for(reps, [&](std::size_t r) {
        CounterRng count_rng(substream(rng_spec, r, 1));
        CounterRng sample_rng(substream(rng_spec, r, 2));
        Counts const N = draw_true_counts(design, ms, count_rng);
        Replication& out = results[r];
        out.N_star = total(N);
        out.n_star = std::llround(g * static_cast<double>(out.N_star));
        if (out.n_star < 1) raise(ErrorCode::SpecValidation, "replication drew an empty sample");
        CountSample const sample = wr ? sample_wr(N, out.n_star, sample_rng)
                                      : sample_wor(N, out.n_star, sample_rng);
        double const gamma_hat = sample.scheme().gamma();
        out.adjusted = fit(design, sample.counts(), Likelihood::wor_adjusted(gamma_hat), link);
        out.naive = fit(design, sample.counts(), Likelihood::naive(), link);
        if (wr) {
            auto basis = base_basis;
            auto const largest = *std::max_element(sample.counts().begin(), sample.counts().end());
            if (largest > basis->t_max()) {
                basis = std::make_shared<TouchardBasis const>(build_basis(static_cast<int>(largest)));
            }
            out.touchard = fit(design, sample.counts(), Likelihood::wr_touchard(gamma_hat, basis), link);
        }
    });

    std::vector<std::string> estimators = {"adjusted", "naive"};
    if (wr) estimators.push_back("wr_touchard");
    report.columns = {"replication", "N_star", "n_star"};
    for (auto const& e : estimators) {
        for (std::size_t c = 0; c <= covariates; ++c) {
            report.columns.push_back("beta_" + e + "_" + std::to_string(c));
        }
        report.columns.push_back("converged_" + e);
    }
    auto const d = static_cast<Eigen::Index>(covariates + 1);
    std::vector<Eigen::VectorXd> sums(estimators.size(), Eigen::VectorXd::Zero(d));
    std::vector<std::size_t> converged(estimators.size(), 0);
    for (std::size_t r = 0; r < reps; ++r) {
        auto const& rep = results[r];
        std::vector<std::string> row = {str(r), str(rep.N_star), str(rep.n_star)};
        FitResult const* fits[] = {&rep.adjusted, &rep.naive, &rep.touchard};
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            for (Eigen::Index c = 0; c < d; ++c) row.push_back(str(fits[e]->beta_hat[c]));
            row.push_back(fits[e]->converged ? "1" : "0");
            sums[e] += fits[e]->beta_hat;
            converged[e] += fits[e]->converged ? 1 : 0;
        }
        report.rows.push_back(std::move(row));
    }
    json estimates = json::object();
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        Eigen::VectorXd const mean = sums[e] / static_cast<double>(reps);
        estimates[estimators[e]] = {{"mean_beta", std::vector<double>(mean.data(), mean.data() + d)},
                                    {"converged", converged[e]}};
    }
    report.summary = {{"estimators", estimates}, {"true_beta", beta_list}, {"gamma", g}};
    if (link == Link::Identity) {
        std::vector<double> thinned(beta_list);
        for (double& b : thinned) b *= g;
        report.summary["naive_target"] = thinned;
    }
}

void run_joint_moments(ExperimentSpec const& spec, Report& report)
{
    auto const& p = spec.parameters;
    check_keys(p, {"J", "mu", "gamma", "k", "reps", "seed", "stream"});
    auto const J = param<std::size_t>(p, "J", 500);
    double const mu = param(p, "mu", 2.0);
    double const g = gamma_param(p, 0.3);
    auto const k = param<std::size_t>(p, "k", 0);
    auto const reps = param<std::size_t>(p, "reps", 20000);
    if (J < 1 || !(mu > 0.0)) raise(ErrorCode::SpecValidation, "J and mu must be positive");

    CaseTable const table(FeatureMatrix::Ones(static_cast<Eigen::Index>(J), 1));
    MeanStructure const ms{Eigen::VectorXd::Constant(1, mu), Link::Identity};
    auto const r = joint_limit_moments_check(table, ms, g, k, reps, rng_param(p));

    report.columns = {"statistic", "estimate", "standard_error", "target", "z_score"};
    std::pair<char const*, MomentEstimate const*> const stats[] = {
        {"mean_n_k", &r.mean_observed},          {"var_n_k", &r.var_observed},
        {"dispersion_n_k", &r.dispersion},       {"mean_N_star", &r.mean_population},
        {"var_N_star", &r.var_population},       {"corr_n_k_rest", &r.corr_with_rest},
    };
    bool all_within = true;
    for (auto const& [name, m] : stats) {
        report.rows.push_back({name, str(m->estimate), str(m->standard_error), str(m->target),
                               str(m->z_score())});
        all_within = all_within && std::abs(m->z_score()) < 3.0;
    }
    report.summary = {{"all_within_3_se", all_within}, {"replications", reps}};
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept
{
    switch (kind) {
    case ExperimentKind::ConvergenceWr: return "ConvergenceWr";
    case ExperimentKind::ConvergenceWor: return "ConvergenceWor";
    case ExperimentKind::BiasStudy: return "BiasStudy";
    case ExperimentKind::StirlingCheck: return "StirlingCheck";
    case ExperimentKind::LemmaCheck: return "LemmaCheck";
    case ExperimentKind::JointMoments: return "JointMoments";
    }
    return "Unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name)
{
    for (auto kind : {ExperimentKind::ConvergenceWr, ExperimentKind::ConvergenceWor,
                      ExperimentKind::BiasStudy, ExperimentKind::StirlingCheck,
                      ExperimentKind::LemmaCheck, ExperimentKind::JointMoments}) {
        if (to_string(kind) == name) return kind;
    }
    raise(ErrorCode::SpecValidation, "unknown experiment kind '" + std::string(name) + "'");
}

ExperimentSpec parse_experiment_spec(nlohmann::json const& doc)
{
    if (!doc.is_object()) raise(ErrorCode::SpecValidation, "experiment spec must be a JSON object");
    check_keys(doc, {"name", "kind", "parameters", "output_path"});
    ExperimentSpec spec;
    try {
        spec.name = doc.at("name").get<std::string>();
        spec.kind = parse_experiment_kind(doc.at("kind").get<std::string>());
        spec.parameters = doc.value("parameters", nlohmann::json::object());
        spec.output_path = doc.value("output_path", std::string("."));
    } catch (nlohmann::json::exception const& e) {
        raise(ErrorCode::SpecValidation, e.what());
    }
    if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos) {
        raise(ErrorCode::SpecValidation, "name must be a non-empty file stem");
    }
    return spec;
}

ExperimentSpec load_experiment_spec(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    try {
        return parse_experiment_spec(nlohmann::json::parse(in));
    } catch (nlohmann::json::parse_error const& e) {
        raise(ErrorCode::ParseError, e.what());
    }
}

std::string Report::csv() const
{
    std::ostringstream out;
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (auto const& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
    return out.str();
}

nlohmann::json Report::summary_json() const
{
    return {{"spec",
             {{"name", spec.name},
              {"kind", std::string(to_string(spec.kind))},
              {"parameters", spec.parameters},
              {"output_path", spec.output_path}}},
            {"summary", summary},
            {"rows", rows.size()},
            {"wall_clock_seconds", wall_clock_seconds}};
}

Report run(ExperimentSpec const& spec)
{
    auto const start = std::chrono::steady_clock::now();
    Report report;
    report.spec = spec;
    try {
        switch (spec.kind) {
        case ExperimentKind::ConvergenceWr:
        case ExperimentKind::ConvergenceWor: run_convergence(spec, report); break;
        case ExperimentKind::BiasStudy: run_bias(spec, report); break;
        case ExperimentKind::StirlingCheck: run_stirling(spec, report); break;
        case ExperimentKind::LemmaCheck: run_lemma(spec, report); break;
        case ExperimentKind::JointMoments: run_joint_moments(spec, report); break;
        }
    } catch (Error const& e) {
        throw Error(e.code(), "experiment '" + spec.name + "': " + e.what());
    }
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::pair<std::filesystem::path, std::filesystem::path> write_report(Report const& report)
{
    std::filesystem::path const dir(report.spec.output_path.empty() ? "." : report.spec.output_path);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
    auto const csv_path = dir / (report.spec.name + ".csv");
    auto const json_path = dir / (report.spec.name + ".json");
    {
        std::ofstream out(csv_path);
        if (!out) raise(ErrorCode::IoError, "cannot write '" + csv_path.string() + "'");
        out << report.csv();
    }
    {
        std::ofstream out(json_path);
        if (!out) raise(ErrorCode::IoError, "cannot write '" + json_path.string() + "'");
        out << report.summary_json().dump(2) << '\n';
    }
    return {csv_path, json_path};
}

}  // namespace thincount
