#include "thincount/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "thincount/error.hpp"

namespace thincount {

CaseTable::CaseTable(FeatureMatrix features, std::optional<Counts> true_counts)
    : features_(std::move(features)), true_counts_(std::move(true_counts))
{
    if (features_.rows() < 1 || features_.cols() < 1) {
        raise(ErrorCode::DimensionMismatch, "case table needs at least one case and one feature");
    }
    if (!features_.allFinite()) {
        for (Eigen::Index j = 0; j < features_.rows(); ++j) {
            if (!features_.row(j).allFinite()) {
                raise(ErrorCode::InvalidArgument,
                      "non-finite feature in case " + std::to_string(j));
            }
        }
    }
    if (true_counts_) {
        if (true_counts_->size() != num_cases()) {
            raise(ErrorCode::DimensionMismatch,
                  "true counts have length " + std::to_string(true_counts_->size())
                      + ", expected " + std::to_string(num_cases()));
        }
        for (std::size_t j = 0; j < true_counts_->size(); ++j) {
            if ((*true_counts_)[j] < 0) {
                raise(ErrorCode::InvalidArgument,
                      "negative true count in case " + std::to_string(j));
            }
        }
    }
}

std::span<std::int64_t const> CaseTable::true_counts() const
{
    if (!true_counts_) {
        raise(ErrorCode::InvalidArgument, "case table has no true counts");
    }
    return *true_counts_;
}

std::int64_t CaseTable::total_population() const
{
    return total(true_counts());
}

CaseTable CaseTable::with_true_counts(Counts counts) const
{
    return CaseTable(features_, std::move(counts));
}

CaseTable CaseTable::subset(std::span<std::size_t const> rows) const
{
    FeatureMatrix sub(static_cast<Eigen::Index>(rows.size()), features_.cols());
    std::optional<Counts> sub_counts;
    if (true_counts_) {
        sub_counts.emplace();
        sub_counts->reserve(rows.size());
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= num_cases()) {
            raise(ErrorCode::DimensionMismatch, "subset row out of range");
        }
        sub.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(rows[i]));
        if (sub_counts) {
            sub_counts->push_back((*true_counts_)[rows[i]]);
        }
    }
    return CaseTable(std::move(sub), std::move(sub_counts));
}

std::string_view to_string(Link link) noexcept
{
    return link == Link::Identity ? "identity" : "log";
}

Link parse_link(std::string_view name)
{
    if (name == "identity") return Link::Identity;
    if (name == "log") return Link::Log;
    raise(ErrorCode::InvalidArgument, "unknown link '" + std::string(name) + "'");
}

std::string_view to_string(SchemeKind kind) noexcept
{
    return kind == SchemeKind::WithReplacement ? "wr" : "wor";
}

SchemeKind parse_scheme(std::string_view name)
{
    if (name == "wr") return SchemeKind::WithReplacement;
    if (name == "wor") return SchemeKind::WithoutReplacement;
    raise(ErrorCode::InvalidArgument, "unknown sampling scheme '" + std::string(name) + "'");
}

SamplingScheme::SamplingScheme(SchemeKind kind, std::int64_t n_star, std::int64_t N_star)
    : kind_(kind), n_star_(n_star), N_star_(N_star)
{
    if (n_star_ < 1) {
        raise(ErrorCode::InvalidArgument, "sample total n_* must be at least 1");
    }
    if (N_star_ < 1) {
        raise(ErrorCode::EmptyPopulation, "population total N_* must be at least 1");
    }
    if (kind_ == SchemeKind::WithoutReplacement && n_star_ > N_star_) {
        raise(ErrorCode::SampleExceedsPopulation,
              "n_* = " + std::to_string(n_star_) + " exceeds N_* = " + std::to_string(N_star_));
    }
}

CountSample::CountSample(Counts counts, SamplingScheme scheme)
    : counts_(std::move(counts)), scheme_(scheme)
{
    for (auto c : counts_) {
        if (c < 0) {
            raise(ErrorCode::InvalidArgument, "observed counts must be non-negative");
        }
    }
    if (total(counts_) != scheme_.n_star()) {
        raise(ErrorCode::TotalMismatch,
              "observed counts sum to " + std::to_string(total(counts_)) + ", scheme says n_* = "
                  + std::to_string(scheme_.n_star()));
    }
}

void CountSample::check_support(std::span<std::int64_t const> true_counts) const
{
    if (true_counts.size() != counts_.size()) {
        raise(ErrorCode::DimensionMismatch, "true and observed counts differ in length");
    }
    if (scheme_.kind() != SchemeKind::WithoutReplacement) return;
    for (std::size_t j = 0; j < counts_.size(); ++j) {
        if (counts_[j] > true_counts[j]) {
            raise(ErrorCode::SupportViolation,
                  "case " + std::to_string(j) + " observed more subjects than it has");
        }
    }
}

Eigen::VectorXd mean_vector(FeatureMatrix const& features, MeanStructure const& ms)
{
    if (features.cols() != ms.beta.size()) {
        raise(ErrorCode::DimensionMismatch,
              "beta has " + std::to_string(ms.beta.size()) + " entries, features have "
                  + std::to_string(features.cols()) + " columns");
    }
    Eigen::VectorXd eta = features * ms.beta;
    if (ms.link == Link::Log) {
        return eta.array().exp().matrix();
    }
    for (Eigen::Index j = 0; j < eta.size(); ++j) {
        if (!(eta[j] > 0.0)) {
            raise(ErrorCode::NonPositiveMean,
                  "identity link gives mu_" + std::to_string(j) + " = " + std::to_string(eta[j]));
        }
    }
    return eta;
}

Eigen::VectorXd mean_vector(CaseTable const& table, MeanStructure const& ms)
{
    return mean_vector(table.features(), ms);
}

double gamma(SamplingScheme const& scheme) noexcept
{
    return scheme.gamma();
}

std::int64_t total(std::span<std::int64_t const> values)
{
    return std::accumulate(values.begin(), values.end(), std::int64_t{0});
}

std::vector<double> population_fractions(std::span<std::int64_t const> N)
{
    auto const N_star = total(N);
    if (N_star <= 0) {
        raise(ErrorCode::EmptyPopulation, "population is empty");
    }
    std::vector<double> p(N.size());
    for (std::size_t j = 0; j < N.size(); ++j) {
        p[j] = static_cast<double>(N[j]) / static_cast<double>(N_star);
    }
    return p;
}

}  // namespace thincount
