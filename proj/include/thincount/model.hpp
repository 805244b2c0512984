#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace thincount {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Counts = std::vector<std::int64_t>;

//---------------------------------------------------------------------------//
/*!
 * Cases with their feature rows X_j and, in simulation, the true counts N_j.
 *
 * Immutable after construction. Rows must be finite; true counts, when
 * present, have one non-negative entry per case.
 */
class CaseTable
{
public:
    explicit CaseTable(FeatureMatrix features, std::optional<Counts> true_counts = std::nullopt);

    std::size_t num_cases() const noexcept { return static_cast<std::size_t>(features_.rows()); }
    std::size_t num_features() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    FeatureMatrix const& features() const noexcept { return features_; }

    bool has_true_counts() const noexcept { return true_counts_.has_value(); }
    //! Throws InvalidArgument when the table carries no true counts.
    std::span<std::int64_t const> true_counts() const;
    //! N_* = sum of the true counts.
    std::int64_t total_population() const;

    CaseTable with_true_counts(Counts counts) const;
    CaseTable subset(std::span<std::size_t const> rows) const;

private:
    FeatureMatrix features_;
    std::optional<Counts> true_counts_;
};

enum class Link { Identity, Log };

std::string_view to_string(Link link) noexcept;
Link parse_link(std::string_view name);

//! Coefficients and link defining mu_j for each case.
struct MeanStructure
{
    Eigen::VectorXd beta;
    Link link = Link::Identity;
};

enum class SchemeKind { WithReplacement, WithoutReplacement };

std::string_view to_string(SchemeKind kind) noexcept;
SchemeKind parse_scheme(std::string_view name);

//---------------------------------------------------------------------------//
/*!
 * How the observed subjects were drawn from the pooled population.
 *
 * Both totals are observed, so the sampling ratio is known exactly. Without
 * replacement the sample cannot exceed the population; with replacement it
 * can, and the ratio may then exceed one.
 */
class SamplingScheme
{
public:
    SamplingScheme(SchemeKind kind, std::int64_t n_star, std::int64_t N_star);

    SchemeKind kind() const noexcept { return kind_; }
    std::int64_t n_star() const noexcept { return n_star_; }
    std::int64_t N_star() const noexcept { return N_star_; }
    double gamma() const noexcept
    {
        return static_cast<double>(n_star_) / static_cast<double>(N_star_);
    }

private:
    SchemeKind kind_;
    std::int64_t n_star_;
    std::int64_t N_star_;
};

//! Observed counts n_j together with the scheme that produced them.
class CountSample
{
public:
    CountSample(Counts counts, SamplingScheme scheme);

    std::span<std::int64_t const> counts() const noexcept { return counts_; }
    SamplingScheme const& scheme() const noexcept { return scheme_; }
    std::size_t size() const noexcept { return counts_.size(); }

    //! WOR support check n_j <= N_j; throws SupportViolation.
    void check_support(std::span<std::int64_t const> true_counts) const;

private:
    Counts counts_;
    SamplingScheme scheme_;
};

/// Per-case Poisson means mu_j = X_j'beta (Identity) or exp(X_j'beta) (Log).
///
/// Identity link raises NonPositiveMean naming the first case with mu_j <= 0.
Eigen::VectorXd mean_vector(CaseTable const& table, MeanStructure const& ms);

/// Same as above on a raw feature matrix.
Eigen::VectorXd mean_vector(FeatureMatrix const& features, MeanStructure const& ms);

double gamma(SamplingScheme const& scheme) noexcept;

//! p_j = N_j / N_*; raises EmptyPopulation when every N_j is zero.
std::vector<double> population_fractions(std::span<std::int64_t const> N);

std::int64_t total(std::span<std::int64_t const> values);

}  // namespace thincount
