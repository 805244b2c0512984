#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thincount/model.hpp"
#include "thincount/pmf.hpp"
#include "thincount/rng.hpp"

namespace thincount {

//! Deterministic bounded sequence of true counts: N_j = values[j % size].
class CountGenerator
{
public:
    explicit CountGenerator(std::vector<std::int64_t> values);

    static CountGenerator constant(std::int64_t value);
    //! Cycles lo, lo+1, ..., hi.
    static CountGenerator cycle(std::int64_t lo, std::int64_t hi);

    Counts generate(std::size_t J) const;
    std::int64_t bound() const noexcept { return bound_; }
    std::span<std::int64_t const> values() const noexcept { return values_; }

private:
    std::vector<std::int64_t> values_;
    std::int64_t bound_ = 0;
};

//---------------------------------------------------------------------------//
/*!
 * A sequence of growing instances: J cases from a bounded generator, with
 * n_* = round(gamma * N_*) so the sampling ratio stays fixed.
 */
struct RegimeSweep
{
    struct Instance
    {
        Counts N;
        std::int64_t N_star;
        std::int64_t n_star;
    };

    std::vector<std::size_t> J_values;
    CountGenerator generator = CountGenerator::cycle(5, 15);
    double gamma_target = 0.3;

    void validate() const;
    Instance instance(std::size_t J) const;
};

struct TvReport
{
    std::size_t J = 0;
    double tv_distance = 0.0;
    //! Mass of both distributions above t_max, omitted from the sum.
    double support_truncation_mass = 0.0;
    std::int64_t t_max = 0;
};

//! Limit of one WR coordinate: Poisson(gamma * N_j).
LogProb wr_marginal_limit_pmf(std::int64_t t, std::int64_t N_j, double gamma);
//! Limit of one WOR coordinate: Binomial(N_j, gamma).
LogProb wor_marginal_limit_pmf(std::int64_t t, std::int64_t N_j, double gamma);

/// TV between the exact WR marginal Binomial(n_*, N_j/N_*) and its Poisson
/// limit. Both are summed up to the first t_max where each upper tail is
/// below 1e-12; the omitted tails are reported.
TvReport tv_marginal_wr(std::span<std::int64_t const> N, std::int64_t n_star, std::size_t j);

/// TV between the exact WOR marginal (univariate hypergeometric) and
/// Binomial(N_j, gamma). Finite support, nothing truncated.
TvReport tv_marginal_wor(std::span<std::int64_t const> N, std::int64_t n_star, std::size_t j);

struct StirlingCheck
{
    double lhs;
    double rhs;
    double ratio() const noexcept { return lhs / rhs; }
};

/// Normalizing constants of the conditioned product laws against their
/// Stirling approximations. WR: (sqrt(2 pi n_*), 1/Pr(Poisson(sum lambda) = n_*)).
/// WOR: (sqrt(2 pi (1-gamma) n_*), 1/Pr(Binomial(N_*, gamma) = n_*)).
StirlingCheck stirling_constant_check(std::span<std::int64_t const> N, std::int64_t n_star,
                                      SchemeKind kind);

/// sum_{i=0}^{M} exp(-eps (i+k)^2 + delta (i+k)) x^i / i!, summed in log space.
double lemma_sum_check(double x, int k, std::int64_t M, double eps, double delta);

struct MomentEstimate
{
    double estimate = 0.0;
    double standard_error = 0.0;
    double target = 0.0;

    //! Deviation from target in standard errors.
    double z_score() const noexcept;
};

struct JointMomentsReport
{
    std::size_t replications = 0;
    std::size_t case_index = 0;
    MomentEstimate mean_observed;      // n_k, target gamma * mu_k
    MomentEstimate var_observed;       // n_k, target gamma * mu_k
    MomentEstimate dispersion;         // var/mean of n_k, target 1
    MomentEstimate mean_population;    // N_*, target sum mu_j
    MomentEstimate var_population;     // N_*, target sum mu_j
    MomentEstimate corr_with_rest;     // corr(n_k, N_* - N_k), target 0
};

/// Monte Carlo over (N_j ~ Poisson(mu_j), n_* = round(gamma N_*), WOR sample).
/// Replication r draws from substreams of `spec` indexed by r.
JointMomentsReport joint_limit_moments_check(CaseTable const& table, MeanStructure const& ms,
                                             double gamma, std::size_t k, std::size_t reps,
                                             RngSpec spec);

}  // namespace thincount
