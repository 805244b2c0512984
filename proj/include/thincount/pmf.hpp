#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace thincount {

//! Natural-log probability; -inf encodes an impossible outcome.
struct LogProb
{
    double value = 0.0;

    double prob() const noexcept { return std::exp(value); }
    bool impossible() const noexcept { return value == -std::numeric_limits<double>::infinity(); }

    static constexpr LogProb certain() noexcept { return {0.0}; }
    static constexpr LogProb zero() noexcept { return {-std::numeric_limits<double>::infinity()}; }
};

// Log-gamma and friends. Reentrant, unlike std::lgamma on glibc.
double log_gamma(double x);
double log_factorial(std::int64_t n);
double log_choose(std::int64_t n, std::int64_t k);

//! Poisson(lambda) at t; lambda > 0, t >= 0.
LogProb log_poisson_pmf(std::int64_t t, double lambda);

//! Binomial(N, gamma) at t; gamma = 0 and 1 are exact point masses.
LogProb log_binomial_pmf(std::int64_t t, std::int64_t N, double gamma);

//! Multinomial(n_star, p) at n.
LogProb log_multinomial_pmf(std::span<std::int64_t const> n, std::int64_t n_star,
                            std::span<double const> p);

//! Multivariate hypergeometric: n_star drawn without replacement from groups of sizes N.
LogProb log_mvhypergeom_pmf(std::span<std::int64_t const> n, std::span<std::int64_t const> N,
                            std::int64_t n_star);

//! Univariate hypergeometric: coordinate j of the above, N_j of N_star marked.
LogProb hypergeom_marginal_pmf(std::int64_t t, std::int64_t N_j, std::int64_t N_star,
                               std::int64_t n_star);

double normal_pdf(double x, double mean, double variance);

//! log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) noexcept;

}  // namespace thincount
