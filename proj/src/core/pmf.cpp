#include "thincount/pmf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <math.h>

#include "thincount/error.hpp"

namespace thincount {
namespace {

constexpr std::int64_t kTableSize = 4096;

std::array<double, kTableSize> const& log_factorial_table()
{
    static auto const table = [] {
        std::array<double, kTableSize> t{};
        for (std::int64_t n = 0; n < kTableSize; ++n) {
            t[static_cast<std::size_t>(n)] = log_gamma(static_cast<double>(n) + 1.0);
        }
        return t;
    }();
    return table;
}

constexpr double kSumTolerance = 1e-12;

}  // namespace

double log_gamma(double x)
{
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_factorial(std::int64_t n)
{
    if (n < 0) {
        raise(ErrorCode::InvalidParameter, "factorial of negative number");
    }
    if (n < kTableSize) {
        return log_factorial_table()[static_cast<std::size_t>(n)];
    }
    return log_gamma(static_cast<double>(n) + 1.0);
}

double log_choose(std::int64_t n, std::int64_t k)
{
    if (k < 0 || k > n) {
        return -std::numeric_limits<double>::infinity();
    }
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_add(double a, double b) noexcept
{
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

LogProb log_poisson_pmf(std::int64_t t, double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        raise(ErrorCode::InvalidParameter, "Poisson rate must be positive, got " + std::to_string(lambda));
    }
    if (t < 0) {
        raise(ErrorCode::InvalidParameter, "Poisson outcome must be non-negative");
    }
    return {static_cast<double>(t) * std::log(lambda) - lambda - log_factorial(t)};
}

LogProb log_binomial_pmf(std::int64_t t, std::int64_t N, double gamma)
{
    if (N < 0 || t < 0 || t > N) {
        raise(ErrorCode::InvalidParameter,
              "binomial outcome " + std::to_string(t) + " outside [0, " + std::to_string(N) + "]");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        raise(ErrorCode::InvalidParameter, "binomial probability outside [0, 1]");
    }
    if (gamma == 0.0) return t == 0 ? LogProb::certain() : LogProb::zero();
    if (gamma == 1.0) return t == N ? LogProb::certain() : LogProb::zero();
    return {log_choose(N, t) + static_cast<double>(t) * std::log(gamma)
            + static_cast<double>(N - t) * std::log1p(-gamma)};
}

LogProb log_multinomial_pmf(std::span<std::int64_t const> n, std::int64_t n_star,
                            std::span<double const> p)
{
    if (n.size() != p.size()) {
        raise(ErrorCode::InvalidProbabilityVector, "counts and probabilities differ in length");
    }
    double p_sum = 0.0;
    for (double pj : p) {
        if (!(pj >= 0.0 && pj <= 1.0)) {
            raise(ErrorCode::InvalidProbabilityVector, "probability outside [0, 1]");
        }
        p_sum += pj;
    }
    if (std::abs(p_sum - 1.0) > kSumTolerance) {
        raise(ErrorCode::InvalidProbabilityVector,
              "probabilities sum to " + std::to_string(p_sum));
    }
    std::int64_t n_sum = 0;
    double value = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] < 0) {
            raise(ErrorCode::InvalidParameter, "negative count");
        }
        n_sum += n[j];
        if (n[j] == 0) continue;
        if (p[j] == 0.0) return LogProb::zero();
        value += static_cast<double>(n[j]) * std::log(p[j]) - log_factorial(n[j]);
    }
    if (n_sum != n_star) {
        raise(ErrorCode::TotalMismatch,
              "counts sum to " + std::to_string(n_sum) + ", expected " + std::to_string(n_star));
    }
    return {value + log_factorial(n_star)};
}

LogProb log_mvhypergeom_pmf(std::span<std::int64_t const> n, std::span<std::int64_t const> N,
                            std::int64_t n_star)
{
    if (n.size() != N.size()) {
        raise(ErrorCode::SupportViolation, "sample and population vectors differ in length");
    }
    std::int64_t n_sum = 0;
    std::int64_t N_sum = 0;
    double value = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] < 0 || n[j] > N[j]) {
            raise(ErrorCode::SupportViolation,
                  "n_" + std::to_string(j) + " = " + std::to_string(n[j]) + " outside [0, "
                      + std::to_string(N[j]) + "]");
        }
        n_sum += n[j];
        N_sum += N[j];
        value += log_choose(N[j], n[j]);
    }
    if (n_sum != n_star) {
        raise(ErrorCode::TotalMismatch,
              "counts sum to " + std::to_string(n_sum) + ", expected " + std::to_string(n_star));
    }
    if (n_star > N_sum) {
        raise(ErrorCode::SupportViolation, "sample larger than population");
    }
    return {value - log_choose(N_sum, n_star)};
}

LogProb hypergeom_marginal_pmf(std::int64_t t, std::int64_t N_j, std::int64_t N_star,
                               std::int64_t n_star)
{
    if (N_j < 0 || N_j > N_star || n_star < 0 || n_star > N_star) {
        raise(ErrorCode::SupportViolation, "inconsistent hypergeometric parameters");
    }
    auto const lo = std::max<std::int64_t>(0, n_star - (N_star - N_j));
    auto const hi = std::min(n_star, N_j);
    if (t < lo || t > hi) {
        raise(ErrorCode::SupportViolation,
              "t = " + std::to_string(t) + " outside [" + std::to_string(lo) + ", "
                  + std::to_string(hi) + "]");
    }
    return {log_choose(N_j, t) + log_choose(N_star - N_j, n_star - t) - log_choose(N_star, n_star)};
}

double normal_pdf(double x, double mean, double variance)
{
    if (!(variance > 0.0)) {
        raise(ErrorCode::InvalidParameter, "normal variance must be positive");
    }
    double const z = x - mean;
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

}  // namespace thincount
