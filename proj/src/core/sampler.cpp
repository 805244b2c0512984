#include "thincount/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thincount/error.hpp"

namespace thincount {
namespace {

// Weights below this (relative to the mode, which has weight 1) are dropped.
constexpr double kNegligible = 1e-20;

/*!
 * Inverse-cdf draw from a log-concave pmf on [lo, hi].
 *
 * `ratio(t)` must return p(t+1)/p(t) for lo <= t < hi. Weights are walked
 * outward from the mode to find the effective support, then the cdf is
 * accumulated from its left end.
 */
template<class Ratio>
std::int64_t draw_from_mode(CounterRng& rng, std::int64_t lo, std::int64_t hi,
                            std::int64_t mode, Ratio ratio)
{
    if (lo == hi) return lo;

    double total = 1.0;
    std::int64_t left = mode;
    double left_weight = 1.0;
    for (double w = 1.0; left > lo;) {
        w /= ratio(left - 1);
        if (w < kNegligible) break;
        --left;
        left_weight = w;
        total += w;
    }
    std::int64_t right = mode;
    for (double w = 1.0; right < hi;) {
        w *= ratio(right);
        if (w < kNegligible) break;
        ++right;
        total += w;
    }

    double const target = rng.uniform() * total;
    double cumulative = left_weight;
    double w = left_weight;
    std::int64_t t = left;
    while (cumulative <= target && t < right) {
        w *= ratio(t);
        ++t;
        cumulative += w;
    }
    return t;
}

void check_population(std::span<std::int64_t const> N)
{
    for (auto Nj : N) {
        if (Nj < 0) {
            raise(ErrorCode::InvalidArgument, "negative population count");
        }
    }
}

}  // namespace

std::int64_t draw_poisson(CounterRng& rng, double mean)
{
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        raise(ErrorCode::NonPositiveMean, "Poisson mean must be positive, got " + std::to_string(mean));
    }
    auto const mode = static_cast<std::int64_t>(std::floor(mean));
    // Upper end only bounds the loop; the weights vanish long before.
    auto const hi = std::numeric_limits<std::int64_t>::max() / 2;
    return draw_from_mode(rng, 0, hi, mode,
                          [mean](std::int64_t t) { return mean / static_cast<double>(t + 1); });
}

std::int64_t draw_binomial(CounterRng& rng, std::int64_t trials, double p)
{
    if (trials < 0 || !(p >= 0.0 && p <= 1.0)) {
        raise(ErrorCode::InvalidParameter, "invalid binomial parameters");
    }
    if (trials == 0 || p == 0.0) return 0;
    if (p == 1.0) return trials;
    double const odds = p / (1.0 - p);
    auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(trials + 1) * p));
    mode = std::clamp<std::int64_t>(mode, 0, trials);
    return draw_from_mode(rng, 0, trials, mode, [trials, odds](std::int64_t t) {
        return static_cast<double>(trials - t) / static_cast<double>(t + 1) * odds;
    });
}

std::int64_t draw_hypergeometric(CounterRng& rng, std::int64_t marked, std::int64_t population,
                                 std::int64_t draws)
{
    if (marked < 0 || population < marked || draws < 0 || draws > population) {
        raise(ErrorCode::InvalidParameter, "invalid hypergeometric parameters");
    }
    std::int64_t const unmarked = population - marked;
    std::int64_t const lo = std::max<std::int64_t>(0, draws - unmarked);
    std::int64_t const hi = std::min(draws, marked);
    if (lo == hi) return lo;
    auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(draws + 1)
                                                     * static_cast<double>(marked + 1)
                                                     / static_cast<double>(population + 2)));
    mode = std::clamp(mode, lo, hi);
    return draw_from_mode(rng, lo, hi, mode, [=](std::int64_t t) {
        return static_cast<double>(marked - t) * static_cast<double>(draws - t)
               / (static_cast<double>(t + 1) * static_cast<double>(unmarked - draws + t + 1));
    });
}

Counts draw_true_counts(CaseTable const& table, MeanStructure const& ms, CounterRng& rng)
{
    Eigen::VectorXd const mu = mean_vector(table, ms);
    Counts N(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
        N[static_cast<std::size_t>(j)] = draw_poisson(rng, mu[j]);
    }
    return N;
}

Counts draw_true_counts(CaseTable const& table, MeanStructure const& ms, RngSpec spec)
{
    CounterRng rng(spec);
    return draw_true_counts(table, ms, rng);
}

CountSample sample_wr(std::span<std::int64_t const> N, std::int64_t n_star, CounterRng& rng)
{
    check_population(N);
    auto const N_star = total(N);
    if (N_star < 1) {
        raise(ErrorCode::EmptyPopulation, "cannot sample from an empty population");
    }
    SamplingScheme const scheme(SchemeKind::WithReplacement, n_star, N_star);
    Counts n(N.size(), 0);
    std::int64_t remaining_draws = n_star;
    std::int64_t remaining_population = N_star;
    for (std::size_t j = 0; j < N.size() && remaining_draws > 0; ++j) {
        if (N[j] == 0) continue;
        if (N[j] == remaining_population) {
            n[j] = remaining_draws;
        } else {
            double const p = static_cast<double>(N[j]) / static_cast<double>(remaining_population);
            n[j] = draw_binomial(rng, remaining_draws, p);
        }
        remaining_draws -= n[j];
        remaining_population -= N[j];
    }
    return CountSample(std::move(n), scheme);
}

CountSample sample_wr(std::span<std::int64_t const> N, std::int64_t n_star, RngSpec spec)
{
    CounterRng rng(spec);
    return sample_wr(N, n_star, rng);
}

CountSample sample_wor(std::span<std::int64_t const> N, std::int64_t n_star, CounterRng& rng)
{
    check_population(N);
    auto const N_star = total(N);
    if (n_star > N_star) {
        raise(ErrorCode::SampleExceedsPopulation,
              "n_* = " + std::to_string(n_star) + " exceeds N_* = " + std::to_string(N_star));
    }
    SamplingScheme const scheme(SchemeKind::WithoutReplacement, n_star, N_star);
    Counts n(N.size(), 0);
    std::int64_t remaining_draws = n_star;
    std::int64_t remaining_population = N_star;
    for (std::size_t j = 0; j < N.size() && remaining_draws > 0; ++j) {
        n[j] = draw_hypergeometric(rng, N[j], remaining_population, remaining_draws);
        remaining_draws -= n[j];
        remaining_population -= N[j];
    }
    return CountSample(std::move(n), scheme);
}

CountSample sample_wor(std::span<std::int64_t const> N, std::int64_t n_star, RngSpec spec)
{
    CounterRng rng(spec);
    return sample_wor(N, n_star, rng);
}

}  // namespace thincount
