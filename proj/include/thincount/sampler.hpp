#pragma once

#include <cstdint>
#include <span>

#include "thincount/model.hpp"
#include "thincount/rng.hpp"

namespace thincount {

// Univariate variates. All three use inverse-cdf search over the pmf built
// from its successive-term ratio, anchored at the mode, so they are exact up
// to a relative tail mass below 1e-20 and use no transcendental functions.
std::int64_t draw_poisson(CounterRng& rng, double mean);
std::int64_t draw_binomial(CounterRng& rng, std::int64_t trials, double p);
//! Number of marked items when `draws` are taken without replacement from
//! `population` items of which `marked` are marked.
std::int64_t draw_hypergeometric(CounterRng& rng, std::int64_t marked, std::int64_t population,
                                 std::int64_t draws);

/// Independent N_j ~ Poisson(mu_j). Raises NonPositiveMean via mean_vector.
Counts draw_true_counts(CaseTable const& table, MeanStructure const& ms, RngSpec spec);
Counts draw_true_counts(CaseTable const& table, MeanStructure const& ms, CounterRng& rng);

/// Multinomial(n_star, N/N_*) via a chain of conditional binomials.
CountSample sample_wr(std::span<std::int64_t const> N, std::int64_t n_star, RngSpec spec);
CountSample sample_wr(std::span<std::int64_t const> N, std::int64_t n_star, CounterRng& rng);

/// Multivariate hypergeometric via a chain of conditional hypergeometrics.
CountSample sample_wor(std::span<std::int64_t const> N, std::int64_t n_star, RngSpec spec);
CountSample sample_wor(std::span<std::int64_t const> N, std::int64_t n_star, CounterRng& rng);

}  // namespace thincount
