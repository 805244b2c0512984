#include "thincount/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "thincount/error.hpp"
#include "thincount/parallel.hpp"
#include "thincount/sampler.hpp"

namespace thincount {
namespace {

constexpr double kTailMass = 1e-12;
// Pmf values below this are treated as the end of the useful support.
constexpr double kPmfFloor = 1e-40;

void check_case_index(std::span<std::int64_t const> N, std::size_t j)
{
    if (j >= N.size()) {
        raise(ErrorCode::InvalidArgument,
              "case index " + std::to_string(j) + " out of range for J = " + std::to_string(N.size()));
    }
    for (auto Nj : N) {
        if (Nj < 0) raise(ErrorCode::InvalidArgument, "negative population count");
    }
}

struct Moments
{
    double mean = 0.0;
    double m2 = 0.0;  // central moments
    double m3 = 0.0;
    double m4 = 0.0;
};

Moments central_moments(std::span<double const> xs)
{
    Moments m;
    auto const n = static_cast<double>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= n;
    for (double x : xs) {
        double const d = x - m.mean;
        double const d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

}  // namespace

CountGenerator::CountGenerator(std::vector<std::int64_t> values) : values_(std::move(values))
{
    if (values_.empty()) {
        raise(ErrorCode::InvalidArgument, "count generator needs at least one value");
    }
    for (auto v : values_) {
        if (v < 0) raise(ErrorCode::InvalidArgument, "count generator values must be non-negative");
        bound_ = std::max(bound_, v);
    }
}

CountGenerator CountGenerator::constant(std::int64_t value)
{
    return CountGenerator({value});
}

CountGenerator CountGenerator::cycle(std::int64_t lo, std::int64_t hi)
{
    if (lo > hi) raise(ErrorCode::InvalidArgument, "cycle range is empty");
    std::vector<std::int64_t> v;
    for (auto x = lo; x <= hi; ++x) v.push_back(x);
    return CountGenerator(std::move(v));
}

Counts CountGenerator::generate(std::size_t J) const
{
    Counts N(J);
    for (std::size_t j = 0; j < J; ++j) N[j] = values_[j % values_.size()];
    return N;
}

void RegimeSweep::validate() const
{
    if (J_values.empty()) raise(ErrorCode::SpecValidation, "sweep needs at least one J");
    for (std::size_t i = 0; i < J_values.size(); ++i) {
        if (J_values[i] < 1) raise(ErrorCode::SpecValidation, "J must be positive");
        if (i > 0 && J_values[i] <= J_values[i - 1]) {
            raise(ErrorCode::SpecValidation, "J values must be strictly increasing");
        }
    }
    if (!(gamma_target > 0.0 && gamma_target <= 1.0)) {
        raise(ErrorCode::SpecValidation, "gamma must lie in (0, 1]");
    }
}

RegimeSweep::Instance RegimeSweep::instance(std::size_t J) const
{
    Instance inst;
    inst.N = generator.generate(J);
    inst.N_star = total(inst.N);
    inst.n_star = std::llround(gamma_target * static_cast<double>(inst.N_star));
    return inst;
}

LogProb wr_marginal_limit_pmf(std::int64_t t, std::int64_t N_j, double gamma)
{
    return log_poisson_pmf(t, gamma * static_cast<double>(N_j));
}

LogProb wor_marginal_limit_pmf(std::int64_t t, std::int64_t N_j, double gamma)
{
    if (t < 0 || t > N_j) {
        raise(ErrorCode::SupportViolation,
              "t = " + std::to_string(t) + " outside [0, " + std::to_string(N_j) + "]");
    }
    return log_binomial_pmf(t, N_j, gamma);
}

TvReport tv_marginal_wr(std::span<std::int64_t const> N, std::int64_t n_star, std::size_t j)
{
    check_case_index(N, j);
    auto const N_star = total(N);
    if (N_star < 1) raise(ErrorCode::EmptyPopulation, "population is empty");
    if (n_star < 0) raise(ErrorCode::InvalidArgument, "n_* must be non-negative");

    TvReport report;
    report.J = N.size();
    if (N[j] == 0 || n_star == 0) {
        return report;  // both laws are a point mass at zero
    }
    double const p = static_cast<double>(N[j]) / static_cast<double>(N_star);
    double const lambda = static_cast<double>(n_star) * p;

    std::vector<double> exact, limit;
    for (std::int64_t t = 0;; ++t) {
        double const b = t <= n_star ? log_binomial_pmf(t, n_star, p).prob() : 0.0;
        double const q = log_poisson_pmf(t, lambda).prob();
        exact.push_back(b);
        limit.push_back(q);
        if (static_cast<double>(t) > lambda && b < kPmfFloor && q < kPmfFloor) break;
    }
    // Upper tails beyond each t, accumulated from the far end.
    std::size_t const size = exact.size();
    std::vector<double> tail_exact(size, 0.0), tail_limit(size, 0.0);
    for (std::size_t t = size - 1; t-- > 0;) {
        tail_exact[t] = tail_exact[t + 1] + exact[t + 1];
        tail_limit[t] = tail_limit[t + 1] + limit[t + 1];
    }
    std::size_t t_max = 0;
    while (t_max + 1 < size && !(tail_exact[t_max] < kTailMass && tail_limit[t_max] < kTailMass)) {
        ++t_max;
    }
    double tv = 0.0;
    for (std::size_t t = 0; t <= t_max; ++t) tv += std::abs(exact[t] - limit[t]);
    report.tv_distance = 0.5 * tv;
    report.support_truncation_mass = tail_exact[t_max] + tail_limit[t_max];
    report.t_max = static_cast<std::int64_t>(t_max);
    return report;
}

TvReport tv_marginal_wor(std::span<std::int64_t const> N, std::int64_t n_star, std::size_t j)
{
    check_case_index(N, j);
    auto const N_star = total(N);
    if (N_star < 1) raise(ErrorCode::EmptyPopulation, "population is empty");
    if (n_star < 0 || n_star > N_star) {
        raise(ErrorCode::SampleExceedsPopulation, "n_* must lie in [0, N_*]");
    }
    auto const N_j = N[j];
    double const gamma = static_cast<double>(n_star) / static_cast<double>(N_star);
    auto const lo = std::max<std::int64_t>(0, n_star - (N_star - N_j));
    auto const hi = std::min(n_star, N_j);

    double tv = 0.0;
    for (std::int64_t t = 0; t <= N_j; ++t) {
        double const h = (t >= lo && t <= hi) ? hypergeom_marginal_pmf(t, N_j, N_star, n_star).prob()
                                              : 0.0;
        double const b = log_binomial_pmf(t, N_j, gamma).prob();
        tv += std::abs(h - b);
    }
    TvReport report;
    report.J = N.size();
    report.tv_distance = 0.5 * tv;
    report.t_max = N_j;
    return report;
}

StirlingCheck stirling_constant_check(std::span<std::int64_t const> N, std::int64_t n_star,
                                      SchemeKind kind)
{
    auto const N_star = total(N);
    SamplingScheme const scheme(kind, n_star, N_star);
    double const gamma = scheme.gamma();
    double const n = static_cast<double>(n_star);
    if (kind == SchemeKind::WithReplacement) {
        double lambda_sum = 0.0;
        for (auto Nj : N) lambda_sum += gamma * static_cast<double>(Nj);
        return {std::sqrt(2.0 * std::numbers::pi * n),
                std::exp(-log_poisson_pmf(n_star, lambda_sum).value)};
    }
    return {std::sqrt(2.0 * std::numbers::pi * (1.0 - gamma) * n),
            std::exp(-log_binomial_pmf(n_star, N_star, gamma).value)};
}

double lemma_sum_check(double x, int k, std::int64_t M, double eps, double delta)
{
    if (!(eps > 0.0)) raise(ErrorCode::InvalidParameter, "eps must be positive");
    if (M < 1) raise(ErrorCode::InvalidParameter, "M must be at least 1");
    if (k < 1) raise(ErrorCode::InvalidParameter, "k must be at least 1");
    if (!(x >= 0.0) || !std::isfinite(x)) raise(ErrorCode::InvalidParameter, "x must be non-negative");

    auto exponent = [&](std::int64_t i) {
        double const s = static_cast<double>(i + k);
        return -eps * s * s + delta * s;
    };
    if (x == 0.0) return std::exp(exponent(0));

    double const log_x = std::log(x);
    double log_sum = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i <= M; ++i) {
        log_sum = log_add(log_sum, exponent(i) + static_cast<double>(i) * log_x - log_factorial(i));
    }
    return std::exp(log_sum);
}

double MomentEstimate::z_score() const noexcept
{
    return (estimate - target) / standard_error;
}

JointMomentsReport joint_limit_moments_check(CaseTable const& table, MeanStructure const& ms,
                                             double gamma, std::size_t k, std::size_t reps,
                                             RngSpec spec)
{
    if (!(gamma > 0.0 && gamma <= 1.0)) raise(ErrorCode::InvalidParameter, "gamma must lie in (0, 1]");
    if (k >= table.num_cases()) raise(ErrorCode::InvalidArgument, "case index out of range");
    if (reps < 2) raise(ErrorCode::InvalidArgument, "need at least two replications");

    Eigen::VectorXd const mu = mean_vector(table, ms);
    std::vector<double> observed(reps), population(reps), rest(reps);
    parallel_for(reps, [&](std::size_t r) {
        CounterRng count_rng(substream(spec, r, 0));
        CounterRng sample_rng(substream(spec, r, 1));
        Counts N(table.num_cases());
        for (std::size_t j = 0; j < N.size(); ++j) {
            N[j] = draw_poisson(count_rng, mu[static_cast<Eigen::Index>(j)]);
        }
        auto const N_star = total(N);
        auto const n_star = std::llround(gamma * static_cast<double>(N_star));
        std::int64_t n_k = 0;
        if (n_star > 0) {
            n_k = sample_wor(N, n_star, sample_rng).counts()[k];
        }
        observed[r] = static_cast<double>(n_k);
        population[r] = static_cast<double>(N_star);
        rest[r] = static_cast<double>(N_star - N[k]);
    });

    double const R = static_cast<double>(reps);
    double const mu_k = mu[static_cast<Eigen::Index>(k)];
    double const mu_sum = mu.sum();

    JointMomentsReport report;
    report.replications = reps;
    report.case_index = k;

    auto mean_and_var = [R](std::span<double const> xs, double target, MomentEstimate& mean,
                            MomentEstimate& var) {
        Moments const m = central_moments(xs);
        double const s2 = m.m2 * R / (R - 1.0);
        mean = {m.mean, std::sqrt(s2 / R), target};
        var = {s2, std::sqrt(std::max(m.m4 - m.m2 * m.m2, 0.0) / R), target};
        return m;
    };
    Moments const mo = mean_and_var(observed, gamma * mu_k, report.mean_observed, report.var_observed);
    mean_and_var(population, mu_sum, report.mean_population, report.var_population);

    // Delta method for var/mean, including the mean-variance covariance m3/R.
    {
        double const m = mo.mean;
        double const v = report.var_observed.estimate;
        double const var_m = mo.m2 / R;
        double const var_v = std::max(mo.m4 - mo.m2 * mo.m2, 0.0) / R;
        double const cov = mo.m3 / R;
        double const d = var_v / (m * m) + v * v * var_m / (m * m * m * m) - 2.0 * v * cov / (m * m * m);
        report.dispersion = {v / m, std::sqrt(std::max(d, 0.0)), 1.0};
    }
    {
        Moments const mr = central_moments(rest);
        double cov = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            cov += (observed[r] - mo.mean) * (rest[r] - mr.mean);
        }
        cov /= R;
        double const corr = cov / std::sqrt(mo.m2 * mr.m2);
        report.corr_with_rest = {corr, (1.0 - corr * corr) / std::sqrt(R - 1.0), 0.0};
    }
    return report;
}

}  // namespace thincount
