#include "thincount/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "thincount/asymptotics.hpp"
#include "thincount/error.hpp"
#include "thincount/experiments.hpp"
#include "thincount/inference.hpp"
#include "thincount/pmf.hpp"
#include "thincount/rng.hpp"
#include "thincount/touchard.hpp"

namespace thincount {
namespace {

std::string sci(double v)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3g", v);
    return buffer;
}

//! Calls visit(n) for every n with sum n_* and 0 <= n_j <= bound[j].
void for_each_composition(std::int64_t n_star, std::vector<std::int64_t> const& bound,
                          std::function<void(std::vector<std::int64_t> const&)> const& visit)
{
    std::vector<std::int64_t> n(bound.size(), 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t j, std::int64_t left) {
        if (j + 1 == n.size()) {
            if (left <= bound[j]) {
                n[j] = left;
                visit(n);
            }
            return;
        }
        for (std::int64_t v = 0; v <= std::min(left, bound[j]); ++v) {
            n[j] = v;
            rec(j + 1, left - v);
        }
    };
    rec(0, n_star);
}

//! Calls visit(N) for every N in {lo..hi}^J.
void for_each_population(std::size_t J, std::int64_t lo, std::int64_t hi,
                         std::function<void(std::vector<std::int64_t> const&)> const& visit)
{
    std::vector<std::int64_t> N(J, lo);
    while (true) {
        visit(N);
        std::size_t j = 0;
        while (j < J && N[j] == hi) N[j++] = lo;
        if (j == J) return;
        ++N[j];
    }
}

// Sum of positive log-space terms f(r) for r = start, start+1, ... until
// the terms have peaked and fallen below 1e-18 of the running sum.
double sum_terms(std::int64_t start, std::function<double(std::int64_t)> const& log_term)
{
    double sum = 0.0;
    double previous = -1.0;
    for (std::int64_t r = start; r < start + 100000; ++r) {
        double const term = std::exp(log_term(r));
        sum += term;
        if (term < previous && term < 1e-18 * sum) break;
        previous = term;
    }
    return sum;
}

CheckResult conditional_identities()
{
    double const gammas[] = {0.2, 0.5, 0.8};
    double worst_wr = 0.0, worst_wor = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t J = 1; J <= 4; ++J) {
        for_each_population(J, 1, 6, [&](std::vector<std::int64_t> const& N) {
            auto const N_star = total(N);
            auto const p = population_fractions(N);
            for (std::int64_t n_star = 1; n_star <= N_star; ++n_star) {
                std::vector<std::int64_t> const unbounded(J, n_star);
                for_each_composition(n_star, unbounded, [&](std::vector<std::int64_t> const& n) {
                    double const exact = log_multinomial_pmf(n, n_star, p).prob();
                    for (double g : gammas) {
                        double log_product = 0.0;
                        for (std::size_t j = 0; j < J; ++j) {
                            log_product += log_poisson_pmf(n[j], g * static_cast<double>(N[j])).value;
                        }
                        double const conditioned = std::exp(
                            log_product - log_poisson_pmf(n_star, g * static_cast<double>(N_star)).value);
                        worst_wr = std::max(worst_wr, std::abs(conditioned - exact));
                        ++evaluated;
                    }
                });
                for_each_composition(n_star, N, [&](std::vector<std::int64_t> const& n) {
                    double const exact = log_mvhypergeom_pmf(n, N, n_star).prob();
                    for (double g : gammas) {
                        double log_product = 0.0;
                        for (std::size_t j = 0; j < J; ++j) {
                            log_product += log_binomial_pmf(n[j], N[j], g).value;
                        }
                        double const conditioned
                            = std::exp(log_product - log_binomial_pmf(n_star, N_star, g).value);
                        worst_wor = std::max(worst_wor, std::abs(conditioned - exact));
                        ++evaluated;
                    }
                });
            }
        });
    }
    bool const ok = worst_wr < 1e-12 && worst_wor < 1e-12;
    return {"conditional-identities", ok,
            "max abs error WR " + sci(worst_wr) + ", WOR " + sci(worst_wor) + " over "
                + std::to_string(evaluated) + " evaluations (tol 1e-12)"};
}

CheckResult thinning_identity()
{
    double worst = 0.0;
    for (double mu : {0.5, 2.0, 8.0}) {
        for (double g : {0.1, 0.5, 0.9}) {
            for (std::int64_t t = 0; t <= 30; ++t) {
                double const mixture = sum_terms(t, [&](std::int64_t r) {
                    return log_binomial_pmf(t, r, g).value + log_poisson_pmf(r, mu).value;
                });
                double const closed = wor_marginal_pmf(t, mu, g).prob();
                worst = std::max(worst, std::abs(closed - mixture) / mixture);
            }
        }
    }
    return {"thinning-identity", worst < 1e-10, "max rel error " + sci(worst) + " (tol 1e-10)"};
}

CheckResult marginal_convergence()
{
    RegimeSweep sweep;
    sweep.J_values = {5, 50, 500};
    sweep.generator = CountGenerator::constant(10);
    sweep.gamma_target = 0.3;
    std::vector<double> wr, wor;
    for (auto J : sweep.J_values) {
        auto const inst = sweep.instance(J);
        wr.push_back(tv_marginal_wr(inst.N, inst.n_star, 0).tv_distance);
        wor.push_back(tv_marginal_wor(inst.N, inst.n_star, 0).tv_distance);
    }
    bool const ok = wr[1] < wr[0] && wr[2] < wr[1] && wor[1] < wor[0] && wor[2] < wor[1]
                    && wor[2] < 0.01;
    return {"marginal-convergence", ok,
            "TV WR " + sci(wr[0]) + " > " + sci(wr[1]) + " > " + sci(wr[2]) + "; TV WOR " + sci(wor[0])
                + " > " + sci(wor[1]) + " > " + sci(wor[2]) + " (< 0.01)"};
}

CheckResult stirling_normalization()
{
    std::vector<std::int64_t> const n100{100}, n10k{10000}, N20k{20000};
    double const e100 = std::abs(stirling_constant_check(n100, 100, SchemeKind::WithReplacement).ratio() - 1);
    double const e10k
        = std::abs(stirling_constant_check(n10k, 10000, SchemeKind::WithReplacement).ratio() - 1);
    double const ewor
        = std::abs(stirling_constant_check(N20k, 10000, SchemeKind::WithoutReplacement).ratio() - 1);
    bool const ok = e100 < 1e-2 && e10k < 1e-4 && ewor < 1e-3;
    return {"stirling-normalization", ok,
            "|ratio-1| WR n=100 " + sci(e100) + ", WR n=1e4 " + sci(e10k) + ", WOR N=2e4 " + sci(ewor)};
}

CheckResult touchard_correctness()
{
    auto const basis = build_basis(20);
    double worst = 0.0;
    for (int t = 0; t <= 10; ++t) {
        for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            double const oracle = series_oracle_f(x, t, 1e-17);
            double const value = std::exp(eval_f(x, t, basis));
            worst = std::max(worst, std::abs(value - oracle) / oracle);
        }
    }
    using Integer = TouchardBasis::Integer;
    std::vector<std::vector<Integer>> stirling(21);
    stirling[0] = {Integer(1)};
    bool table_ok = true;
    for (std::size_t t = 1; t <= 20; ++t) {
        stirling[t].assign(t + 1, Integer(0));
        for (std::size_t k = 1; k <= t; ++k) {
            Integer const carry = k < t ? Integer(k) * stirling[t - 1][k] : Integer(0);
            stirling[t][k] = carry + stirling[t - 1][k - 1];
        }
        for (std::size_t k = 0; k <= t; ++k) {
            table_ok = table_ok && basis.coefficient(static_cast<int>(t), static_cast<int>(k)) == stirling[t][k];
        }
    }
    return {"touchard", worst < 1e-8 && table_ok,
            "max rel error vs series " + sci(worst) + " (tol 1e-8); Stirling table "
                + (table_ok ? "matches" : "differs") + " for t <= 20"};
}

CheckResult wr_marginal()
{
    auto const basis = build_basis();
    double worst = 0.0, worst_norm = 0.0;
    for (double mu : {0.5, 1.0, 2.0, 5.0}) {
        for (double g : {0.1, 0.5, 0.9}) {
            double norm = 0.0;
            for (std::int64_t t = 0; t <= basis.t_max(); ++t) {
                double const p = wr_marginal_pmf(t, mu, g, basis).prob();
                norm += p;
                if (t > 30) continue;
                // r = 0 contributes only to t = 0, where Poisson(0) is a point mass.
                double mixture = t == 0 ? std::exp(-mu) : 0.0;
                mixture += sum_terms(1, [&](std::int64_t r) {
                    return log_poisson_pmf(t, g * static_cast<double>(r)).value + log_poisson_pmf(r, mu).value;
                });
                worst = std::max(worst, std::abs(p - mixture) / mixture);
            }
            worst_norm = std::max(worst_norm, std::abs(norm - 1.0));
        }
    }
    return {"wr-marginal", worst < 1e-8 && worst_norm < 1e-6,
            "max rel error vs mixture " + sci(worst) + " (tol 1e-8); normalization error "
                + sci(worst_norm) + " (tol 1e-6)"};
}

CheckResult bias_removal()
{
    ExperimentSpec spec;
    spec.name = "bias-removal";
    spec.kind = ExperimentKind::BiasStudy;
    spec.parameters = {{"J", 5000}, {"gamma", 0.25}, {"beta", {4.0}}, {"link", "identity"},
                       {"reps", 200},  {"seed", 7},       {"scheme", "wor"}};
    auto const report = run(spec);
    double const adjusted = report.summary["estimators"]["adjusted"]["mean_beta"][0].get<double>();
    double const naive = report.summary["estimators"]["naive"]["mean_beta"][0].get<double>();
    double const dev_adj = std::abs(adjusted / 4.0 - 1.0);
    double const dev_naive = std::abs(naive / 1.0 - 1.0);
    return {"bias-removal", dev_adj < 0.01 && dev_naive < 0.01,
            "mean adjusted " + sci(adjusted) + " (rel dev " + sci(dev_adj) + "), mean naive "
                + sci(naive) + " (rel dev from 1 " + sci(dev_naive) + ")"};
}

CheckResult gradient_checks()
{
    auto const basis = std::make_shared<TouchardBasis const>(build_basis());
    CounterRng rng(RngSpec{99, 0});
    std::size_t const J = 40;
    FeatureMatrix X(J, 3);
    std::vector<std::int64_t> counts(J);
    for (std::size_t j = 0; j < J; ++j) {
        X(static_cast<Eigen::Index>(j), 0) = 1.0;
        X(static_cast<Eigen::Index>(j), 1) = rng.uniform();
        X(static_cast<Eigen::Index>(j), 2) = rng.uniform();
        counts[j] = static_cast<std::int64_t>(rng.uniform() * 8.0);
    }
    CaseTable const table(X);
    Likelihood const kinds[] = {Likelihood::naive(), Likelihood::wor_adjusted(0.4),
                                Likelihood::wr_touchard(0.4, basis)};
    double worst = 0.0;
    for (int point = 0; point < 20; ++point) {
        for (Link link : {Link::Identity, Link::Log}) {
            Eigen::VectorXd beta(3);
            for (Eigen::Index i = 0; i < 3; ++i) {
                beta[i] = link == Link::Identity ? 0.5 + 3.0 * rng.uniform() : rng.uniform() * 2.0 - 0.5;
            }
            for (auto const& lk : kinds) {
                MeanStructure ms{beta, link};
                Eigen::VectorXd const analytic = grad_loglik(table, counts, ms, lk);
                Eigen::VectorXd numeric(3);
                for (Eigen::Index i = 0; i < 3; ++i) {
                    double const h = 1e-6 * std::max(std::abs(beta[i]), 1.0);
                    MeanStructure up = ms, down = ms;
                    up.beta[i] += h;
                    down.beta[i] -= h;
                    numeric[i] = (loglik(table, counts, up, lk) - loglik(table, counts, down, lk)) / (2 * h);
                }
                worst = std::max(worst, (analytic - numeric).lpNorm<Eigen::Infinity>()
                                            / analytic.lpNorm<Eigen::Infinity>());
            }
        }
    }
    return {"gradient-checks", worst < 1e-5, "max rel error " + sci(worst) + " (tol 1e-5)"};
}

CheckResult lemma()
{
    std::int64_t const Ms[] = {100, 1000, 10000, 100000};
    bool ok = true;
    std::string detail;
    for (double x : {0.5, 1.0, 2.0}) {
        double previous = INFINITY;
        bool decreasing = true;
        double at_10k = 0.0;
        for (auto M : Ms) {
            double const m = static_cast<double>(M);
            double const rel = std::abs(lemma_sum_check(x, 1, M, 1.0 / m, 1.0 / std::sqrt(m)) / std::exp(x) - 1);
            decreasing = decreasing && rel < previous;
            previous = rel;
            if (M == 10000) at_10k = rel;
        }
        ok = ok && decreasing && at_10k < 0.02;
        detail += "x=" + sci(x) + ": rel error at M=1e4 " + sci(at_10k) + (decreasing ? ", decreasing; " : ", NOT decreasing; ");
    }
    detail += "tol 2e-2";
    return {"lemma", ok, detail};
}

CheckResult joint_moments()
{
    std::size_t const J = 500;
    CaseTable const table(FeatureMatrix::Ones(J, 1));
    MeanStructure const ms{Eigen::VectorXd::Constant(1, 2.0), Link::Identity};
    auto const r = joint_limit_moments_check(table, ms, 0.3, 0, 20000, RngSpec{11, 0});
    bool const ok = std::abs(r.mean_observed.z_score()) < 3.0 && std::abs(r.var_observed.z_score()) < 3.0
                    && std::abs(r.corr_with_rest.z_score()) < 3.0;
    return {"joint-moments", ok,
            "mean(n_k) " + sci(r.mean_observed.estimate) + " (z " + sci(r.mean_observed.z_score())
                + "), var(n_k) " + sci(r.var_observed.estimate) + " (z " + sci(r.var_observed.z_score())
                + "), corr " + sci(r.corr_with_rest.estimate) + " (z " + sci(r.corr_with_rest.z_score()) + ")"};
}

using SuiteFn = CheckResult (*)();

struct SuiteEntry
{
    std::string_view name;
    SuiteFn fn;
};

constexpr SuiteEntry kSuites[] = {
    {"conditional-identities", conditional_identities},
    {"thinning-identity", thinning_identity},
    {"marginal-convergence", marginal_convergence},
    {"stirling-normalization", stirling_normalization},
    {"touchard", touchard_correctness},
    {"wr-marginal", wr_marginal},
    {"bias-removal", bias_removal},
    {"gradient-checks", gradient_checks},
    {"lemma", lemma},
    {"joint-moments", joint_moments},
};

}  // namespace

bool SuiteResult::passed() const noexcept
{
    for (auto const& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

std::vector<std::string_view> suite_names()
{
    std::vector<std::string_view> names;
    for (auto const& s : kSuites) names.push_back(s.name);
    return names;
}

SuiteResult run_suite(std::string_view name)
{
    for (auto const& s : kSuites) {
        if (s.name != name) continue;
        auto const start = std::chrono::steady_clock::now();
        SuiteResult result;
        result.suite = std::string(name);
        result.checks.push_back(s.fn());
        result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }
    raise(ErrorCode::InvalidArgument, "unknown verify suite '" + std::string(name) + "'");
}

std::string format(SuiteResult const& result)
{
    std::ostringstream out;
    for (auto const& c : result.checks) {
        out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
    }
    char footer[96];
    std::snprintf(footer, sizeof footer, "%.2f", result.seconds);
    out << "suite " << result.suite << (result.passed() ? " passed" : " FAILED") << " in " << footer
        << " s\n";
    return out.str();
}

}  // namespace thincount
