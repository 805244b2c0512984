#include <cmath>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "thincount/error.hpp"
#include "thincount/inference.hpp"
#include "thincount/rng.hpp"
#include "thincount/sampler.hpp"

using namespace thincount;

namespace {

ErrorCode code_of(auto&& f)
{
    try {
        f();
    } catch (Error const& e) {
        return e.code();
    }
    ADD_FAILURE() << "no thincount::Error thrown";
    return ErrorCode::InvalidArgument;
}

CaseTable intercept_only(std::size_t J)
{
    return CaseTable(FeatureMatrix::Ones(static_cast<Eigen::Index>(J), 1));
}

// Intercept plus one covariate in [0, 1].
CaseTable two_column(std::size_t J, std::uint64_t seed)
{
    FeatureMatrix X(static_cast<Eigen::Index>(J), 2);
    CounterRng rng({seed, 0xC0});
    for (std::size_t j = 0; j < J; ++j) {
        X(static_cast<Eigen::Index>(j), 0) = 1;
        X(static_cast<Eigen::Index>(j), 1) = rng.uniform();
    }
    return CaseTable(std::move(X));
}

std::shared_ptr<TouchardBasis const> basis64()
{
    static auto b = std::make_shared<TouchardBasis const>(build_basis());
    return b;
}

}  // namespace

TEST(Loglik, WorAdjustedZeros)
{
    auto table = intercept_only(3);
    Counts zeros{0, 0, 0};
    for (double beta : {0.5, 2.0, 7.0}) {
        MeanStructure ms{Eigen::VectorXd::Constant(1, beta), Link::Identity};
        EXPECT_NEAR(loglik(table, zeros, ms, Likelihood::wor_adjusted(0.5)), -3 * 0.5 * beta, 1e-14);
    }
}

TEST(Loglik, WorAdjustedIsNaiveAtScaledMean)
{
    auto table = two_column(40, 3);
    Counts n(40);
    for (std::size_t j = 0; j < n.size(); ++j) n[j] = static_cast<std::int64_t>(j % 7);
    Eigen::VectorXd beta(2);
    beta << 2.0, 1.5;
    double const g = 0.35;
    MeanStructure ms{beta, Link::Identity};
    MeanStructure scaled{g * beta, Link::Identity};
    EXPECT_NEAR(loglik(table, n, ms, Likelihood::wor_adjusted(g)), loglik(table, n, scaled, Likelihood::naive()),
                1e-10);
}

TEST(Loglik, WrTouchardAtZeroCounts)
{
    auto table = two_column(10, 4);
    Counts zeros(10, 0);
    Eigen::VectorXd beta(2);
    beta << 1.0, 2.0;
    MeanStructure ms{beta, Link::Identity};
    double const g = 0.4;
    auto mu = mean_vector(table, ms);
    double expected = 0;
    for (auto m : mu) expected += -m + std::exp(-g) * m;
    auto lk = Likelihood::wr_touchard(g, basis64());
    EXPECT_NEAR(loglik(table, zeros, ms, lk), expected, 1e-12);

    Eigen::VectorXd expected_grad = Eigen::VectorXd::Zero(2);
    for (Eigen::Index j = 0; j < 10; ++j) expected_grad += (-1 + std::exp(-g)) * table.features().row(j).transpose();
    EXPECT_LT((grad_loglik(table, zeros, ms, lk) - expected_grad).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Loglik, WrTouchardMatchesMixtureOracle)
{
    auto table = two_column(12, 5);
    Counts n{0, 1, 2, 3, 0, 5, 1, 1, 4, 2, 0, 7};
    Eigen::VectorXd beta(2);
    beta << 0.8, 2.1;
    MeanStructure ms{beta, Link::Identity};
    double const g = 0.6;
    auto mu = mean_vector(table, ms);
    long double expected = 0;
    for (std::size_t j = 0; j < n.size(); ++j) expected += std::log(oracle::wr_mixture(n[j], mu[static_cast<Eigen::Index>(j)], g));
    EXPECT_NEAR(loglik(table, n, ms, Likelihood::wr_touchard(g, basis64())), static_cast<double>(expected), 1e-9);
}

TEST(Loglik, Errors)
{
    auto table = intercept_only(3);
    Counts n{1, 2};
    MeanStructure ms{Eigen::VectorXd::Constant(1, 1.0), Link::Identity};
    EXPECT_EQ(code_of([&] { loglik(table, n, ms, Likelihood::naive()); }), ErrorCode::DimensionMismatch);
    Counts neg{1, -1, 0};
    EXPECT_EQ(code_of([&] { loglik(table, neg, ms, Likelihood::naive()); }), ErrorCode::InvalidArgument);
    Counts big{1, 80, 0};
    EXPECT_EQ(code_of([&] { loglik(table, big, ms, Likelihood::wr_touchard(0.5, basis64())); }),
              ErrorCode::DegreeExceeded);
    EXPECT_EQ(code_of([] { Likelihood::wor_adjusted(0.0); }), ErrorCode::InvalidParameter);
    EXPECT_EQ(code_of([] { Likelihood::wr_touchard(0.5, nullptr); }), ErrorCode::InvalidArgument);
}

TEST(Gradient, MatchesFiniteDifferences)
{
    auto table = two_column(30, 8);
    Counts n(30);
    for (std::size_t j = 0; j < n.size(); ++j) n[j] = static_cast<std::int64_t>((j * 5) % 9);
    CounterRng rng({99, 1});
    for (auto link : {Link::Identity, Link::Log}) {
        for (auto lk : {Likelihood::naive(), Likelihood::wor_adjusted(0.3), Likelihood::wr_touchard(0.3, basis64())}) {
            for (int point = 0; point < 5; ++point) {
                Eigen::VectorXd beta(2);
                if (link == Link::Identity) {
                    beta << 1 + 4 * rng.uniform(), 3 * rng.uniform();
                } else {
                    beta << -0.5 + 2 * rng.uniform(), -1 + 2 * rng.uniform();
                }
                auto f = [&](Eigen::VectorXd const& b) { return loglik(table, n, {b, link}, lk); };
                auto g = grad_loglik(table, n, {beta, link}, lk);
                auto H = hessian_loglik(table, n, {beta, link}, lk);
                for (int i = 0; i < 2; ++i) {
                    double const fd = static_cast<double>(oracle::central_difference(f, beta, i, 1e-6L));
                    EXPECT_LT(std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)), 1e-5)
                        << to_string(lk.kind()) << " " << to_string(link);
                    auto gi = [&](Eigen::VectorXd const& b) { return grad_loglik(table, n, {b, link}, lk)[i]; };
                    for (int k = 0; k < 2; ++k) {
                        double const fd2 = static_cast<double>(oracle::central_difference(gi, beta, k, 1e-6L));
                        EXPECT_LT(std::abs(H(i, k) - fd2) / std::max(1.0, std::abs(fd2)), 1e-5);
                    }
                }
            }
        }
    }
}

TEST(Fit, ClosedFormIntercept)
{
    auto table = intercept_only(4);
    Counts n{2, 3, 4, 3};
    auto adj = fit(table, n, Likelihood::wor_adjusted(0.5), Link::Identity);
    EXPECT_TRUE(adj.converged);
    EXPECT_NEAR(adj.beta_hat[0], 6.0, 1e-8);
    // Observed information sum n / beta^2 = 12 / 36.
    EXPECT_NEAR(adj.std_errors[0], std::sqrt(3.0), 1e-8);

    auto naive = fit(table, n, Likelihood::naive(), Link::Identity);
    EXPECT_NEAR(naive.beta_hat[0], 3.0, 1e-8);

    auto logfit = fit(table, n, Likelihood::wor_adjusted(0.5), Link::Log);
    EXPECT_NEAR(logfit.beta_hat[0], std::log(6.0), 1e-8);
    auto mu = mean_vector(table, {adj.beta_hat, Link::Identity});
    EXPECT_LT(grad_loglik(table, n, {adj.beta_hat, Link::Identity}, Likelihood::wor_adjusted(0.5)).norm(), 1e-8);
    (void)mu;
}

TEST(Fit, ScaleIdentity)
{
    auto table = two_column(200, 21);
    Eigen::VectorXd beta(2);
    beta << 3.0, 2.0;
    for (auto link : {Link::Identity, Link::Log}) {
        Eigen::VectorXd b = link == Link::Identity ? beta : Eigen::VectorXd(Eigen::Vector2d(1.0, 0.5));
        auto N = draw_true_counts(table, {b, link}, RngSpec{21, 0});
        auto const n_star = total(N) / 4;
        auto sample = sample_wor(N, n_star, RngSpec{21, 1});
        double const g = static_cast<double>(n_star) / static_cast<double>(total(N));
        auto adj = fit(table, sample.counts(), Likelihood::wor_adjusted(g), link);
        auto naive = fit(table, sample.counts(), Likelihood::naive(), link);
        ASSERT_TRUE(adj.converged && naive.converged);
        if (link == Link::Identity) {
            EXPECT_LT((adj.beta_hat - naive.beta_hat / g).cwiseAbs().maxCoeff(), 1e-8);
        } else {
            // Under the log link only the intercept shifts, by -log(gamma).
            EXPECT_NEAR(adj.beta_hat[0], naive.beta_hat[0] - std::log(g), 1e-8);
            EXPECT_NEAR(adj.beta_hat[1], naive.beta_hat[1], 1e-8);
        }
    }
}

TEST(Fit, SimulatedWorWithinThreeSe)
{
    std::size_t const J = 5000;
    auto table = intercept_only(J);
    auto N = draw_true_counts(table, {Eigen::VectorXd::Constant(1, 4.0), Link::Identity}, RngSpec{404, 0});
    auto const n_star = std::llround(0.25 * static_cast<double>(total(N)));
    auto sample = sample_wor(N, n_star, RngSpec{404, 1});
    double const g = static_cast<double>(n_star) / static_cast<double>(total(N));
    auto adj = fit(table, sample.counts(), Likelihood::wor_adjusted(g), Link::Identity);
    auto naive = fit(table, sample.counts(), Likelihood::naive(), Link::Identity);
    EXPECT_LT(std::abs(adj.beta_hat[0] - 4.0), 3 * adj.std_errors[0]);
    EXPECT_LT(std::abs(naive.beta_hat[0] - 1.0), 3 * naive.std_errors[0]);
}

TEST(Fit, WrTouchardRecoversMean)
{
    std::size_t const J = 3000;
    auto table = two_column(J, 31);
    Eigen::VectorXd beta(2);
    beta << 0.7, 0.6;
    auto N = draw_true_counts(table, {beta, Link::Log}, RngSpec{31, 0});
    auto const n_star = std::llround(0.4 * static_cast<double>(total(N)));
    auto sample = sample_wr(N, n_star, RngSpec{31, 1});
    double const g = static_cast<double>(n_star) / static_cast<double>(total(N));
    auto r = fit(table, sample.counts(), Likelihood::wr_touchard(g, basis64()), Link::Log);
    ASSERT_TRUE(r.converged);
    EXPECT_LT(std::abs(r.beta_hat[0] - beta[0]), 4 * r.std_errors[0]);
    EXPECT_LT(std::abs(r.beta_hat[1] - beta[1]), 4 * r.std_errors[1]);
}

TEST(Fit, NonConvergenceIsFlagged)
{
    auto table = two_column(50, 2);
    Counts n(50, 1);
    FitOptions opts;
    opts.max_iterations = 1;
    opts.init = Eigen::Vector2d(0.01, 0.01);
    auto r = fit(table, n, Likelihood::wor_adjusted(0.5), Link::Log, opts);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 1);
}

TEST(Fit, CollinearDesignIsSingular)
{
    FeatureMatrix X(6, 2);
    X.col(0).setOnes();
    X.col(1).setOnes();
    CaseTable table(X);
    Counts n{1, 3, 2, 0, 4, 2};
    EXPECT_EQ(code_of([&] { fit(table, n, Likelihood::wor_adjusted(0.5), Link::Log); }),
              ErrorCode::SingularInformation);
}

TEST(MarginalPmfs, Examples)
{
    auto const& b = *basis64();
    EXPECT_NEAR(wr_marginal_pmf(0, 2.0, 0.5, b).prob(), std::exp(-2.0 + std::exp(-0.5) * 2.0), 1e-15);
    EXPECT_NEAR(wor_marginal_pmf(0, 2.0, 0.5).prob(), std::exp(-1.0), 1e-15);
    for (int t = 0; t < 15; ++t) {
        EXPECT_NEAR(wor_marginal_pmf(t, 3.0, 1.0).prob(), static_cast<double>(oracle::poisson(t, 3.0L)), 1e-15);
    }
}

TEST(MarginalPmfs, WrMatchesMixtureAndNormalizes)
{
    auto const& b = *basis64();
    for (double mu : {0.2, 1.0, 2.5, 5.0}) {
        for (double g : {0.1, 0.3, 0.7, 1.0}) {
            double norm = 0;
            for (int t = 0; t <= b.t_max(); ++t) {
                double const p = wr_marginal_pmf(t, mu, g, b).prob();
                norm += p;
                if (t <= 25) {
                    long double const o = oracle::wr_mixture(t, mu, g);
                    EXPECT_LT(std::abs((p - o) / o), 1e-8L) << t << " " << mu << " " << g;
                }
            }
            EXPECT_NEAR(norm, 1.0, 1e-6);
        }
    }
}

TEST(MarginalPmfs, ThinningIdentity)
{
    for (double mu : {0.5, 2.0, 8.0}) {
        for (double g : {0.1, 0.5, 0.9}) {
            for (int t = 0; t <= 30; ++t) {
                long double const o = oracle::wor_mixture(t, mu, g);
                EXPECT_LT(std::abs((wor_marginal_pmf(t, mu, g).prob() - o) / o), 1e-10L);
            }
        }
    }
}

TEST(Names, Likelihoods)
{
    EXPECT_EQ(parse_likelihood("wr-touchard"), LikelihoodKind::WrTouchard);
    EXPECT_EQ(parse_likelihood("wor"), LikelihoodKind::WorAdjusted);
    EXPECT_EQ(to_string(LikelihoodKind::NaivePoisson), "naive");
}
