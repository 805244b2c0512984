#include <gtest/gtest.h>

#include "thincount/error.hpp"
#include "thincount/model.hpp"

using namespace thincount;

namespace {

FeatureMatrix matrix(std::initializer_list<std::initializer_list<double>> rows)
{
    FeatureMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (auto const& row : rows) {
        Eigen::Index k = 0;
        for (double v : row) X(i, k++) = v;
        ++i;
    }
    return X;
}

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

}  // namespace

TEST(MeanVector, IdentityScalar)
{
    auto mu = mean_vector(matrix({{1}}), {Eigen::VectorXd::Constant(1, 2.5), Link::Identity});
    ASSERT_EQ(mu.size(), 1);
    EXPECT_DOUBLE_EQ(mu[0], 2.5);
}

TEST(MeanVector, IdentityTwoCases)
{
    Eigen::VectorXd beta(2);
    beta << 1, 0.5;
    auto mu = mean_vector(matrix({{1, 1}, {1, 3}}), {beta, Link::Identity});
    EXPECT_DOUBLE_EQ(mu[0], 1.5);
    EXPECT_DOUBLE_EQ(mu[1], 2.5);
}

TEST(MeanVector, LogLinkAtZero)
{
    auto mu = mean_vector(matrix({{0}}), {Eigen::VectorXd::Constant(1, 7.0), Link::Log});
    EXPECT_DOUBLE_EQ(mu[0], 1.0);
}

TEST(MeanVector, PermutationEquivariant)
{
    Eigen::VectorXd beta(2);
    beta << 0.3, -0.2;
    auto X = matrix({{1, 0.5}, {1, 2}, {1, -1}});
    auto Y = matrix({{1, -1}, {1, 0.5}, {1, 2}});
    auto a = mean_vector(X, {beta, Link::Log});
    auto b = mean_vector(Y, {beta, Link::Log});
    EXPECT_DOUBLE_EQ(a[0], b[1]);
    EXPECT_DOUBLE_EQ(a[1], b[2]);
    EXPECT_DOUBLE_EQ(a[2], b[0]);
}

TEST(MeanVector, Errors)
{
    EXPECT_EQ(code_of([] { mean_vector(matrix({{1, 1}}), {Eigen::VectorXd::Constant(1, 1.0), Link::Identity}); }),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] { mean_vector(matrix({{1}, {-1}}), {Eigen::VectorXd::Constant(1, 1.0), Link::Identity}); }),
              ErrorCode::NonPositiveMean);
    try {
        mean_vector(matrix({{1}, {-1}}), {Eigen::VectorXd::Constant(1, 1.0), Link::Identity});
    } catch (Error const& e) {
        EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
    }
}

TEST(SamplingScheme, Gamma)
{
    EXPECT_DOUBLE_EQ(gamma(SamplingScheme(SchemeKind::WithoutReplacement, 25, 100)), 0.25);
    EXPECT_DOUBLE_EQ(gamma(SamplingScheme(SchemeKind::WithoutReplacement, 100, 100)), 1.0);
    EXPECT_DOUBLE_EQ(gamma(SamplingScheme(SchemeKind::WithReplacement, 1, 3)), 1.0 / 3.0);
}

TEST(SamplingScheme, Validation)
{
    EXPECT_EQ(code_of([] { SamplingScheme(SchemeKind::WithoutReplacement, 101, 100); }),
              ErrorCode::SampleExceedsPopulation);
    EXPECT_EQ(code_of([] { SamplingScheme(SchemeKind::WithReplacement, 0, 100); }), ErrorCode::InvalidArgument);
    EXPECT_NO_THROW(SamplingScheme(SchemeKind::WithReplacement, 200, 100));
}

TEST(CountSample, TotalsAndSupport)
{
    SamplingScheme scheme(SchemeKind::WithoutReplacement, 3, 5);
    EXPECT_EQ(code_of([&] { CountSample({1, 1}, scheme); }), ErrorCode::TotalMismatch);
    CountSample s({3, 0}, scheme);
    std::vector<std::int64_t> N{2, 3};
    EXPECT_EQ(code_of([&] { s.check_support(N); }), ErrorCode::SupportViolation);
    CountSample ok({1, 2}, scheme);
    EXPECT_NO_THROW(ok.check_support(N));
}

TEST(CaseTable, AccessorsAndSubset)
{
    CaseTable t(matrix({{1, 2}, {1, 3}, {1, 4}}), Counts{4, 5, 6});
    EXPECT_EQ(t.num_cases(), 3u);
    EXPECT_EQ(t.num_features(), 2u);
    EXPECT_EQ(t.total_population(), 15);
    std::vector<std::size_t> rows{2, 0};
    auto s = t.subset(rows);
    EXPECT_EQ(s.num_cases(), 2u);
    EXPECT_EQ(s.true_counts()[0], 6);
    EXPECT_DOUBLE_EQ(s.features()(1, 1), 2.0);

    CaseTable bare(matrix({{1}}));
    EXPECT_FALSE(bare.has_true_counts());
    EXPECT_EQ(code_of([&] { bare.true_counts(); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { CaseTable(matrix({{1}, {1}}), Counts{1}); }), ErrorCode::DimensionMismatch);
}

TEST(PopulationFractions, SumsToOne)
{
    std::vector<std::int64_t> N{1, 3, 0, 4};
    auto p = population_fractions(N);
    EXPECT_DOUBLE_EQ(p[1], 3.0 / 8.0);
    EXPECT_DOUBLE_EQ(p[2], 0.0);
    std::vector<std::int64_t> empty{0, 0};
    EXPECT_EQ(code_of([&] { population_fractions(empty); }), ErrorCode::EmptyPopulation);
}

TEST(Names, RoundTrip)
{
    EXPECT_EQ(parse_link(to_string(Link::Log)), Link::Log);
    EXPECT_EQ(parse_scheme(to_string(SchemeKind::WithReplacement)), SchemeKind::WithReplacement);
    EXPECT_EQ(code_of([] { parse_link("probit"); }), ErrorCode::InvalidArgument);
}
