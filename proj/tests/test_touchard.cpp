#include <cmath>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "thincount/error.hpp"
#include "thincount/touchard.hpp"

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

std::vector<long> row_of(TouchardBasis const& b, int t)
{
    std::vector<long> out;
    for (auto const& c : b.row(t)) out.push_back(c.convert_to<long>());
    return out;
}

}  // namespace

TEST(Basis, LowDegreeRows)
{
    auto b = build_basis(3);
    EXPECT_EQ(b.t_max(), 3);
    EXPECT_EQ(row_of(b, 0), (std::vector<long>{1}));
    EXPECT_EQ(row_of(b, 1), (std::vector<long>{0, 1}));
    EXPECT_EQ(row_of(b, 2), (std::vector<long>{0, 1, 1}));
    EXPECT_EQ(row_of(b, 3), (std::vector<long>{0, 1, 3, 1}));
}

TEST(Basis, MatchesStirlingRecurrence)
{
    auto b = build_basis(25);
    auto S = oracle::stirling2(25);
    for (int t = 0; t <= 25; ++t) {
        for (int k = 0; k <= t; ++k) ASSERT_EQ(b.coefficient(t, k), S[t][k]) << t << "," << k;
    }
}

TEST(Basis, BellNumbers)
{
    // g_t(1) is the t-th Bell number.
    auto b = build_basis(64);
    EXPECT_EQ(static_cast<double>(b.g(1.0L, 10)), 115975.0);
    TouchardBasis::Integer bell = 0;
    for (auto const& c : b.row(64)) bell += c;
    EXPECT_EQ(bell.str(), "172134143357358850934369963665272571125557575184049758045339873395");
}

TEST(Basis, DerivativesAgree)
{
    auto b = build_basis(30);
    for (int t = 1; t <= 30; ++t) {
        for (long double x : {0.05L, 0.7L, 3.0L, 12.0L}) {
            auto d = b.g_with_derivatives(x, t);
            long double const rec = b.g_prime_by_recursion(x, t);
            EXPECT_LT(std::abs(d.first - rec) / rec, 1e-14L) << t << " " << static_cast<double>(x);
            long double const h = 1e-4L * x;
            long double const fd2 = (b.g_prime_by_recursion(x + h, t) - b.g_prime_by_recursion(x - h, t)) / (2 * h);
            EXPECT_LT(std::abs(d.second - fd2) / std::max(1.0L, std::abs(fd2)), 1e-6L) << t;
        }
    }
}

TEST(EvalF, Examples)
{
    auto b = build_basis();
    EXPECT_NEAR(eval_f(1.3, 0, b), 1.3, 1e-15);
    EXPECT_NEAR(std::exp(eval_f(1.0, 1, b)), std::exp(1.0), 1e-14);
    EXPECT_NEAR(std::exp(eval_f(1.0, 2, b)), 2 * std::exp(1.0), 1e-14);
}

TEST(EvalF, MatchesSeries)
{
    auto b = build_basis(40);
    for (int t = 0; t <= 40; ++t) {
        for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
            long double const o = oracle::touchard_series(x, t);
            double const v = std::exp(eval_f(x, t, b));
            EXPECT_LT(std::abs((v - o) / o), 1e-12L) << t << " " << x;
        }
    }
}

TEST(SeriesOracle, Examples)
{
    auto b = build_basis();
    EXPECT_NEAR(series_oracle_f(1.0, 0, 1e-14), std::exp(1.0), 1e-13);
    for (auto [x, t] : {std::pair{2.0, 5}, std::pair{5.0, 10}}) {
        double const s = series_oracle_f(x, t, 1e-16);
        EXPECT_LT(std::abs(std::exp(eval_f(x, t, b)) - s) / s, 1e-8);
    }
}

TEST(Basis, CsvDump)
{
    auto csv = build_basis(2).to_csv();
    EXPECT_EQ(csv, "t,k,coefficient\n0,0,1\n1,0,0\n1,1,1\n2,0,0\n2,1,1\n2,2,1\n");
}

TEST(Basis, Errors)
{
    auto b = build_basis(5);
    EXPECT_EQ(code_of([&] { eval_f(1.0, 6, b); }), ErrorCode::DegreeExceeded);
    EXPECT_EQ(code_of([&] { eval_f(0.0, 2, b); }), ErrorCode::InvalidParameter);
    EXPECT_EQ(code_of([] { build_basis(-1); }), ErrorCode::InvalidArgument);
}
