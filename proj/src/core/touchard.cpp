#include "thincount/touchard.hpp"

#include <cmath>
#include <sstream>

#include "thincount/error.hpp"
#include "thincount/pmf.hpp"

namespace thincount {

TouchardBasis::TouchardBasis(std::vector<std::vector<Integer>> rows) : rows_(std::move(rows))
{
    if (rows_.empty()) {
        raise(ErrorCode::InvalidArgument, "Touchard basis needs at least g_0");
    }
    approx_.reserve(rows_.size());
    for (auto const& r : rows_) {
        std::vector<long double> a;
        a.reserve(r.size());
        for (auto const& c : r) {
            a.push_back(c.convert_to<long double>());
        }
        approx_.push_back(std::move(a));
    }
    binomials_.resize(rows_.size());
    for (std::size_t t = 0; t < rows_.size(); ++t) {
        binomials_[t].assign(t + 1, 1.0L);
        for (std::size_t m = 1; m < t; ++m) {
            binomials_[t][m] = binomials_[t - 1][m - 1] + binomials_[t - 1][m];
        }
    }
}

void TouchardBasis::check_degree(int t) const
{
    if (t < 0 || t > t_max()) {
        raise(ErrorCode::DegreeExceeded,
              "degree " + std::to_string(t) + " outside basis range [0, " + std::to_string(t_max())
                  + "]");
    }
}

std::span<TouchardBasis::Integer const> TouchardBasis::row(int t) const
{
    check_degree(t);
    return rows_[static_cast<std::size_t>(t)];
}

TouchardBasis::Integer const& TouchardBasis::coefficient(int t, int k) const
{
    check_degree(t);
    if (k < 0 || k > t) {
        raise(ErrorCode::InvalidArgument, "coefficient index outside [0, t]");
    }
    return rows_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
}

long double TouchardBasis::g(long double x, int t) const
{
    check_degree(t);
    auto const& a = approx_[static_cast<std::size_t>(t)];
    long double acc = 0.0L;
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

TouchardBasis::Derivatives TouchardBasis::g_with_derivatives(long double x, int t) const
{
    check_degree(t);
    auto const& a = approx_[static_cast<std::size_t>(t)];
    long double p = 0.0L, dp = 0.0L, ddp = 0.0L;
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
        ddp = ddp * x + 2.0L * dp;
        dp = dp * x + p;
        p = p * x + *it;
    }
    return {p, dp, ddp};
}

long double TouchardBasis::g_prime_by_recursion(long double x, int t) const
{
    check_degree(t);
    long double acc = 0.0L;
    for (int m = 0; m < t; ++m) {
        acc += binomials_[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] * g(x, m);
    }
    return acc;
}

std::string TouchardBasis::to_csv() const
{
    std::ostringstream out;
    out << "t,k,coefficient\n";
    for (std::size_t t = 0; t < rows_.size(); ++t) {
        for (std::size_t k = 0; k < rows_[t].size(); ++k) {
            out << t << ',' << k << ',' << rows_[t][k] << '\n';
        }
    }
    return out.str();
}

TouchardBasis build_basis(int t_max)
{
    using Integer = TouchardBasis::Integer;
    if (t_max < 0) {
        raise(ErrorCode::InvalidArgument, "t_max must be non-negative");
    }
    std::vector<std::vector<Integer>> binom(static_cast<std::size_t>(t_max) + 1);
    std::vector<std::vector<Integer>> rows(static_cast<std::size_t>(t_max) + 1);
    rows[0] = {Integer(1)};
    binom[0] = {Integer(1)};
    for (std::size_t t = 1; t <= static_cast<std::size_t>(t_max); ++t) {
        binom[t].assign(t + 1, Integer(1));
        for (std::size_t m = 1; m < t; ++m) {
            binom[t][m] = binom[t - 1][m - 1] + binom[t - 1][m];
        }
        // g_t' coefficients: sum over m < t of C(t,m) * g_m, degree t-1.
        std::vector<Integer> derivative(t, Integer(0));
        for (std::size_t m = 0; m < t; ++m) {
            for (std::size_t k = 0; k < rows[m].size(); ++k) {
                derivative[k] += binom[t][m] * rows[m][k];
            }
        }
        // Integrate with zero constant term.
        rows[t].assign(t + 1, Integer(0));
        for (std::size_t k = 1; k <= t; ++k) {
            Integer const& c = derivative[k - 1];
            if (c % k != 0) {
                raise(ErrorCode::InvalidArgument, "non-integral Touchard coefficient");
            }
            rows[t][k] = c / k;
        }
    }
    return TouchardBasis(std::move(rows));
}

double eval_f(double x, int t, TouchardBasis const& basis)
{
    if (!(x > 0.0)) {
        raise(ErrorCode::InvalidParameter, "f(x, t) needs x > 0");
    }
    return static_cast<double>(std::log(basis.g(x, t))) + x;
}

double series_oracle_f(double x, int t, double tol)
{
    if (!(x > 0.0) || !(tol > 0.0)) {
        raise(ErrorCode::InvalidParameter, "series oracle needs x > 0 and tol > 0");
    }
    double sum = t == 0 ? 1.0 : 0.0;
    for (std::int64_t r = 1;; ++r) {
        double const term = std::exp(static_cast<double>(t) * std::log(static_cast<double>(r))
                                     + static_cast<double>(r) * std::log(x) - log_factorial(r));
        sum += term;
        double const next = std::exp(static_cast<double>(t) * std::log(static_cast<double>(r + 1))
                                     + static_cast<double>(r + 1) * std::log(x)
                                     - log_factorial(r + 1));
        // Terms rise to a single peak; only stop on the falling side.
        if (next < term && next < tol * sum) break;
    }
    return sum;
}

}  // namespace thincount
