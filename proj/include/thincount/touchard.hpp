#pragma once

#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace thincount {

inline constexpr int kDefaultTouchardDegree = 64;

//---------------------------------------------------------------------------//
/*!
 * Polynomials g_0..g_tmax with sum_r r^t x^r / r! = g_t(x) e^x.
 *
 * Row t holds the exact integer coefficients of g_t in the monomial basis.
 * They are built by integrating g_t' = sum_{m<t} C(t,m) g_m with g_t(0) = 0
 * for t >= 1, and coincide with the Stirling numbers of the second kind.
 * Evaluation uses long double copies of the coefficients.
 */
class TouchardBasis
{
public:
    using Integer = boost::multiprecision::cpp_int;

    struct Derivatives
    {
        long double value;
        long double first;
        long double second;
    };

    explicit TouchardBasis(std::vector<std::vector<Integer>> rows);

    int t_max() const noexcept { return static_cast<int>(rows_.size()) - 1; }
    std::span<Integer const> row(int t) const;
    Integer const& coefficient(int t, int k) const;

    //! g_t(x) by Horner's scheme.
    long double g(long double x, int t) const;
    //! g_t and its first two derivatives from the coefficient table.
    Derivatives g_with_derivatives(long double x, int t) const;
    //! g_t'(x) = sum_{m<t} C(t,m) g_m(x).
    long double g_prime_by_recursion(long double x, int t) const;

    //! Long-format CSV: `t,k,coefficient`, one row per stored coefficient.
    std::string to_csv() const;

private:
    void check_degree(int t) const;

    std::vector<std::vector<Integer>> rows_;
    std::vector<std::vector<long double>> approx_;
    std::vector<std::vector<long double>> binomials_;
};

TouchardBasis build_basis(int t_max = kDefaultTouchardDegree);

/// ln f(x, t) = ln g_t(x) + x for x > 0. Raises DegreeExceeded past t_max.
double eval_f(double x, int t, TouchardBasis const& basis);

/// f(x, t) by direct summation of r^t x^r / r!, stopping once the next term
/// is below `tol` times the running sum. Test oracle only.
double series_oracle_f(double x, int t, double tol);

}  // namespace thincount
