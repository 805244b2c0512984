#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "thincount/model.hpp"
#include "thincount/pmf.hpp"
#include "thincount/touchard.hpp"

namespace thincount {

enum class LikelihoodKind { NaivePoisson, WorAdjusted, WrTouchard };

std::string_view to_string(LikelihoodKind kind) noexcept;
LikelihoodKind parse_likelihood(std::string_view name);

//---------------------------------------------------------------------------//
/*!
 * Model for the observed count n_j given the case mean mu_j.
 *
 * - NaivePoisson: n_j ~ Poisson(mu_j), ignoring the sampling.
 * - WorAdjusted: n_j ~ Poisson(gamma mu_j), the thinned law.
 * - WrTouchard: the Poisson(gamma N_j) mixture over N_j ~ Poisson(mu_j),
 *   written through the Touchard polynomials. Experimental: the product of
 *   these marginals is itself an approximation.
 */
class Likelihood
{
public:
    static Likelihood naive();
    static Likelihood wor_adjusted(double gamma);
    static Likelihood wr_touchard(double gamma, std::shared_ptr<TouchardBasis const> basis);

    LikelihoodKind kind() const noexcept { return kind_; }
    double gamma() const noexcept { return gamma_; }
    //! Null unless kind() is WrTouchard.
    TouchardBasis const* basis() const noexcept { return basis_.get(); }

private:
    Likelihood(LikelihoodKind kind, double gamma, std::shared_ptr<TouchardBasis const> basis);

    LikelihoodKind kind_;
    double gamma_;
    std::shared_ptr<TouchardBasis const> basis_;
};

double loglik(CaseTable const& table, std::span<std::int64_t const> counts, MeanStructure const& ms,
              Likelihood const& lk);
double loglik(CaseTable const& table, CountSample const& counts, MeanStructure const& ms,
              Likelihood const& lk);

//! Analytic gradient in beta.
Eigen::VectorXd grad_loglik(CaseTable const& table, std::span<std::int64_t const> counts,
                            MeanStructure const& ms, Likelihood const& lk);
//! Analytic Hessian in beta; its negative is the observed information.
Eigen::MatrixXd hessian_loglik(CaseTable const& table, std::span<std::int64_t const> counts,
                               MeanStructure const& ms, Likelihood const& lk);

struct FitOptions
{
    double gradient_tolerance = 1e-8;
    int max_iterations = 200;
    std::optional<Eigen::VectorXd> init;
};

struct FitResult
{
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd std_errors;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;

    LikelihoodKind kind = LikelihoodKind::WorAdjusted;
    Link link = Link::Identity;
    double gamma = 1.0;
    std::size_t num_cases = 0;
};

/// Starting point used when FitOptions::init is empty.
///
/// A constant column is treated as the intercept. Log link: zero except the
/// intercept at ln(mean(n)/gamma + 0.01). Identity link: least squares of
/// n_j/gamma on X_j when every fitted mean is positive, else the
/// intercept-only mean. Raises InfeasibleStart when neither works.
Eigen::VectorXd initial_beta(CaseTable const& table, std::span<std::int64_t const> counts,
                             Likelihood const& lk, Link link);

/// Newton ascent with step halving. Stops when the gradient sup-norm is
/// below the tolerance or after max_iterations; a stalled or exhausted run
/// returns its best iterate with converged = false. Standard errors come from
/// the inverse observed information. Raises SingularInformation when a
/// converged fit has a singular (or indefinite) information matrix.
FitResult fit(CaseTable const& table, std::span<std::int64_t const> counts, Likelihood const& lk,
              Link link, FitOptions const& options = {});

/// Pr(n_j = t | mu_j) under WR: the Touchard form of the Poisson mixture.
LogProb wr_marginal_pmf(std::int64_t t, double mu, double gamma, TouchardBasis const& basis);

/// Pr(n_j = t | mu_j) under WOR: Poisson(gamma mu).
LogProb wor_marginal_pmf(std::int64_t t, double mu, double gamma);

}  // namespace thincount
