#include "thincount/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "thincount/error.hpp"

namespace thincount {
namespace {

constexpr double kInitOffset = 1e-2;
constexpr int kMaxHalvings = 60;

//! Case log-likelihood and its first two derivatives in mu.
struct CaseTerms
{
    double value = 0.0;
    double first = 0.0;
    double second = 0.0;
};

CaseTerms case_terms(std::int64_t t, double mu, Likelihood const& lk, int order)
{
    CaseTerms c;
    double const tt = static_cast<double>(t);
    switch (lk.kind()) {
    case LikelihoodKind::NaivePoisson:
        c.value = tt * std::log(mu) - mu - log_factorial(t);
        c.first = tt / mu - 1.0;
        c.second = -tt / (mu * mu);
        break;
    case LikelihoodKind::WorAdjusted:
        c.value = tt * std::log(lk.gamma() * mu) - lk.gamma() * mu - log_factorial(t);
        c.first = tt / mu - lk.gamma();
        c.second = -tt / (mu * mu);
        break;
    case LikelihoodKind::WrTouchard: {
        TouchardBasis const& basis = *lk.basis();
        double const shrink = std::exp(-lk.gamma());
        double const x = shrink * mu;
        int const degree = static_cast<int>(t);
        if (t > basis.t_max()) {
            raise(ErrorCode::DegreeExceeded,
                  "count " + std::to_string(t) + " exceeds Touchard degree "
                      + std::to_string(basis.t_max()));
        }
        long double const g = basis.g(x, degree);
        c.value = -mu + tt * std::log(lk.gamma()) - log_factorial(t)
                  + static_cast<double>(std::log(g)) + x;
        if (order >= 1) {
            long double const g1 = basis.g_prime_by_recursion(x, degree);
            c.first = -1.0 + shrink * static_cast<double>(g1 / g + 1.0L);
        }
        if (order >= 2) {
            auto const d = basis.g_with_derivatives(x, degree);
            long double const r1 = d.first / d.value;
            c.second = shrink * shrink * static_cast<double>(d.second / d.value - r1 * r1);
        }
        break;
    }
    }
    return c;
}

struct Evaluation
{
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

void check_counts(CaseTable const& table, std::span<std::int64_t const> counts)
{
    if (counts.size() != table.num_cases()) {
        raise(ErrorCode::DimensionMismatch,
              "got " + std::to_string(counts.size()) + " counts for " + std::to_string(table.num_cases())
                  + " cases");
    }
    for (auto t : counts) {
        if (t < 0) raise(ErrorCode::InvalidArgument, "observed counts must be non-negative");
    }
}

Evaluation evaluate(CaseTable const& table, std::span<std::int64_t const> counts,
                    MeanStructure const& ms, Likelihood const& lk, int order)
{
    check_counts(table, counts);
    Eigen::VectorXd const mu = mean_vector(table, ms);
    auto const d = static_cast<Eigen::Index>(table.num_features());
    Evaluation ev;
    if (order >= 1) ev.gradient = Eigen::VectorXd::Zero(d);
    if (order >= 2) ev.hessian = Eigen::MatrixXd::Zero(d, d);

    // Per-case weights in eta = X beta: dl/deta and d2l/deta2.
    Eigen::VectorXd w1(mu.size()), w2(mu.size());
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
        CaseTerms const c = case_terms(counts[static_cast<std::size_t>(j)], mu[j], lk, order);
        ev.value += c.value;
        if (ms.link == Link::Identity) {
            w1[j] = c.first;
            w2[j] = c.second;
        } else {
            w1[j] = c.first * mu[j];
            w2[j] = c.second * mu[j] * mu[j] + c.first * mu[j];
        }
    }
    auto const& X = table.features();
    if (order >= 1) ev.gradient = X.transpose() * w1;
    if (order >= 2) ev.hessian = X.transpose() * w2.asDiagonal() * X;
    return ev;
}

bool feasible(CaseTable const& table, Eigen::VectorXd const& beta, Link link)
{
    if (link == Link::Log) {
        Eigen::VectorXd const eta = table.features() * beta;
        return eta.allFinite() && (eta.array() < 700.0).all();
    }
    Eigen::VectorXd const eta = table.features() * beta;
    return (eta.array() > 0.0).all() && eta.allFinite();
}

std::optional<Eigen::Index> constant_column(FeatureMatrix const& X)
{
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        double const v = X(0, c);
        if (v != 0.0 && (X.col(c).array() == v).all()) return c;
    }
    return std::nullopt;
}

//! Solves info * step = gradient, damping the diagonal until info is positive definite.
Eigen::VectorXd newton_direction(Eigen::MatrixXd const& info, Eigen::VectorXd const& gradient)
{
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd step = llt.solve(gradient);
        if (step.allFinite()) return step;
    }
    double const scale = std::max(info.diagonal().cwiseAbs().maxCoeff(), 1.0);
    for (double tau = 1e-10 * scale; tau < 1e12 * scale; tau *= 10.0) {
        Eigen::MatrixXd damped = info;
        damped.diagonal().array() += tau;
        Eigen::LLT<Eigen::MatrixXd> damped_llt(damped);
        if (damped_llt.info() == Eigen::Success) return damped_llt.solve(gradient);
    }
    return gradient / scale;
}

}  // namespace

std::string_view to_string(LikelihoodKind kind) noexcept
{
    switch (kind) {
    case LikelihoodKind::NaivePoisson: return "naive";
    case LikelihoodKind::WorAdjusted: return "wor-adjusted";
    case LikelihoodKind::WrTouchard: return "wr-touchard";
    }
    return "unknown";
}

LikelihoodKind parse_likelihood(std::string_view name)
{
    if (name == "naive") return LikelihoodKind::NaivePoisson;
    if (name == "wor-adjusted" || name == "wor") return LikelihoodKind::WorAdjusted;
    if (name == "wr-touchard" || name == "wr") return LikelihoodKind::WrTouchard;
    raise(ErrorCode::InvalidArgument, "unknown likelihood '" + std::string(name) + "'");
}

Likelihood::Likelihood(LikelihoodKind kind, double gamma, std::shared_ptr<TouchardBasis const> basis)
    : kind_(kind), gamma_(gamma), basis_(std::move(basis))
{
    if (kind_ != LikelihoodKind::NaivePoisson && !(gamma_ > 0.0 && gamma_ <= 1.0)) {
        raise(ErrorCode::InvalidParameter,
              "sampling ratio must lie in (0, 1], got " + std::to_string(gamma_));
    }
    if (kind_ == LikelihoodKind::WrTouchard && !basis_) {
        raise(ErrorCode::InvalidArgument, "WR likelihood needs a Touchard basis");
    }
}

Likelihood Likelihood::naive()
{
    return Likelihood(LikelihoodKind::NaivePoisson, 1.0, nullptr);
}

Likelihood Likelihood::wor_adjusted(double gamma)
{
    return Likelihood(LikelihoodKind::WorAdjusted, gamma, nullptr);
}

Likelihood Likelihood::wr_touchard(double gamma, std::shared_ptr<TouchardBasis const> basis)
{
    return Likelihood(LikelihoodKind::WrTouchard, gamma, std::move(basis));
}

double loglik(CaseTable const& table, std::span<std::int64_t const> counts, MeanStructure const& ms,
              Likelihood const& lk)
{
    return evaluate(table, counts, ms, lk, 0).value;
}

double loglik(CaseTable const& table, CountSample const& counts, MeanStructure const& ms,
              Likelihood const& lk)
{
    return loglik(table, counts.counts(), ms, lk);
}

Eigen::VectorXd grad_loglik(CaseTable const& table, std::span<std::int64_t const> counts,
                            MeanStructure const& ms, Likelihood const& lk)
{
    return evaluate(table, counts, ms, lk, 1).gradient;
}

Eigen::MatrixXd hessian_loglik(CaseTable const& table, std::span<std::int64_t const> counts,
                               MeanStructure const& ms, Likelihood const& lk)
{
    return evaluate(table, counts, ms, lk, 2).hessian;
}

Eigen::VectorXd initial_beta(CaseTable const& table, std::span<std::int64_t const> counts,
                             Likelihood const& lk, Link link)
{
    check_counts(table, counts);
    auto const& X = table.features();
    double const ratio = lk.kind() == LikelihoodKind::NaivePoisson ? 1.0 : lk.gamma();
    double const n_bar = static_cast<double>(total(counts)) / static_cast<double>(counts.size());
    double const level = n_bar / ratio + kInitOffset;
    auto const intercept = constant_column(X);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
    if (link == Link::Log) {
        if (intercept) beta[*intercept] = std::log(level) / X(0, *intercept);
        return beta;
    }

    Eigen::VectorXd target(X.rows());
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        target[j] = static_cast<double>(counts[static_cast<std::size_t>(j)]) / ratio;
    }
    Eigen::VectorXd const ls = Eigen::MatrixXd(X).colPivHouseholderQr().solve(target);
    if (ls.allFinite() && feasible(table, ls, Link::Identity)) return ls;
    if (intercept) {
        beta[*intercept] = level / X(0, *intercept);
        if (feasible(table, beta, Link::Identity)) return beta;
    }
    raise(ErrorCode::InfeasibleStart,
          "no feasible identity-link starting point; supply an initial beta");
}

FitResult fit(CaseTable const& table, std::span<std::int64_t const> counts, Likelihood const& lk,
              Link link, FitOptions const& options)
{
    check_counts(table, counts);
    MeanStructure ms{options.init ? *options.init : initial_beta(table, counts, lk, link), link};
    if (ms.beta.size() != static_cast<Eigen::Index>(table.num_features())) {
        raise(ErrorCode::DimensionMismatch, "initial beta has the wrong length");
    }
    if (!feasible(table, ms.beta, link)) {
        raise(ErrorCode::InfeasibleStart, "initial beta gives a non-positive or non-finite mean");
    }

    FitResult result;
    result.kind = lk.kind();
    result.link = link;
    result.gamma = lk.gamma();
    result.num_cases = table.num_cases();

    Evaluation ev = evaluate(table, counts, ms, lk, 2);
    int iteration = 0;
    for (; iteration < options.max_iterations; ++iteration) {
        if (ev.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;

        Eigen::VectorXd const direction = newton_direction(-ev.hessian, ev.gradient);
        // Accept steps that lose no more than rounding noise so the final
        // iterations can still polish the gradient.
        double const slack = 1e-13 * (1.0 + std::abs(ev.value));
        double step = 1.0;
        bool accepted = false;
        MeanStructure candidate{ms.beta, link};
        for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
            candidate.beta = ms.beta + step * direction;
            if (!feasible(table, candidate.beta, link)) continue;
            double const value = loglik(table, counts, candidate, lk);
            if (std::isfinite(value) && value >= ev.value - slack) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        ms.beta = candidate.beta;
        ev = evaluate(table, counts, ms, lk, 2);
    }

    result.beta_hat = ms.beta;
    result.loglik = ev.value;
    result.iterations = iteration;
    result.gradient_norm = ev.gradient.lpNorm<Eigen::Infinity>();
    result.converged = result.gradient_norm < options.gradient_tolerance;

    Eigen::MatrixXd const info = -ev.hessian;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    double const largest = eig.eigenvalues().cwiseAbs().maxCoeff();
    bool const definite = eig.info() == Eigen::Success
                          && eig.eigenvalues().minCoeff() > 1e-12 * std::max(largest, 1e-300);
    if (definite) {
        Eigen::MatrixXd const covariance = info.llt().solve(
            Eigen::MatrixXd::Identity(info.rows(), info.cols()));
        result.std_errors = covariance.diagonal().cwiseSqrt();
    } else if (result.converged) {
        raise(ErrorCode::SingularInformation,
              "observed information is not positive definite at the optimum");
    } else {
        result.std_errors = Eigen::VectorXd::Constant(info.rows(),
                                                      std::numeric_limits<double>::quiet_NaN());
    }
    return result;
}

LogProb wr_marginal_pmf(std::int64_t t, double mu, double gamma, TouchardBasis const& basis)
{
    if (!(mu > 0.0)) raise(ErrorCode::InvalidParameter, "mean must be positive");
    if (!(gamma > 0.0)) raise(ErrorCode::InvalidParameter, "sampling ratio must be positive");
    if (t < 0) raise(ErrorCode::InvalidParameter, "count must be non-negative");
    if (t > basis.t_max()) {
        raise(ErrorCode::DegreeExceeded,
              "count " + std::to_string(t) + " exceeds Touchard degree " + std::to_string(basis.t_max()));
    }
    double const x = std::exp(-gamma) * mu;
    double const log_g = static_cast<double>(std::log(basis.g(x, static_cast<int>(t))));
    return {-mu + static_cast<double>(t) * std::log(gamma) - log_factorial(t) + log_g + x};
}

LogProb wor_marginal_pmf(std::int64_t t, double mu, double gamma)
{
    if (!(mu > 0.0)) raise(ErrorCode::InvalidParameter, "mean must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        raise(ErrorCode::InvalidParameter, "sampling ratio must lie in (0, 1]");
    }
    return log_poisson_pmf(t, gamma * mu);
}

}  // namespace thincount
