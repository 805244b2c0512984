#include "thincount/thincount.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "thincount/error.hpp"
#include "thincount/experiments.hpp"
#include "thincount/inference.hpp"
#include "thincount/io.hpp"
#include "thincount/sampler.hpp"
#include "thincount/touchard.hpp"
#include "thincount/verify.hpp"

struct thc_table
{
    thincount::CaseTable table;
    std::optional<thincount::Counts> observed;
};

struct thc_fit
{
    thincount::FitResult result;
};

struct thc_basis
{
    std::shared_ptr<thincount::TouchardBasis const> basis;
};

namespace {

using thincount::Error;
using thincount::ErrorCode;

thread_local std::string last_error;

thc_status to_status(ErrorCode code) noexcept
{
    // The enums share numbering by construction.
    return static_cast<thc_status>(static_cast<int>(code));
}

template<class Body>
thc_status guarded(Body&& body) noexcept
{
    try {
        body();
        return THC_OK;
    } catch (Error const& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (std::bad_alloc const&) {
        last_error = "out of memory";
        return THC_E_INTERNAL;
    } catch (std::exception const& e) {
        last_error = e.what();
        return THC_E_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return THC_E_INTERNAL;
    }
}

void require(bool condition, char const* what)
{
    if (!condition) thincount::raise(ErrorCode::InvalidArgument, what);
}

char* copy_string(std::string const& s)
{
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void copy_counts(std::span<std::int64_t const> src, int64_t* out, size_t len)
{
    require(out != nullptr, "output buffer is null");
    if (len != src.size()) {
        thincount::raise(ErrorCode::DimensionMismatch,
                         "buffer holds " + std::to_string(len) + " entries, need " + std::to_string(src.size()));
    }
    std::copy(src.begin(), src.end(), out);
}

void copy_vector(Eigen::VectorXd const& src, double* out, size_t len)
{
    require(out != nullptr, "output buffer is null");
    if (len != static_cast<size_t>(src.size())) {
        thincount::raise(ErrorCode::DimensionMismatch, "output buffer has the wrong length");
    }
    std::copy(src.data(), src.data() + src.size(), out);
}

}  // namespace

extern "C" {

const char* thc_version(void)
{
    return "0.1.0";
}

const char* thc_status_name(thc_status status)
{
    switch (status) {
    case THC_OK: return "OK";
    case THC_E_INTERNAL: return "Internal";
    default: break;
    }
    int const code = static_cast<int>(status);
    if (code >= 1 && code <= static_cast<int>(ErrorCode::IoError)) {
        return thincount::to_string(static_cast<ErrorCode>(code)).data();
    }
    return "Unknown";
}

const char* thc_last_error_message(void)
{
    return last_error.c_str();
}

void thc_string_free(char* s)
{
    std::free(s);
}

thc_status thc_table_create(size_t num_cases, size_t num_features, const double* features,
                            const int64_t* true_counts, thc_table** out)
{
    return guarded([&] {
        require(out != nullptr && features != nullptr, "null argument");
        thincount::FeatureMatrix X(static_cast<Eigen::Index>(num_cases),
                                   static_cast<Eigen::Index>(num_features));
        std::copy(features, features + num_cases * num_features, X.data());
        std::optional<thincount::Counts> truth;
        if (true_counts) truth.emplace(true_counts, true_counts + num_cases);
        *out = new thc_table{thincount::CaseTable(std::move(X), std::move(truth)), std::nullopt};
    });
}

thc_status thc_table_load(const char* path, thc_table** out)
{
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        auto data = thincount::load_case_file(path);
        *out = new thc_table{std::move(data.table), std::move(data.observed)};
    });
}

thc_status thc_table_load_counts(thc_table* table, const char* counts_path)
{
    return guarded([&] {
        require(table != nullptr && counts_path != nullptr, "null argument");
        auto counts = thincount::load_counts_file(counts_path);
        if (counts.size() != table->table.num_cases()) {
            thincount::raise(ErrorCode::DimensionMismatch,
                             "counts file has " + std::to_string(counts.size()) + " rows for "
                                 + std::to_string(table->table.num_cases()) + " cases");
        }
        table->observed = std::move(counts);
    });
}

thc_status thc_table_set_counts(thc_table* table, const int64_t* counts, size_t len)
{
    return guarded([&] {
        require(table != nullptr && counts != nullptr, "null argument");
        if (len != table->table.num_cases()) {
            thincount::raise(ErrorCode::DimensionMismatch, "counts length differs from case count");
        }
        for (size_t j = 0; j < len; ++j) {
            if (counts[j] < 0) thincount::raise(ErrorCode::InvalidArgument, "negative count");
        }
        table->observed.emplace(counts, counts + len);
    });
}

void thc_table_free(thc_table* table)
{
    delete table;
}

size_t thc_table_num_cases(const thc_table* table)
{
    return table ? table->table.num_cases() : 0;
}

size_t thc_table_num_features(const thc_table* table)
{
    return table ? table->table.num_features() : 0;
}

int thc_table_has_true_counts(const thc_table* table)
{
    return table && table->table.has_true_counts() ? 1 : 0;
}

int thc_table_has_counts(const thc_table* table)
{
    return table && table->observed ? 1 : 0;
}

thc_status thc_table_true_counts(const thc_table* table, int64_t* out, size_t len)
{
    return guarded([&] {
        require(table != nullptr, "null table");
        copy_counts(table->table.true_counts(), out, len);
    });
}

thc_status thc_table_counts(const thc_table* table, int64_t* out, size_t len)
{
    return guarded([&] {
        require(table != nullptr, "null table");
        require(table->observed.has_value(), "table has no observed counts");
        copy_counts(*table->observed, out, len);
    });
}

thc_status thc_table_totals(const thc_table* table, int64_t* n_star, int64_t* N_star)
{
    return guarded([&] {
        require(table != nullptr, "null table");
        if (n_star) {
            require(table->observed.has_value(), "table has no observed counts");
            *n_star = thincount::total(*table->observed);
        }
        if (N_star) *N_star = table->table.total_population();
    });
}

thc_status thc_table_save_csv(const thc_table* table, const char* path)
{
    return guarded([&] {
        require(table != nullptr && path != nullptr, "null argument");
        std::ofstream out(path);
        if (!out) thincount::raise(ErrorCode::IoError, std::string("cannot write '") + path + "'");
        std::optional<std::span<std::int64_t const>> observed;
        if (table->observed) observed = std::span<std::int64_t const>(*table->observed);
        thincount::write_case_csv(out, table->table, observed);
    });
}

thc_status thc_table_save_counts_csv(const thc_table* table, const char* path)
{
    return guarded([&] {
        require(table != nullptr && path != nullptr, "null argument");
        require(table->observed.has_value(), "table has no observed counts");
        std::ofstream out(path);
        if (!out) thincount::raise(ErrorCode::IoError, std::string("cannot write '") + path + "'");
        thincount::write_counts_csv(out, *table->observed);
    });
}

thc_status thc_simulate(const thc_table* design, const double* beta, size_t num_beta, thc_link link,
                        thc_scheme scheme, double gamma, uint64_t seed, uint64_t stream, thc_table** out)
{
    return guarded([&] {
        require(design != nullptr && beta != nullptr && out != nullptr, "null argument");
        if (!(gamma > 0.0 && gamma <= 1.0)) {
            thincount::raise(ErrorCode::InvalidParameter, "gamma must lie in (0, 1]");
        }
        thincount::MeanStructure const ms{
            Eigen::Map<Eigen::VectorXd const>(beta, static_cast<Eigen::Index>(num_beta)),
            link == THC_LINK_LOG ? thincount::Link::Log : thincount::Link::Identity};
        thincount::RngSpec const spec{seed, stream};
        thincount::CounterRng count_rng(thincount::substream(spec, 0, 0));
        thincount::CounterRng sample_rng(thincount::substream(spec, 0, 1));
        auto N = thincount::draw_true_counts(design->table, ms, count_rng);
        auto const N_star = thincount::total(N);
        auto const n_star = std::llround(gamma * static_cast<double>(N_star));
        if (n_star < 1) {
            thincount::raise(ErrorCode::EmptyPopulation,
                             "simulated sample is empty (N_* = " + std::to_string(N_star) + ")");
        }
        auto const sample = scheme == THC_SCHEME_WR ? thincount::sample_wr(N, n_star, sample_rng)
                                                    : thincount::sample_wor(N, n_star, sample_rng);
        auto const counts = sample.counts();
        *out = new thc_table{design->table.with_true_counts(std::move(N)),
                             thincount::Counts(counts.begin(), counts.end())};
    });
}

void thc_fit_options_init(thc_fit_options* options)
{
    if (!options) return;
    *options = thc_fit_options{};
    options->likelihood = THC_LIKELIHOOD_WOR_ADJUSTED;
    options->link = THC_LINK_IDENTITY;
    options->gamma = 1.0;
    options->subset_fraction = 1.0;
}

thc_status thc_fit_run(const thc_table* data, const thc_fit_options* options, thc_fit** out)
{
    return guarded([&] {
        require(data != nullptr && options != nullptr && out != nullptr, "null argument");
        require(data->observed.has_value(), "table has no observed counts (column n or a counts file)");
        thincount::CaseTable table = data->table;
        thincount::Counts counts = *data->observed;

        double const f = options->subset_fraction;
        if (!(f > 0.0 && f <= 1.0)) {
            thincount::raise(ErrorCode::InvalidParameter, "subset fraction must lie in (0, 1]");
        }
        if (f < 1.0) {
            if (options->likelihood != THC_LIKELIHOOD_WR_TOUCHARD) {
                thincount::raise(ErrorCode::InvalidArgument, "subset fraction applies to the WR likelihood only");
            }
            auto const K = static_cast<std::size_t>(std::ceil(f * static_cast<double>(table.num_cases())));
            std::vector<std::size_t> rows(K);
            for (std::size_t i = 0; i < K; ++i) rows[i] = i;
            table = table.subset(rows);
            counts.resize(K);
        }

        auto likelihood = thincount::Likelihood::naive();
        switch (options->likelihood) {
        case THC_LIKELIHOOD_NAIVE: break;
        case THC_LIKELIHOOD_WOR_ADJUSTED:
            likelihood = thincount::Likelihood::wor_adjusted(options->gamma);
            break;
        case THC_LIKELIHOOD_WR_TOUCHARD: {
            int degree = options->touchard_degree;
            if (degree <= 0) {
                std::int64_t largest = 0;
                for (auto c : counts) largest = std::max(largest, c);
                degree = static_cast<int>(std::max<std::int64_t>(thincount::kDefaultTouchardDegree, largest));
            }
            auto basis = std::make_shared<thincount::TouchardBasis const>(thincount::build_basis(degree));
            likelihood = thincount::Likelihood::wr_touchard(options->gamma, std::move(basis));
            break;
        }
        default: thincount::raise(ErrorCode::InvalidArgument, "unknown likelihood");
        }

        thincount::FitOptions fit_options;
        if (options->gradient_tolerance > 0.0) fit_options.gradient_tolerance = options->gradient_tolerance;
        if (options->max_iterations > 0) fit_options.max_iterations = options->max_iterations;
        if (options->init) {
            fit_options.init = Eigen::Map<Eigen::VectorXd const>(
                options->init, static_cast<Eigen::Index>(options->init_len));
        }
        auto const link = options->link == THC_LINK_LOG ? thincount::Link::Log : thincount::Link::Identity;
        *out = new thc_fit{thincount::fit(table, counts, likelihood, link, fit_options)};
    });
}

void thc_fit_free(thc_fit* fit)
{
    delete fit;
}

int thc_fit_converged(const thc_fit* fit)
{
    return fit && fit->result.converged ? 1 : 0;
}

size_t thc_fit_num_params(const thc_fit* fit)
{
    return fit ? static_cast<size_t>(fit->result.beta_hat.size()) : 0;
}

thc_status thc_fit_beta(const thc_fit* fit, double* out, size_t len)
{
    return guarded([&] {
        require(fit != nullptr, "null fit");
        copy_vector(fit->result.beta_hat, out, len);
    });
}

thc_status thc_fit_std_errors(const thc_fit* fit, double* out, size_t len)
{
    return guarded([&] {
        require(fit != nullptr, "null fit");
        copy_vector(fit->result.std_errors, out, len);
    });
}

double thc_fit_loglik(const thc_fit* fit)
{
    return fit ? fit->result.loglik : std::nan("");
}

int thc_fit_iterations(const thc_fit* fit)
{
    return fit ? fit->result.iterations : -1;
}

double thc_fit_gradient_norm(const thc_fit* fit)
{
    return fit ? fit->result.gradient_norm : std::nan("");
}

thc_status thc_fit_to_json(const thc_fit* fit, char** out_json)
{
    return guarded([&] {
        require(fit != nullptr && out_json != nullptr, "null argument");
        *out_json = copy_string(thincount::to_json(fit->result).dump(2));
    });
}

thc_status thc_basis_create(int t_max, thc_basis** out)
{
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = new thc_basis{std::make_shared<thincount::TouchardBasis const>(thincount::build_basis(t_max))};
    });
}

void thc_basis_free(thc_basis* basis)
{
    delete basis;
}

int thc_basis_t_max(const thc_basis* basis)
{
    return basis ? basis->basis->t_max() : -1;
}

thc_status thc_basis_log_f(const thc_basis* basis, double x, int t, double* out)
{
    return guarded([&] {
        require(basis != nullptr && out != nullptr, "null argument");
        *out = thincount::eval_f(x, t, *basis->basis);
    });
}

thc_status thc_basis_to_csv(const thc_basis* basis, char** out_csv)
{
    return guarded([&] {
        require(basis != nullptr && out_csv != nullptr, "null argument");
        *out_csv = copy_string(basis->basis->to_csv());
    });
}

thc_status thc_log_poisson_pmf(int64_t t, double lambda, double* out)
{
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = thincount::log_poisson_pmf(t, lambda).value;
    });
}

thc_status thc_log_binomial_pmf(int64_t t, int64_t N, double gamma, double* out)
{
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = thincount::log_binomial_pmf(t, N, gamma).value;
    });
}

thc_status thc_log_multinomial_pmf(const int64_t* n, const double* p, size_t len, int64_t n_star,
                                   double* out)
{
    return guarded([&] {
        require(n != nullptr && p != nullptr && out != nullptr, "null argument");
        *out = thincount::log_multinomial_pmf({n, len}, n_star, {p, len}).value;
    });
}

thc_status thc_log_mvhypergeom_pmf(const int64_t* n, const int64_t* N, size_t len, int64_t n_star,
                                   double* out)
{
    return guarded([&] {
        require(n != nullptr && N != nullptr && out != nullptr, "null argument");
        *out = thincount::log_mvhypergeom_pmf({n, len}, {N, len}, n_star).value;
    });
}

thc_status thc_wor_marginal_pmf(int64_t t, double mu, double gamma, double* out)
{
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = thincount::wor_marginal_pmf(t, mu, gamma).value;
    });
}

thc_status thc_wr_marginal_pmf(const thc_basis* basis, int64_t t, double mu, double gamma, double* out)
{
    return guarded([&] {
        require(basis != nullptr && out != nullptr, "null argument");
        *out = thincount::wr_marginal_pmf(t, mu, gamma, *basis->basis).value;
    });
}

thc_status thc_verify_suite_names(char** out)
{
    return guarded([&] {
        require(out != nullptr, "null argument");
        std::string names;
        for (auto name : thincount::suite_names()) {
            names += name;
            names += '\n';
        }
        *out = copy_string(names);
    });
}

thc_status thc_verify_run(const char* suite, char** out_report, int* failed)
{
    return guarded([&] {
        require(suite != nullptr && out_report != nullptr, "null argument");
        std::vector<std::string_view> suites;
        if (std::string_view(suite) == "all") {
            suites = thincount::suite_names();
        } else {
            suites.push_back(suite);
        }
        std::string report;
        int failures = 0;
        for (auto name : suites) {
            auto const result = thincount::run_suite(name);
            report += thincount::format(result);
            for (auto const& check : result.checks) failures += check.passed ? 0 : 1;
        }
        if (failed) *failed = failures;
        *out_report = copy_string(report);
    });
}

thc_status thc_sweep_run(const char* spec_path, char** out_summary_json)
{
    return guarded([&] {
        require(spec_path != nullptr && out_summary_json != nullptr, "null argument");
        auto const spec = thincount::load_experiment_spec(spec_path);
        auto const report = thincount::run(spec);
        thincount::write_report(report);
        *out_summary_json = copy_string(report.summary_json().dump(2));
    });
}

}  // extern "C"
