/*
 * thincount C API.
 *
 * Every function that can fail returns a thc_status; on failure the message
 * is available from thc_last_error_message() on the same thread until the
 * next failing call. Handles are opaque and owned by the caller, who
 * releases them with the matching *_free function. Strings returned through
 * char** out-parameters are heap-allocated and released with
 * thc_string_free().
 */
#ifndef THINCOUNT_THINCOUNT_H
#define THINCOUNT_THINCOUNT_H

#include <stddef.h>
#include <stdint.h>

#if defined(THINCOUNT_BUILDING_LIBRARY)
#define THC_API __attribute__((visibility("default")))
#else
#define THC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum thc_status {
    THC_OK = 0,
    THC_E_INVALID_ARGUMENT = 1,
    THC_E_DIMENSION_MISMATCH = 2,
    THC_E_NON_POSITIVE_MEAN = 3,
    THC_E_INVALID_PARAMETER = 4,
    THC_E_TOTAL_MISMATCH = 5,
    THC_E_INVALID_PROBABILITY_VECTOR = 6,
    THC_E_SUPPORT_VIOLATION = 7,
    THC_E_EMPTY_POPULATION = 8,
    THC_E_SAMPLE_EXCEEDS_POPULATION = 9,
    THC_E_DEGREE_EXCEEDED = 10,
    THC_E_NON_CONVERGENCE = 11,
    THC_E_SINGULAR_INFORMATION = 12,
    THC_E_INFEASIBLE_START = 13,
    THC_E_SPEC_VALIDATION = 14,
    THC_E_PARSE = 15,
    THC_E_IO = 16,
    THC_E_INTERNAL = 99
} thc_status;

typedef enum thc_link { THC_LINK_IDENTITY = 0, THC_LINK_LOG = 1 } thc_link;
typedef enum thc_scheme { THC_SCHEME_WR = 0, THC_SCHEME_WOR = 1 } thc_scheme;
typedef enum thc_likelihood {
    THC_LIKELIHOOD_NAIVE = 0,
    THC_LIKELIHOOD_WOR_ADJUSTED = 1,
    THC_LIKELIHOOD_WR_TOUCHARD = 2
} thc_likelihood;

/* Case table: features, optional true counts N_j, optional observed n_j. */
typedef struct thc_table thc_table;
typedef struct thc_fit thc_fit;
typedef struct thc_basis thc_basis;

THC_API const char* thc_version(void);
THC_API const char* thc_status_name(thc_status status);
THC_API const char* thc_last_error_message(void);
THC_API void thc_string_free(char* s);

/* ---- case tables ---------------------------------------------------- */

/* features is row-major num_cases x num_features; true_counts may be NULL. */
THC_API thc_status thc_table_create(size_t num_cases, size_t num_features, const double* features,
                                    const int64_t* true_counts, thc_table** out);
/* Reads CSV (x1..xd[,N][,n]) or JSON (by .json extension). */
THC_API thc_status thc_table_load(const char* path, thc_table** out);
/* Replaces the observed counts with the `n` column of a counts CSV. */
THC_API thc_status thc_table_load_counts(thc_table* table, const char* counts_path);
THC_API thc_status thc_table_set_counts(thc_table* table, const int64_t* counts, size_t len);
THC_API void thc_table_free(thc_table* table);

THC_API size_t thc_table_num_cases(const thc_table* table);
THC_API size_t thc_table_num_features(const thc_table* table);
THC_API int thc_table_has_true_counts(const thc_table* table);
THC_API int thc_table_has_counts(const thc_table* table);
THC_API thc_status thc_table_true_counts(const thc_table* table, int64_t* out, size_t len);
THC_API thc_status thc_table_counts(const thc_table* table, int64_t* out, size_t len);
/* Sample and population totals; the population total needs true counts. */
THC_API thc_status thc_table_totals(const thc_table* table, int64_t* n_star, int64_t* N_star);

/* Writes x1..xd[,N][,n]. */
THC_API thc_status thc_table_save_csv(const thc_table* table, const char* path);
/* Writes the observed counts as a one-column `n` CSV. */
THC_API thc_status thc_table_save_counts_csv(const thc_table* table, const char* path);

/*
 * Draws N_j ~ Poisson(mu_j) from the design's features and beta, then
 * samples n_* = round(gamma N_*) subjects under the scheme. The new table
 * carries both count vectors.
 */
THC_API thc_status thc_simulate(const thc_table* design, const double* beta, size_t num_beta,
                                thc_link link, thc_scheme scheme, double gamma, uint64_t seed,
                                uint64_t stream, thc_table** out);

/* ---- estimation ----------------------------------------------------- */

typedef struct thc_fit_options {
    thc_likelihood likelihood;
    thc_link link;
    double gamma;            /* ignored by THC_LIKELIHOOD_NAIVE */
    const double* init;      /* NULL for the default start */
    size_t init_len;
    double subset_fraction;  /* WR only: fit on the first ceil(f J) cases; 1 = all */
    int touchard_degree;     /* 0 picks max(64, largest count) */
    double gradient_tolerance; /* 0 picks 1e-8 */
    int max_iterations;      /* 0 picks 200 */
} thc_fit_options;

THC_API void thc_fit_options_init(thc_fit_options* options);

/* Fits the table's observed counts. A run that does not converge still
 * produces a handle, flagged through thc_fit_converged(). */
THC_API thc_status thc_fit_run(const thc_table* data, const thc_fit_options* options, thc_fit** out);
THC_API void thc_fit_free(thc_fit* fit);
THC_API int thc_fit_converged(const thc_fit* fit);
THC_API size_t thc_fit_num_params(const thc_fit* fit);
THC_API thc_status thc_fit_beta(const thc_fit* fit, double* out, size_t len);
THC_API thc_status thc_fit_std_errors(const thc_fit* fit, double* out, size_t len);
THC_API double thc_fit_loglik(const thc_fit* fit);
THC_API int thc_fit_iterations(const thc_fit* fit);
THC_API double thc_fit_gradient_norm(const thc_fit* fit);
THC_API thc_status thc_fit_to_json(const thc_fit* fit, char** out_json);

/* ---- Touchard basis ------------------------------------------------- */

THC_API thc_status thc_basis_create(int t_max, thc_basis** out);
THC_API void thc_basis_free(thc_basis* basis);
THC_API int thc_basis_t_max(const thc_basis* basis);
/* ln f(x, t) = ln g_t(x) + x. */
THC_API thc_status thc_basis_log_f(const thc_basis* basis, double x, int t, double* out);
THC_API thc_status thc_basis_to_csv(const thc_basis* basis, char** out_csv);

/* ---- probabilities -------------------------------------------------- */

THC_API thc_status thc_log_poisson_pmf(int64_t t, double lambda, double* out);
THC_API thc_status thc_log_binomial_pmf(int64_t t, int64_t N, double gamma, double* out);
THC_API thc_status thc_log_multinomial_pmf(const int64_t* n, const double* p, size_t len,
                                           int64_t n_star, double* out);
THC_API thc_status thc_log_mvhypergeom_pmf(const int64_t* n, const int64_t* N, size_t len,
                                           int64_t n_star, double* out);
THC_API thc_status thc_wor_marginal_pmf(int64_t t, double mu, double gamma, double* out);
THC_API thc_status thc_wr_marginal_pmf(const thc_basis* basis, int64_t t, double mu,
                                       double gamma, double* out);

/* ---- verification and experiments ----------------------------------- */

/* Newline-separated suite names. */
THC_API thc_status thc_verify_suite_names(char** out);
/* Runs one suite, or every suite for "all". *failed receives the number of
 * failing checks; the formatted report is returned in *out_report. */
THC_API thc_status thc_verify_run(const char* suite, char** out_report, int* failed);
/* Runs an experiment spec file and writes its CSV + JSON report; returns
 * the summary JSON. */
THC_API thc_status thc_sweep_run(const char* spec_path, char** out_summary_json);

#ifdef __cplusplus
}
#endif

#endif /* THINCOUNT_THINCOUNT_H */
