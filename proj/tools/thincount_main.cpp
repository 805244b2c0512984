// Command-line front end. Talks to the library only through the C API.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thincount/thincount.h"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

void check(thc_status status)
{
    if (status != THC_OK) {
        throw ApiError(std::string(thc_status_name(status)) + ": " + thc_last_error_message());
    }
}

struct TableDeleter
{
    void operator()(thc_table* t) const { thc_table_free(t); }
};
struct FitDeleter
{
    void operator()(thc_fit* f) const { thc_fit_free(f); }
};
struct BasisDeleter
{
    void operator()(thc_basis* b) const { thc_basis_free(b); }
};
using TablePtr = std::unique_ptr<thc_table, TableDeleter>;
using FitPtr = std::unique_ptr<thc_fit, FitDeleter>;
using BasisPtr = std::unique_ptr<thc_basis, BasisDeleter>;

// Takes ownership of a library-allocated string.
std::string take(char* s)
{
    std::string out(s ? s : "");
    thc_string_free(s);
    return out;
}

TablePtr load_table(std::string const& path)
{
    thc_table* raw = nullptr;
    check(thc_table_load(path.c_str(), &raw));
    return TablePtr(raw);
}

thc_link parse_link(std::string const& s)
{
    if (s == "identity") return THC_LINK_IDENTITY;
    if (s == "log") return THC_LINK_LOG;
    throw UsageError("unknown link '" + s + "' (expected identity or log)");
}

thc_scheme parse_scheme(std::string const& s)
{
    if (s == "wr") return THC_SCHEME_WR;
    if (s == "wor") return THC_SCHEME_WOR;
    throw UsageError("unknown scheme '" + s + "' (expected wr or wor)");
}

thc_likelihood parse_likelihood(std::string const& s)
{
    if (s == "naive") return THC_LIKELIHOOD_NAIVE;
    if (s == "wor-adjusted" || s == "wor") return THC_LIKELIHOOD_WOR_ADJUSTED;
    if (s == "wr-touchard" || s == "wr") return THC_LIKELIHOOD_WR_TOUCHARD;
    throw UsageError("unknown likelihood '" + s + "'");
}

struct SimulateArgs
{
    std::string design;
    std::size_t cases = 0;
    std::vector<double> beta;
    std::string link = "identity";
    std::string scheme = "wor";
    double gamma = 0.25;
    std::uint64_t seed = 20240601;
    std::uint64_t stream = 0;
    std::string out;
    std::string counts_out;
};

int run_simulate(SimulateArgs const& a)
{
    if (a.design.empty() == (a.cases == 0)) {
        throw UsageError("give exactly one of --design or --cases");
    }
    TablePtr design;
    if (!a.design.empty()) {
        design = load_table(a.design);
    } else {
        std::vector<double> ones(a.cases, 1.0);
        thc_table* raw = nullptr;
        check(thc_table_create(a.cases, 1, ones.data(), nullptr, &raw));
        design.reset(raw);
    }
    thc_table* raw = nullptr;
    check(thc_simulate(design.get(), a.beta.data(), a.beta.size(), parse_link(a.link), parse_scheme(a.scheme),
                       a.gamma, a.seed, a.stream, &raw));
    TablePtr sim(raw);
    check(thc_table_save_csv(sim.get(), a.out.c_str()));
    if (!a.counts_out.empty()) check(thc_table_save_counts_csv(sim.get(), a.counts_out.c_str()));

    std::int64_t n_star = 0;
    std::int64_t N_star = 0;
    check(thc_table_totals(sim.get(), &n_star, &N_star));
    std::cerr << "simulated " << thc_table_num_cases(sim.get()) << " cases, N_* = " << N_star
              << ", n_* = " << n_star << "\n";
    return 0;
}

struct FitArgs
{
    std::string data;
    std::string scheme = "wor";
    std::string likelihood;
    std::optional<double> gamma;
    std::string link = "identity";
    std::string counts;
    std::vector<double> init;
    double subset_fraction = 1.0;
    int touchard_degree = 0;
    int max_iterations = 0;
};

int run_fit(FitArgs const& a)
{
    auto table = load_table(a.data);
    if (!a.counts.empty()) check(thc_table_load_counts(table.get(), a.counts.c_str()));
    if (!thc_table_has_counts(table.get())) {
        throw UsageError("no observed counts: add an n column or pass --counts");
    }

    thc_fit_options opts;
    thc_fit_options_init(&opts);
    opts.likelihood = a.likelihood.empty()
                          ? (parse_scheme(a.scheme) == THC_SCHEME_WR ? THC_LIKELIHOOD_WR_TOUCHARD
                                                                     : THC_LIKELIHOOD_WOR_ADJUSTED)
                          : parse_likelihood(a.likelihood);
    opts.link = parse_link(a.link);
    if (a.gamma) {
        opts.gamma = *a.gamma;
    } else if (opts.likelihood != THC_LIKELIHOOD_NAIVE) {
        if (!thc_table_has_true_counts(table.get())) {
            throw UsageError("--gamma is required when the data has no N column");
        }
        std::int64_t n_star = 0;
        std::int64_t N_star = 0;
        check(thc_table_totals(table.get(), &n_star, &N_star));
        if (N_star <= 0) throw ApiError("EmptyPopulation: total population is zero");
        opts.gamma = static_cast<double>(n_star) / static_cast<double>(N_star);
    }
    if (!a.init.empty()) {
        opts.init = a.init.data();
        opts.init_len = a.init.size();
    }
    opts.subset_fraction = a.subset_fraction;
    opts.touchard_degree = a.touchard_degree;
    opts.max_iterations = a.max_iterations;

    thc_fit* raw = nullptr;
    check(thc_fit_run(table.get(), &opts, &raw));
    FitPtr fit(raw);
    char* json = nullptr;
    check(thc_fit_to_json(fit.get(), &json));
    std::cout << take(json) << "\n";
    if (!thc_fit_converged(fit.get())) {
        std::cerr << "error: NonConvergence: Newton iterations stopped with gradient norm "
                  << thc_fit_gradient_norm(fit.get()) << "\n";
        return kExitData;
    }
    return 0;
}

int run_verify(std::string const& suite, bool list)
{
    if (list) {
        char* names = nullptr;
        check(thc_verify_suite_names(&names));
        std::cout << take(names);
        return 0;
    }
    if (suite.empty()) throw UsageError("name a suite, 'all', or pass --list");
    char* report = nullptr;
    int failed = 0;
    check(thc_verify_run(suite.c_str(), &report, &failed));
    std::cout << take(report);
    return failed == 0 ? 0 : kExitData;
}

int run_touchard(int t_max, std::string const& out)
{
    thc_basis* raw = nullptr;
    check(thc_basis_create(t_max, &raw));
    BasisPtr basis(raw);
    char* csv = nullptr;
    check(thc_basis_to_csv(basis.get(), &csv));
    auto const text = take(csv);
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(out);
        if (!file) throw ApiError("IoError: cannot write '" + out + "'");
        file << text;
    }
    return 0;
}

int run_sweep(std::string const& spec)
{
    char* summary = nullptr;
    check(thc_sweep_run(spec.c_str(), &summary));
    std::cout << take(summary) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bias-corrected Poisson regression for partially observed counts"};
    app.set_version_flag("--version", std::string(thc_version()));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Draw true counts and a sample, write them as CSV");
    simulate->add_option("--design", sim.design, "Case CSV with columns x1..xd");
    simulate->add_option("--cases", sim.cases, "Intercept-only design with this many cases");
    simulate->add_option("--beta", sim.beta, "Coefficients (comma separated)")->required()->delimiter(',');
    simulate->add_option("--link", sim.link, "identity or log")->capture_default_str();
    simulate->add_option("--scheme", sim.scheme, "wr or wor")->capture_default_str();
    simulate->add_option("--gamma", sim.gamma, "Sampling fraction")->capture_default_str();
    simulate->add_option("--seed", sim.seed)->capture_default_str();
    simulate->add_option("--stream", sim.stream)->capture_default_str();
    simulate->add_option("--out", sim.out, "Output case CSV (x1..xd,N,n)")->required();
    simulate->add_option("--counts-out", sim.counts_out, "Also write the sampled counts (column n)");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit a regression and print the result as JSON");
    fit->add_option("data", fa.data, "Case CSV or JSON")->required();
    fit->add_option("--scheme", fa.scheme, "wr or wor; picks the default likelihood")->capture_default_str();
    fit->add_option("--likelihood", fa.likelihood, "naive, wor-adjusted or wr-touchard");
    fit->add_option("--gamma", fa.gamma, "Sampling fraction; defaults to n_*/N_* from the data");
    fit->add_option("--link", fa.link, "identity or log")->capture_default_str();
    fit->add_option("--counts", fa.counts, "Counts CSV with column n");
    fit->add_option("--init", fa.init, "Starting coefficients (comma separated)")->delimiter(',');
    fit->add_option("--subset-fraction", fa.subset_fraction, "WR: fit on the first ceil(f J) cases")
        ->capture_default_str();
    fit->add_option("--touchard-degree", fa.touchard_degree, "Basis size for the WR likelihood");
    fit->add_option("--max-iterations", fa.max_iterations);

    std::string suite;
    bool list = false;
    auto* verify = app.add_subcommand("verify", "Run a built-in check suite");
    verify->add_option("suite", suite, "Suite name or 'all'");
    verify->add_flag("--list", list, "List suite names");

    int t_max = 64;
    std::string touchard_out;
    auto* touchard = app.add_subcommand("touchard", "Dump the polynomial coefficient table as CSV");
    touchard->add_option("--tmax", t_max)->capture_default_str();
    touchard->add_option("--out", touchard_out);

    std::string spec;
    auto* sweep = app.add_subcommand("sweep", "Run an experiment spec and write its report");
    sweep->add_option("spec", spec, "Experiment spec JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*fit) return run_fit(fa);
        if (*verify) return run_verify(suite, list);
        if (*touchard) return run_touchard(t_max, touchard_out);
        if (*sweep) return run_sweep(spec);
    } catch (UsageError const& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
