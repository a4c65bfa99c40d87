// pansig command line: ingest | synth | fit | report | lasso | pca.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pansig/cli.hpp"

namespace {

using pansig::RunConfig;

// --config is applied before the full parse so flags override file values.
std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc - 1; ++i) {
        const std::string a = argv[i];
        if (a == "--config" || a == "-c") return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

void add_global_options(CLI::App& app, RunConfig& cfg) {
    app.add_option("-c,--config", "config file (JSON); flags override file values")
        ->expected(1);
    app.add_option("--seed", cfg.seed, "master seed; per-metric seeds derive from it");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--jobs", cfg.jobs, "parallel chains for fit");
    app.add_option("--metrics", cfg.metrics, "metric selection (default: all)")
        ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    const std::string config_path = find_config_path(argc, argv);
    try {
        if (!config_path.empty()) cfg = pansig::load_config(config_path);
    } catch (const pansig::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"Within-player reliability of panel metrics: spike-and-slab Gibbs sampler "
                 "with Lasso and PCA validation arms"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags remain valid after a subcommand
    add_global_options(app, cfg);

    CLI::App* ingest = app.add_subcommand("ingest", "parse raw CSVs into per-metric panels");
    ingest->add_option("--raw", cfg.raw_csv, "raw counting-stat CSV");
    ingest->add_option("--metric-dir", cfg.metric_dir, "directory of per-metric CSVs");
    ingest->add_option("--definitions", cfg.definitions, "metric definitions JSON override");
    ingest->add_option("--skew-threshold", cfg.skew_threshold, "|skewness| cutoff");
    ingest->add_option("--zero-threshold", cfg.zero_threshold, "zero-fraction cutoff");

    CLI::App* synth = app.add_subcommand("synth", "generate a panel from the model");
    synth->add_option("--name", cfg.truth.metric_name, "metric name for the panel");
    synth->add_option("--players", cfg.truth.players, "player count m");
    synth->add_option("--seasons", cfg.truth.seasons_per_player, "seasons per player");
    synth->add_option("--mu", cfg.truth.mu, "population mean");
    synth->add_option("--sigma2", cfg.truth.sigma2, "observation variance");
    synth->add_option("--tau2", cfg.truth.tau2, "slab variance");
    synth->add_option("--p1", cfg.truth.p1, "mixing proportion");
    synth->add_option("--v0", cfg.truth.v0, "spike variance ratio");
    std::string weight_scheme;
    synth->add_option("--weights", weight_scheme, "constant|sampled opportunity weights");

    CLI::App* fit = app.add_subcommand("fit", "run the Gibbs sampler per metric");
    fit->add_option("--iterations", cfg.chain.total, "total iterations");
    fit->add_option("--burnin", cfg.chain.burnin, "burn-in iterations");
    fit->add_option("--thin", cfg.chain.thin, "thinning stride");
    std::string tau_prior;
    fit->add_option("--tau-prior", tau_prior, "inverse_gamma|uniform_on_tau");
    fit->add_option("--K2", cfg.hyper.K2, "prior variance of mu");
    fit->add_option("--alpha0", cfg.hyper.alpha0, "sigma2 prior shape");
    fit->add_option("--beta0", cfg.hyper.beta0, "sigma2 prior rate");
    fit->add_option("--psi0", cfg.hyper.psi0, "tau2 prior shape");
    fit->add_option("--delta0", cfg.hyper.delta0, "tau2 prior rate");
    fit->add_option("--v0", cfg.hyper.v0, "spike variance ratio");

    CLI::App* report = app.add_subcommand("report", "summaries, tables, and scatter plots");
    report->add_option("--top-k", cfg.top_k, "players per top table");
    report->add_flag("--ascending", cfg.rank_ascending, "rank lower-is-better metrics");
    report->add_option("--rect-p1", cfg.rect_p1, "high-signal rectangle: min p1_hat");
    report->add_option("--rect-neg-entropy", cfg.rect_neg_entropy,
                       "high-signal rectangle: min negative entropy");

    CLI::App* lasso = app.add_subcommand("lasso", "L1 validation arm with repeated CV");
    lasso->add_option("--grid", cfg.lasso_grid, "fraction grid size");
    lasso->add_option("--folds", cfg.folds, "CV folds");
    lasso->add_option("--repeats", cfg.repeats, "CV repeats");

    CLI::App* pca = app.add_subcommand("pca", "PCA with permutation and bootstrap bands");
    pca->add_option("--reps", cfg.pca_reps, "band repetitions");
    pca->add_option("--quantile", cfg.pca_quantile, "null band quantile");
    pca->add_option("--sets", cfg.pca_sets, "metric sets: all,high,rest")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!weight_scheme.empty()) {
            if (weight_scheme == "constant")
                cfg.truth.weights = pansig::TruthParams::Weights::Constant;
            else if (weight_scheme == "sampled")
                cfg.truth.weights = pansig::TruthParams::Weights::SampledOpportunities;
            else
                throw pansig::DataError("unknown weight scheme '" + weight_scheme + "'");
        }
        if (!tau_prior.empty()) cfg.hyper.tau_prior = pansig::tau_prior_from_name(tau_prior);

        if (ingest->parsed()) return pansig::cli::cmd_ingest(cfg);
        if (synth->parsed()) return pansig::cli::cmd_synth(cfg);
        if (fit->parsed()) return pansig::cli::cmd_fit(cfg);
        if (report->parsed()) return pansig::cli::cmd_report(cfg);
        if (lasso->parsed()) return pansig::cli::cmd_lasso(cfg);
        if (pca->parsed()) return pansig::cli::cmd_pca(cfg);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const pansig::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const pansig::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
