#pragma once
// RunConfig: every knob for a batch run in one JSON document, so a run can be
// reproduced from its config file alone. CLI flags override file values.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "samples_io.hpp"
#include "synth.hpp"

#include <nlohmann/json.hpp>

namespace pansig {

inline void to_json(nlohmann::json& j, const TruthParams& t) {
    j = nlohmann::json{
        {"mu", t.mu},
        {"sigma2", t.sigma2},
        {"tau2", t.tau2},
        {"p1", t.p1},
        {"v0", t.v0},
        {"players", t.players},
        {"seasons_per_player", t.seasons_per_player},
        {"weights", t.weights == TruthParams::Weights::Constant ? "constant" : "sampled"},
        {"opportunity_min", t.opportunity_min},
        {"opportunity_max", t.opportunity_max},
        {"metric_name", t.metric_name},
        {"first_season", t.first_season},
    };
    if (!t.seasons.empty()) j["seasons"] = t.seasons;
}

inline void from_json(const nlohmann::json& j, TruthParams& t) {
    t.mu = j.value("mu", t.mu);
    t.sigma2 = j.value("sigma2", t.sigma2);
    t.tau2 = j.value("tau2", t.tau2);
    t.p1 = j.value("p1", t.p1);
    t.v0 = j.value("v0", t.v0);
    t.players = j.value("players", t.players);
    t.seasons_per_player = j.value("seasons_per_player", t.seasons_per_player);
    if (j.contains("seasons")) t.seasons = j.at("seasons").get<std::vector<int>>();
    if (j.contains("weights")) {
        const std::string w = j.at("weights");
        if (w == "constant") t.weights = TruthParams::Weights::Constant;
        else if (w == "sampled") t.weights = TruthParams::Weights::SampledOpportunities;
        else throw DataError("config: unknown synth weight scheme '" + w + "'");
    }
    t.opportunity_min = j.value("opportunity_min", t.opportunity_min);
    t.opportunity_max = j.value("opportunity_max", t.opportunity_max);
    t.metric_name = j.value("metric_name", t.metric_name);
    t.first_season = j.value("first_season", t.first_season);
}

struct RunConfig {
    // Inputs and outputs.
    std::string raw_csv;                  // ingest: one file of raw counting rows
    std::string metric_dir;               // ingest alternative: per-metric panel files
    std::string definitions;              // optional metric definitions JSON
    std::string out_dir = "out";
    std::vector<std::string> metrics;     // selection; empty = all with usable data
    std::uint64_t seed = 1;               // master seed; per-metric seeds derive from it
    int jobs = 1;

    // Normality screen.
    double skew_threshold = 2.0;
    double zero_threshold = 0.5;

    // Model and chain schedule.
    Hyperparams hyper;
    ChainConfig chain;

    // Reports.
    double rect_p1 = 0.5;
    double rect_neg_entropy = -0.35;
    int top_k = 5;
    bool rank_ascending = false;

    // Lasso.
    int lasso_grid = 101;
    int folds = 5;
    int repeats = 10;

    // PCA.
    int pca_reps = 500;
    double pca_quantile = 0.95;
    std::vector<std::string> pca_sets = {"all"};  // all | high | rest

    // Synth.
    TruthParams truth;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{
        {"raw_csv", c.raw_csv},
        {"metric_dir", c.metric_dir},
        {"definitions", c.definitions},
        {"out_dir", c.out_dir},
        {"metrics", c.metrics},
        {"seed", c.seed},
        {"jobs", c.jobs},
        {"skew_threshold", c.skew_threshold},
        {"zero_threshold", c.zero_threshold},
        {"hyperparams", c.hyper},
        {"chain", c.chain},
        {"rect_p1", c.rect_p1},
        {"rect_neg_entropy", c.rect_neg_entropy},
        {"top_k", c.top_k},
        {"rank_ascending", c.rank_ascending},
        {"lasso_grid", c.lasso_grid},
        {"folds", c.folds},
        {"repeats", c.repeats},
        {"pca_reps", c.pca_reps},
        {"pca_quantile", c.pca_quantile},
        {"pca_sets", c.pca_sets},
        {"synth", c.truth},
    };
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    c.raw_csv = j.value("raw_csv", c.raw_csv);
    c.metric_dir = j.value("metric_dir", c.metric_dir);
    c.definitions = j.value("definitions", c.definitions);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    c.skew_threshold = j.value("skew_threshold", c.skew_threshold);
    c.zero_threshold = j.value("zero_threshold", c.zero_threshold);
    if (j.contains("hyperparams")) c.hyper = j.at("hyperparams").get<Hyperparams>();
    if (j.contains("chain")) c.chain = j.at("chain").get<ChainConfig>();
    c.rect_p1 = j.value("rect_p1", c.rect_p1);
    c.rect_neg_entropy = j.value("rect_neg_entropy", c.rect_neg_entropy);
    c.top_k = j.value("top_k", c.top_k);
    c.rank_ascending = j.value("rank_ascending", c.rank_ascending);
    c.lasso_grid = j.value("lasso_grid", c.lasso_grid);
    c.folds = j.value("folds", c.folds);
    c.repeats = j.value("repeats", c.repeats);
    c.pca_reps = j.value("pca_reps", c.pca_reps);
    c.pca_quantile = j.value("pca_quantile", c.pca_quantile);
    if (j.contains("pca_sets")) c.pca_sets = j.at("pca_sets").get<std::vector<std::string>>();
    if (j.contains("synth")) c.truth = j.at("synth").get<TruthParams>();
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    return j.get<RunConfig>();
}

inline void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write config file: " + path.string());
    out << nlohmann::json(cfg).dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace pansig
