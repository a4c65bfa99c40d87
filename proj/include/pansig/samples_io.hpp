#pragma once
// PosteriorSamples on disk: a columnar CSV (one row per retained draw, alpha
// and gamma in wide columns keyed by player_id) plus a JSON metadata sidecar.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "sampler.hpp"

#include <nlohmann/json.hpp>

namespace pansig {

inline const char* tau_prior_name(TauPrior p) {
    return p == TauPrior::InverseGamma ? "inverse_gamma" : "uniform_on_tau";
}

inline TauPrior tau_prior_from_name(const std::string& s) {
    if (s == "inverse_gamma") return TauPrior::InverseGamma;
    if (s == "uniform_on_tau") return TauPrior::UniformOnTau;
    throw DataError("unknown tau prior '" + s + "'");
}

inline const char* init_scheme_name(InitScheme s) {
    return s == InitScheme::DataMoments ? "data_moments" : "dispersed";
}

inline InitScheme init_scheme_from_name(const std::string& s) {
    if (s == "data_moments") return InitScheme::DataMoments;
    if (s == "dispersed") return InitScheme::Dispersed;
    throw DataError("unknown init scheme '" + s + "'");
}

inline void to_json(nlohmann::json& j, const Hyperparams& h) {
    j = nlohmann::json{{"K2", h.K2},       {"alpha0", h.alpha0}, {"beta0", h.beta0},
                       {"psi0", h.psi0},   {"delta0", h.delta0}, {"v0", h.v0},
                       {"tau_prior", tau_prior_name(h.tau_prior)}};
}

inline void from_json(const nlohmann::json& j, Hyperparams& h) {
    h.K2 = j.value("K2", h.K2);
    h.alpha0 = j.value("alpha0", h.alpha0);
    h.beta0 = j.value("beta0", h.beta0);
    h.psi0 = j.value("psi0", h.psi0);
    h.delta0 = j.value("delta0", h.delta0);
    h.v0 = j.value("v0", h.v0);
    if (j.contains("tau_prior")) h.tau_prior = tau_prior_from_name(j.at("tau_prior"));
}

inline void to_json(nlohmann::json& j, const ChainConfig& c) {
    j = nlohmann::json{{"total", c.total},
                       {"burnin", c.burnin},
                       {"thin", c.thin},
                       {"seed", c.seed},
                       {"init", init_scheme_name(c.init)}};
}

inline void from_json(const nlohmann::json& j, ChainConfig& c) {
    c.total = j.value("total", c.total);
    c.burnin = j.value("burnin", c.burnin);
    c.thin = j.value("thin", c.thin);
    c.seed = j.value("seed", c.seed);
    if (j.contains("init")) c.init = init_scheme_from_name(j.at("init"));
}

inline void write_samples(const PosteriorSamples& s, const std::filesystem::path& csv_path,
                          const std::filesystem::path& meta_path) {
    CsvWriter w(csv_path);
    std::vector<std::string> header = {"draw", "mu", "sigma2", "tau2", "p1"};
    for (const auto& id : s.player_ids) header.push_back("alpha:" + id);
    for (const auto& id : s.player_ids) header.push_back("gamma:" + id);
    w.row(header);
    const std::size_t m = s.players();
    std::vector<std::string> row;
    for (std::size_t k = 0; k < s.draws; ++k) {
        row.clear();
        row.push_back(std::to_string(k + 1));
        row.push_back(fmt_double(s.mu[k]));
        row.push_back(fmt_double(s.sigma2[k]));
        row.push_back(fmt_double(s.tau2[k]));
        row.push_back(fmt_double(s.p1[k]));
        for (std::size_t i = 0; i < m; ++i) row.push_back(fmt_double(s.alpha_at(k, i)));
        for (std::size_t i = 0; i < m; ++i)
            row.push_back(std::to_string(static_cast<int>(s.gamma_at(k, i))));
        w.row(row);
    }
    w.close();

    nlohmann::json meta;
    meta["metric"] = s.metric;
    meta["players"] = s.player_ids;
    meta["draws"] = s.draws;
    meta["panel_hash"] = s.panel_hash;
    meta["hyperparams"] = s.hyper;
    meta["chain"] = s.config;
    std::ofstream out(meta_path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + meta_path.string());
    out << meta.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + meta_path.string());
}

inline PosteriorSamples read_samples(const std::filesystem::path& csv_path,
                                     const std::filesystem::path& meta_path) {
    std::ifstream min(meta_path);
    if (!min) throw DataError("cannot open file: " + meta_path.string());
    nlohmann::json meta;
    try {
        min >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": invalid JSON: " + e.what());
    }

    PosteriorSamples s;
    s.metric = meta.at("metric").get<std::string>();
    s.player_ids = meta.at("players").get<std::vector<std::string>>();
    s.panel_hash = meta.value("panel_hash", 0ULL);
    if (meta.contains("hyperparams")) s.hyper = meta.at("hyperparams").get<Hyperparams>();
    if (meta.contains("chain")) s.config = meta.at("chain").get<ChainConfig>();

    const CsvTable t = read_csv_file(csv_path);
    const std::size_t m = s.player_ids.size();
    const int c_mu = t.require_col("mu");
    const int c_sigma2 = t.require_col("sigma2");
    const int c_tau2 = t.require_col("tau2");
    const int c_p1 = t.require_col("p1");
    std::vector<int> c_alpha(m), c_gamma(m);
    for (std::size_t i = 0; i < m; ++i) {
        c_alpha[i] = t.require_col("alpha:" + s.player_ids[i]);
        c_gamma[i] = t.require_col("gamma:" + s.player_ids[i]);
    }
    s.draws = t.rows.size();
    s.mu.reserve(s.draws);
    s.sigma2.reserve(s.draws);
    s.tau2.reserve(s.draws);
    s.p1.reserve(s.draws);
    s.alpha.reserve(s.draws * m);
    s.gamma.reserve(s.draws * m);
    const auto num = [&](const std::vector<std::string>& row, int c) {
        return std::stod(row[static_cast<std::size_t>(c)]);
    };
    for (const auto& row : t.rows) {
        s.mu.push_back(num(row, c_mu));
        s.sigma2.push_back(num(row, c_sigma2));
        s.tau2.push_back(num(row, c_tau2));
        s.p1.push_back(num(row, c_p1));
        for (std::size_t i = 0; i < m; ++i) s.alpha.push_back(num(row, c_alpha[i]));
        for (std::size_t i = 0; i < m; ++i)
            s.gamma.push_back(static_cast<std::uint8_t>(num(row, c_gamma[i]) != 0.0));
    }
    return s;
}

}  // namespace pansig
