#pragma once
// Panels drawn from the generative model itself, with the ground truth kept,
// for sampler validation and acceptance tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csv.hpp"
#include "panel.hpp"
#include "rng.hpp"

namespace pansig {

struct TruthParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    double tau2 = 1.0;
    double p1 = 0.5;
    double v0 = 0.01;
    std::size_t players = 100;          // m
    int seasons_per_player = 5;         // used when `seasons` is empty
    std::vector<int> seasons;           // optional per-player season counts
    enum class Weights { Constant, SampledOpportunities } weights = Weights::Constant;
    long opportunity_min = 100;         // SampledOpportunities range
    long opportunity_max = 600;
    std::uint64_t seed = 1;
    std::string metric_name = "synthetic";
    int first_season = 2000;

    void validate() const {
        if (!(p1 >= 0.0 && p1 <= 1.0)) throw DataError("synth: p1 must be in [0,1]");
        if (!(v0 > 0.0 && v0 < 1.0)) throw DataError("synth: v0 must be in (0,1)");
        if (!(sigma2 > 0.0) || !(tau2 > 0.0)) throw DataError("synth: variances must be > 0");
        if (players == 0) throw DataError("synth: need at least one player");
        if (seasons.empty() && seasons_per_player < 1)
            throw DataError("synth: seasons per player must be >= 1");
        if (!seasons.empty() && seasons.size() != players)
            throw DataError("synth: per-player season list length must equal player count");
        for (int s : seasons)
            if (s < 1) throw DataError("synth: per-player season counts must be >= 1");
        if (weights == Weights::SampledOpportunities &&
            (opportunity_min < 1 || opportunity_max < opportunity_min))
            throw DataError("synth: bad opportunity range");
    }
};

struct SynthPanel {
    MetricPanel panel;
    std::vector<std::uint8_t> true_gamma;  // indexed like panel.player_ids()
    std::vector<double> true_alpha;
};

inline std::string synth_player_id(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "P%06zu", index + 1);
    return buf;
}

// gamma_i ~ Bernoulli(p1); alpha_i ~ N(0, tau2) under the slab or
// N(0, v0*tau2) under the spike; y_ij ~ N(mu + alpha_i, w_ij*sigma2).
// Each player draws from its own substream, so growing m leaves earlier
// players' draws untouched.
inline SynthPanel generate_panel(const TruthParams& t) {
    t.validate();
    const double sigma = std::sqrt(t.sigma2);

    if (t.players > 999999) throw DataError("synth: player ids support at most 999999 players");

    std::vector<std::uint8_t> gamma(t.players);
    std::vector<double> alpha(t.players);
    std::vector<RawObs> obs;
    std::vector<double> noise;            // standard normal per observation
    std::vector<std::size_t> obs_player;  // generation-order player of each obs
    for (std::size_t i = 0; i < t.players; ++i) {
        Rng rng = Rng::stream(t.seed, static_cast<std::uint64_t>(i));
        gamma[i] = rng.bernoulli(t.p1) ? 1 : 0;
        const double sd_i = std::sqrt(gamma[i] ? t.tau2 : t.v0 * t.tau2);
        alpha[i] = rng.normal(0.0, sd_i);
        const int n_seasons = t.seasons.empty() ? t.seasons_per_player : t.seasons[i];
        for (int j = 0; j < n_seasons; ++j) {
            RawObs o;
            o.player_id = synth_player_id(i);
            o.season = t.first_season + j;
            o.opportunity = t.weights == TruthParams::Weights::Constant
                                ? 1.0
                                : static_cast<double>(
                                      rng.uniform_int(t.opportunity_min, t.opportunity_max));
            obs.push_back(std::move(o));
            noise.push_back(rng.normal());
            obs_player.push_back(i);
        }
    }

    // Weights need the panel mean opportunity count, so values are finished
    // after all opportunity draws; the per-player substreams stay intact.
    double n_sum = 0.0;
    for (const auto& o : obs) n_sum += o.opportunity;
    const double n_bar = n_sum / static_cast<double>(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const double w = n_bar / obs[k].opportunity;
        obs[k].weight = w;
        obs[k].value = t.mu + alpha[obs_player[k]] + std::sqrt(w) * sigma * noise[k];
    }

    SynthPanel out{MetricPanel::from_weights(t.metric_name, std::move(obs)), std::move(gamma),
                   std::move(alpha)};
    return out;
}

inline void write_truth_csv(const std::filesystem::path& path, const SynthPanel& s) {
    CsvWriter w(path);
    w.row({"player_id", "true_gamma", "true_alpha"});
    for (std::size_t i = 0; i < s.panel.players(); ++i)
        w.row({s.panel.player_id(i), std::to_string(static_cast<int>(s.true_gamma[i])),
               fmt_double(s.true_alpha[i])});
    w.close();
}

}  // namespace pansig
