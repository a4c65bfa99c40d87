#pragma once
// Posterior summaries per metric: p1_hat, negative entropy, and per-player
// gamma_hat / individual-mean estimates, plus ranked reports.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "sampler.hpp"

namespace pansig {

struct PlayerSummary {
    std::string player_id;
    double gamma_hat = 0.0;  // fraction of draws with gamma_i = 1
    double mean_est = 0.0;   // posterior mean of mu + alpha_i
    double sd_est = 0.0;     // posterior sd of mu + alpha_i
};

struct MetricSummary {
    std::string metric;
    double p1_hat = 0.0;
    double neg_entropy = 0.0;  // in [-log 2, 0]
    double mu_hat = 0.0;
    bool approx_normal = true;
    std::vector<PlayerSummary> players;
};

// x log x with the 0 log 0 = 0 convention (natural log).
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double negative_entropy(std::span<const double> gamma_hat) {
    if (gamma_hat.empty()) throw DataError("negative entropy of an empty gamma_hat vector");
    double s = 0.0;
    for (double g : gamma_hat) s += xlogx(g) + xlogx(1.0 - g);
    return s / static_cast<double>(gamma_hat.size());
}

inline MetricSummary summarize(const PosteriorSamples& samples, bool approx_normal = true) {
    if (samples.draws < 100)
        throw DataError("metric '" + samples.metric + "': need at least 100 retained draws to summarize, have " +
                        std::to_string(samples.draws));
    const std::size_t S = samples.draws;
    const std::size_t m = samples.players();

    MetricSummary out;
    out.metric = samples.metric;
    out.approx_normal = approx_normal;
    out.p1_hat = mean_of(samples.p1);
    out.mu_hat = mean_of(samples.mu);

    std::vector<double> gamma_hat(m, 0.0);
    out.players.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double ones = 0.0;
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            ones += samples.gamma_at(s, i);
            const double x = samples.mu[s] + samples.alpha_at(s, i);
            sum += x;
            sumsq += x * x;
        }
        const double n = static_cast<double>(S);
        const double mean = sum / n;
        // Posterior SD with the S-1 divisor.
        const double var = std::max((sumsq - n * mean * mean) / (n - 1.0), 0.0);
        gamma_hat[i] = ones / n;
        out.players[i] = {samples.player_ids[i], gamma_hat[i], mean, std::sqrt(var)};
    }
    out.neg_entropy = negative_entropy(gamma_hat);
    return out;
}

// Players ranked by estimated individual mean (descending by default; pass
// descending = false for lower-is-better metrics). Ties break by smaller
// posterior sd, then player_id. k beyond m returns all m.
inline std::vector<PlayerSummary> top_players(const MetricSummary& summary, std::size_t k,
                                              bool descending = true) {
    std::vector<PlayerSummary> ranked = summary.players;
    std::sort(ranked.begin(), ranked.end(),
              [descending](const PlayerSummary& a, const PlayerSummary& b) {
                  if (a.mean_est != b.mean_est)
                      return descending ? a.mean_est > b.mean_est : a.mean_est < b.mean_est;
                  if (a.sd_est != b.sd_est) return a.sd_est < b.sd_est;
                  return a.player_id < b.player_id;
              });
    if (k < ranked.size()) ranked.resize(k);
    return ranked;
}

struct HighSignalRect {
    double p1_min = 0.5;
    double neg_entropy_min = -0.35;
};

struct ScatterRow {
    std::string metric;
    double p1_hat = 0.0;
    double neg_entropy = 0.0;
    bool approx_normal = true;
    bool high_signal = false;
};

// One row per metric for the p1_hat vs negative-entropy scatter; the
// high-signal flag marks metrics inside the configurable rectangle.
inline std::vector<ScatterRow> scatter_table(std::span<const MetricSummary> summaries,
                                             const HighSignalRect& rect = {}) {
    if (summaries.empty()) throw DataError("scatter table needs at least one metric summary");
    std::vector<ScatterRow> rows;
    rows.reserve(summaries.size());
    for (const auto& s : summaries) {
        ScatterRow r;
        r.metric = s.metric;
        r.p1_hat = s.p1_hat;
        r.neg_entropy = s.neg_entropy;
        r.approx_normal = s.approx_normal;
        r.high_signal = s.p1_hat >= rect.p1_min && s.neg_entropy >= rect.neg_entropy_min;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace pansig
