#pragma once
// The six-step Gibbs sampler for the weighted spike-and-slab random-effects
// model
//
//   y_ij ~ Normal(mu + alpha_i, w_ij * sigma2)
//   alpha_i ~ Normal(0, tau2)       if gamma_i = 1
//   alpha_i ~ Normal(0, v0 * tau2)  if gamma_i = 0
//   mu ~ Normal(0, K2), sigma2 ~ InvGamma(alpha0, beta0),
//   tau2 ~ InvGamma(psi0, delta0) or p(tau2) propto 1/tau, p1 ~ Uniform(0,1).
//
// All full conditionals are conjugate. Each sweep samples, in order:
// mu, alpha, sigma2, tau2, gamma, p1.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "panel.hpp"
#include "rng.hpp"

namespace pansig {

enum class TauPrior { InverseGamma, UniformOnTau };
enum class InitScheme { DataMoments, Dispersed };

struct Hyperparams {
    double K2 = 10000.0;      // prior variance of mu
    double alpha0 = 0.01;     // sigma2 ~ InvGamma(alpha0, beta0)
    double beta0 = 0.01;
    double psi0 = 0.01;       // tau2 ~ InvGamma(psi0, delta0)
    double delta0 = 0.01;
    double v0 = 0.01;         // spike variance ratio
    TauPrior tau_prior = TauPrior::InverseGamma;

    void validate() const {
        if (!(K2 > 0.0 && alpha0 > 0.0 && beta0 > 0.0 && psi0 > 0.0 && delta0 > 0.0))
            throw DataError("hyperparams must all be positive");
        if (!(v0 > 0.0 && v0 < 1.0)) throw DataError("v0 must be in (0,1)");
    }
};

struct ChainConfig {
    long total = 60000;
    long burnin = 10000;
    long thin = 50;
    std::uint64_t seed = 1;
    InitScheme init = InitScheme::DataMoments;

    void validate() const {
        if (total < 1) throw DataError("chain: total iterations must be >= 1");
        if (burnin < 0 || burnin >= total) throw DataError("chain: need 0 <= burn-in < total");
        if (thin < 1) throw DataError("chain: thin must be >= 1");
    }

    long retained() const { return (total - burnin) / thin; }
};

struct GibbsState {
    double mu = 0.0;
    double sigma2 = 1.0;
    double tau2 = 1.0;
    double p1 = 0.5;
    std::vector<double> alpha;
    std::vector<std::uint8_t> gamma;
};

// Panel sums that the conditionals reuse every sweep.
struct PanelStats {
    std::size_t m = 0;
    std::size_t N = 0;
    std::vector<double> sum_inv_w;     // per player: sum_j 1/w_ij
    std::vector<double> sum_y_over_w;  // per player: sum_j y_ij/w_ij
    double total_inv_w = 0.0;
    double total_y_over_w = 0.0;
    // Flat per-observation arrays for the sigma2 residual pass.
    std::vector<std::uint32_t> obs_player;
    std::vector<double> obs_y;
    std::vector<double> obs_inv_w;

    explicit PanelStats(const MetricPanel& panel)
        : m(panel.players()),
          N(panel.size()),
          sum_inv_w(panel.players(), 0.0),
          sum_y_over_w(panel.players(), 0.0) {
        obs_player.reserve(N);
        obs_y.reserve(N);
        obs_inv_w.reserve(N);
        for (const auto& o : panel.observations()) {
            const double iw = 1.0 / o.weight;
            sum_inv_w[o.player] += iw;
            sum_y_over_w[o.player] += o.value * iw;
            total_inv_w += iw;
            total_y_over_w += o.value * iw;
            obs_player.push_back(o.player);
            obs_y.push_back(o.value);
            obs_inv_w.push_back(iw);
        }
    }
};

struct NormalParams {
    double mean = 0.0;
    double var = 1.0;
};
struct InvGammaParams {
    double shape = 1.0;
    double rate = 1.0;
};
struct BetaParams {
    double a = 1.0;
    double b = 1.0;
};

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kP1Clamp = 1e-12;

// --- Step 1: mu ------------------------------------------------------------

inline NormalParams mu_conditional(const GibbsState& s, const PanelStats& st,
                                   const Hyperparams& h) {
    double weighted_alpha = 0.0;
    for (std::size_t i = 0; i < st.m; ++i) weighted_alpha += s.alpha[i] * st.sum_inv_w[i];
    const double num = (st.total_y_over_w - weighted_alpha) / s.sigma2;
    const double prec = st.total_inv_w / s.sigma2 + 1.0 / h.K2;
    return {num / prec, 1.0 / prec};
}

inline double draw_mu(const GibbsState& s, const PanelStats& st, const Hyperparams& h, Rng& rng) {
    const auto p = mu_conditional(s, st, h);
    return rng.normal(p.mean, std::sqrt(p.var));
}

// --- Step 2: alpha ---------------------------------------------------------

inline NormalParams alpha_conditional(const GibbsState& s, const PanelStats& st,
                                      const Hyperparams& h, std::size_t i) {
    const double tau2_i = s.gamma[i] ? s.tau2 : h.v0 * s.tau2;
    const double num = (st.sum_y_over_w[i] - s.mu * st.sum_inv_w[i]) / s.sigma2;
    const double prec = st.sum_inv_w[i] / s.sigma2 + 1.0 / tau2_i;
    return {num / prec, 1.0 / prec};
}

inline std::vector<double> draw_alpha(const GibbsState& s, const PanelStats& st,
                                      const Hyperparams& h, Rng& rng) {
    std::vector<double> alpha(st.m);
    for (std::size_t i = 0; i < st.m; ++i) {
        const auto p = alpha_conditional(s, st, h, i);
        alpha[i] = rng.normal(p.mean, std::sqrt(p.var));
    }
    return alpha;
}

// --- Step 3: sigma2 ----------------------------------------------------------

inline InvGammaParams sigma2_conditional(const GibbsState& s, const PanelStats& st,
                                         const Hyperparams& h) {
    double rss = 0.0;
    for (std::size_t k = 0; k < st.N; ++k) {
        const double r = st.obs_y[k] - s.alpha[st.obs_player[k]] - s.mu;
        rss += r * r * st.obs_inv_w[k];
    }
    return {h.alpha0 + 0.5 * static_cast<double>(st.N), h.beta0 + 0.5 * rss};
}

inline double draw_sigma2(const GibbsState& s, const PanelStats& st, const Hyperparams& h,
                          Rng& rng) {
    const auto p = sigma2_conditional(s, st, h);
    return std::max(rng.inverse_gamma(p.shape, p.rate), kVarianceFloor);
}

// --- Step 4: tau2 ------------------------------------------------------------

// Under the inverse-gamma prior the conditional is
// InvGamma(psi0 + m/2, delta0 + sum alpha_i^2/(2 v_i)) with v_i = 1 or v0.
// Under p(tau) propto 1 (so p(tau2) propto 1/tau) the same kernel gives
// InvGamma(m/2 - 1/2, sum alpha_i^2/(2 v_i)), proper only for m >= 2.
inline InvGammaParams tau2_conditional(const GibbsState& s, const Hyperparams& h) {
    double scaled = 0.0;
    for (std::size_t i = 0; i < s.alpha.size(); ++i) {
        const double v_i = s.gamma[i] ? 1.0 : h.v0;
        scaled += s.alpha[i] * s.alpha[i] / v_i;
    }
    const double m = static_cast<double>(s.alpha.size());
    if (h.tau_prior == TauPrior::UniformOnTau) {
        if (s.alpha.size() < 2)
            throw DataError("uniform-on-tau prior needs at least 2 players");
        return {0.5 * (m - 1.0), 0.5 * scaled};
    }
    return {h.psi0 + 0.5 * m, h.delta0 + 0.5 * scaled};
}

inline double draw_tau2(const GibbsState& s, const Hyperparams& h, Rng& rng) {
    const auto p = tau2_conditional(s, h);
    return std::max(rng.inverse_gamma(p.shape, p.rate), kVarianceFloor);
}

// --- Step 5: gamma -----------------------------------------------------------

// q_i = P(gamma_i = 1 | alpha_i, tau2, p1). Evaluated through log weights so
// the spike's exp(-alpha^2/(2 v0 tau2)) can underflow without harm.
inline double gamma1_probability(double alpha_i, double tau2, double p1, const Hyperparams& h) {
    const double p = std::clamp(p1, kP1Clamp, 1.0 - kP1Clamp);
    const double a2 = alpha_i * alpha_i;
    const double log_slab = std::log(p) - a2 / (2.0 * tau2);
    const double log_spike = std::log(1.0 - p) - 0.5 * std::log(h.v0) - a2 / (2.0 * h.v0 * tau2);
    return 1.0 / (1.0 + std::exp(log_spike - log_slab));
}

inline std::vector<std::uint8_t> draw_gamma(const GibbsState& s, const Hyperparams& h, Rng& rng) {
    std::vector<std::uint8_t> gamma(s.alpha.size());
    for (std::size_t i = 0; i < s.alpha.size(); ++i) {
        const double q = gamma1_probability(s.alpha[i], s.tau2, s.p1, h);
        gamma[i] = rng.bernoulli(q) ? 1 : 0;
    }
    return gamma;
}

// --- Step 6: p1 --------------------------------------------------------------

inline BetaParams p1_conditional(const GibbsState& s) {
    double ones = 0.0;
    for (const auto g : s.gamma) ones += g;
    const double m = static_cast<double>(s.gamma.size());
    return {1.0 + ones, 1.0 + (m - ones)};
}

inline double draw_p1(const GibbsState& s, Rng& rng) {
    const auto p = p1_conditional(s);
    return rng.beta(p.a, p.b);
}

// --- Initialization ----------------------------------------------------------

inline GibbsState init_state(const MetricPanel& panel, const PanelStats& st,
                             [[maybe_unused]] const Hyperparams& h, InitScheme scheme, Rng& rng) {
    if (st.N < 2)
        throw DataError("metric '" + panel.name() + "': cannot fit a panel with a single observation");
    GibbsState s;
    s.mu = st.total_y_over_w / st.total_inv_w;
    s.alpha.resize(st.m);
    for (std::size_t i = 0; i < st.m; ++i)
        s.alpha[i] = st.sum_y_over_w[i] / st.sum_inv_w[i] - s.mu;

    double rss = 0.0;
    for (std::size_t k = 0; k < st.N; ++k) {
        const double r = st.obs_y[k] - s.mu - s.alpha[st.obs_player[k]];
        rss += r * r * st.obs_inv_w[k];
    }
    s.sigma2 = std::max(rss / static_cast<double>(st.N), kVarianceFloor);
    s.tau2 = std::max(variance_of(s.alpha), kVarianceFloor);

    // gamma starts generous toward the slab: player i is flagged when
    // |alpha_i| clears half its own standard error. Spike-assigned alphas
    // enter the tau2 rate scaled by 1/v0, so initializing a player with
    // material |alpha| as spike can inflate tau2 until v0*tau2 swallows the
    // per-player noise scale; that all-spike state is absorbing (gamma can
    // flip 1 -> 0 freely but not back once the spike is that wide). With the
    // 0.5*SE cutoff the misassigned contribution is bounded by
    // (0.5)^2/v0 = 25 SE^2, keeping the spike narrower than the noise scale,
    // while genuinely null panels still drain to the spike (downward flips
    // face no barrier).
    s.gamma.resize(st.m);
    double ones = 0.0;
    for (std::size_t i = 0; i < st.m; ++i) {
        const double se_i = std::sqrt(s.sigma2 / st.sum_inv_w[i]);
        s.gamma[i] = std::abs(s.alpha[i]) > 0.5 * se_i ? 1 : 0;
        ones += s.gamma[i];
    }
    s.p1 = std::clamp(ones / static_cast<double>(st.m), kP1Clamp, 1.0 - kP1Clamp);

    if (scheme == InitScheme::Dispersed) {
        const double spread = std::sqrt(s.sigma2 + s.tau2);
        s.mu += 3.0 * spread * rng.normal();
        s.sigma2 = std::max(s.sigma2 * std::exp(rng.normal()), kVarianceFloor);
        s.tau2 = std::max(s.tau2 * std::exp(rng.normal()), kVarianceFloor);
        s.p1 = std::clamp(rng.uniform01(), kP1Clamp, 1.0 - kP1Clamp);
        for (std::size_t i = 0; i < st.m; ++i) {
            s.gamma[i] = rng.bernoulli(0.5) ? 1 : 0;
            s.alpha[i] = rng.normal(0.0, std::sqrt(s.tau2));
        }
    }
    return s;
}

// --- Sweep + chain -----------------------------------------------------------

inline void gibbs_sweep(GibbsState& s, const PanelStats& st, const Hyperparams& h, Rng& rng) {
    s.mu = draw_mu(s, st, h, rng);
    s.alpha = draw_alpha(s, st, h, rng);
    s.sigma2 = draw_sigma2(s, st, h, rng);
    s.tau2 = draw_tau2(s, h, rng);
    s.gamma = draw_gamma(s, h, rng);
    s.p1 = draw_p1(s, rng);
}

struct PosteriorSamples {
    std::string metric;
    std::vector<std::string> player_ids;
    std::size_t draws = 0;  // S
    std::vector<double> mu, sigma2, tau2, p1;     // length S
    std::vector<double> alpha;                    // S x m, row-major
    std::vector<std::uint8_t> gamma;              // S x m, row-major
    Hyperparams hyper;
    ChainConfig config;
    std::uint64_t panel_hash = 0;

    std::size_t players() const { return player_ids.size(); }
    double alpha_at(std::size_t s, std::size_t i) const { return alpha[s * players() + i]; }
    std::uint8_t gamma_at(std::size_t s, std::size_t i) const { return gamma[s * players() + i]; }
};

inline PosteriorSamples run_chain(const MetricPanel& panel, const Hyperparams& hyper,
                                  const ChainConfig& config) {
    hyper.validate();
    config.validate();
    const PanelStats stats(panel);
    Rng rng(config.seed);
    GibbsState state = init_state(panel, stats, hyper, config.init, rng);

    PosteriorSamples out;
    out.metric = panel.name();
    out.player_ids = panel.player_ids();
    out.hyper = hyper;
    out.config = config;
    out.panel_hash = panel.hash();
    const long S = config.retained();
    out.mu.reserve(S);
    out.sigma2.reserve(S);
    out.tau2.reserve(S);
    out.p1.reserve(S);
    out.alpha.reserve(static_cast<std::size_t>(S) * stats.m);
    out.gamma.reserve(static_cast<std::size_t>(S) * stats.m);

    for (long it = 1; it <= config.total; ++it) {
        try {
            gibbs_sweep(state, stats, hyper, rng);
        } catch (const std::exception& e) {
            throw NumericError("metric '" + panel.name() + "': iteration " + std::to_string(it) +
                               ": " + e.what());
        }
        if (!std::isfinite(state.mu) || !std::isfinite(state.sigma2) ||
            !std::isfinite(state.tau2) || !std::isfinite(state.p1))
            throw NumericError("metric '" + panel.name() + "': iteration " + std::to_string(it) +
                               ": chain state became non-finite");
        if (it > config.burnin && (it - config.burnin) % config.thin == 0) {
            out.mu.push_back(state.mu);
            out.sigma2.push_back(state.sigma2);
            out.tau2.push_back(state.tau2);
            out.p1.push_back(state.p1);
            out.alpha.insert(out.alpha.end(), state.alpha.begin(), state.alpha.end());
            out.gamma.insert(out.gamma.end(), state.gamma.begin(), state.gamma.end());
        }
    }
    out.draws = out.mu.size();
    return out;
}

}  // namespace pansig
