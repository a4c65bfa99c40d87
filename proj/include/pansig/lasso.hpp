#pragma once
// L1-penalized regression of centered metric values on player indicators:
//
//   min_b  sum_ij (y_ij - X_i b)^2 + lambda * sum_i |b_i|
//
// The indicator columns touch disjoint rows, so the exact solution is a
// per-player soft threshold of the centered player mean:
//   b_i = sign(mbar_i) * max(|mbar_i| - lambda/(2 n_i), 0).
// The loss is unweighted. The fraction parameterization
// f = sum|b| / sum|b_OLS| is solved for lambda by bisection, and f is chosen
// by repeated 5-fold cross validation over player-seasons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "panel.hpp"
#include "rng.hpp"

namespace pansig {

inline constexpr double kNonzeroTol = 1e-12;   // |beta| above this counts as nonzero
inline constexpr double kFractionTol = 1e-6;   // bisection target accuracy in f

// Per-player means after centering by the (unweighted) grand mean.
struct PlayerMeans {
    double grand_mean = 0.0;
    std::vector<double> centered_mean;   // mbar_i
    std::vector<std::size_t> count;      // n_i
};

inline PlayerMeans player_means(const MetricPanel& panel) {
    PlayerMeans pm;
    pm.centered_mean.assign(panel.players(), 0.0);
    pm.count.assign(panel.players(), 0);
    double total = 0.0;
    for (const auto& o : panel.observations()) {
        pm.centered_mean[o.player] += o.value;
        pm.count[o.player] += 1;
        total += o.value;
    }
    pm.grand_mean = total / static_cast<double>(panel.size());
    for (std::size_t i = 0; i < panel.players(); ++i)
        pm.centered_mean[i] =
            pm.centered_mean[i] / static_cast<double>(pm.count[i]) - pm.grand_mean;
    return pm;
}

// The OLS solution under the player-indicator design: the centered means.
inline std::vector<double> ols_means(const MetricPanel& panel) {
    return player_means(panel).centered_mean;
}

namespace detail {

inline double soft_threshold(double x, double t) {
    const double mag = std::abs(x) - t;
    return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
}

inline std::vector<double> fit_means(const PlayerMeans& pm, double lambda) {
    std::vector<double> beta(pm.centered_mean.size());
    for (std::size_t i = 0; i < beta.size(); ++i)
        beta[i] = soft_threshold(pm.centered_mean[i],
                                 lambda / (2.0 * static_cast<double>(pm.count[i])));
    return beta;
}

inline double l1_norm(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += std::abs(x);
    return s;
}

// Smallest lambda that forces every coefficient to zero.
inline double lambda_max(const PlayerMeans& pm) {
    double lmax = 0.0;
    for (std::size_t i = 0; i < pm.centered_mean.size(); ++i)
        lmax = std::max(lmax, 2.0 * static_cast<double>(pm.count[i]) *
                                  std::abs(pm.centered_mean[i]));
    return lmax;
}

// Solves sum|beta(lambda)| / sum|beta_OLS| = f by bisection. Degenerate
// panels (all OLS coefficients zero) return lambda 0 with beta = 0.
inline double lambda_for_fraction(const PlayerMeans& pm, double f) {
    const double ols_norm = l1_norm(pm.centered_mean);
    if (ols_norm <= 0.0) return 0.0;
    if (f >= 1.0) return 0.0;
    double lo = 0.0;
    double hi = lambda_max(pm);
    if (f <= 0.0) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double ratio = l1_norm(fit_means(pm, mid)) / ols_norm;
        if (std::abs(ratio - f) <= kFractionTol) return mid;
        if (ratio > f) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Exact Lasso solution at a given lambda.
inline std::vector<double> fit_at_lambda(const MetricPanel& panel, double lambda) {
    if (lambda < 0.0) throw DataError("lasso: lambda must be >= 0");
    return detail::fit_means(player_means(panel), lambda);
}

inline double lasso_pct(std::span<const double> beta) {
    if (beta.empty()) return 0.0;
    std::size_t nonzero = 0;
    for (double b : beta)
        if (std::abs(b) > kNonzeroTol) ++nonzero;
    return 100.0 * static_cast<double>(nonzero) / static_cast<double>(beta.size());
}

struct LassoFit {
    std::string metric;
    double fraction = 0.0;
    double lambda = 0.0;
    std::vector<double> beta;
    double pct_nonzero = 0.0;
    double cv_rmse = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;  // all OLS coefficients were zero
};

inline std::vector<double> default_fraction_grid(int points = 101) {
    if (points < 2) throw DataError("lasso: fraction grid needs at least 2 points");
    std::vector<double> grid(points);
    for (int k = 0; k < points; ++k)
        grid[k] = static_cast<double>(k) / static_cast<double>(points - 1);
    return grid;
}

inline std::vector<LassoFit> fraction_path(const MetricPanel& panel,
                                           std::span<const double> grid) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] < 0.0 || grid[k] > 1.0) throw DataError("lasso: fractions must lie in [0,1]");
        if (k > 0 && grid[k] < grid[k - 1]) throw DataError("lasso: fraction grid must be sorted");
    }
    const PlayerMeans pm = player_means(panel);
    const bool degenerate = detail::l1_norm(pm.centered_mean) <= 0.0;
    std::vector<LassoFit> fits;
    fits.reserve(grid.size());
    for (double f : grid) {
        LassoFit fit;
        fit.metric = panel.name();
        fit.fraction = f;
        fit.degenerate = degenerate;
        if (f >= 1.0) fit.lambda = 0.0;
        else if (f <= 0.0) fit.lambda = detail::lambda_max(pm);
        else fit.lambda = detail::lambda_for_fraction(pm, f);
        fit.beta = f <= 0.0 ? std::vector<double>(pm.centered_mean.size(), 0.0)
                            : detail::fit_means(pm, fit.lambda);
        fit.pct_nonzero = lasso_pct(fit.beta);
        fits.push_back(std::move(fit));
    }
    return fits;
}

struct CvResult {
    double chosen_f = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_rmse;  // out-of-fold RMSE averaged over repeat x fold cells
};

// Repeated k-fold cross validation over player-seasons. Held-out rows are
// predicted by train grand mean + beta_{player}; players absent from the
// training split predict at the train grand mean.
inline CvResult cross_validate(const MetricPanel& panel, std::span<const double> grid,
                               int folds = 5, int repeats = 10, std::uint64_t seed = 1) {
    if (folds < 2) throw DataError("lasso CV: need at least 2 folds");
    if (repeats < 1) throw DataError("lasso CV: need at least 1 repeat");
    if (panel.size() < static_cast<std::size_t>(folds))
        throw DataError("lasso CV: panel has fewer rows than folds");
    if (grid.empty()) throw DataError("lasso CV: empty fraction grid");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (grid[k] < grid[k - 1]) throw DataError("lasso CV: fraction grid must be sorted");

    const auto obs = panel.observations();
    const std::size_t N = obs.size();
    const std::size_t m = panel.players();

    CvResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.mean_rmse.assign(grid.size(), 0.0);

    std::vector<std::size_t> order(N);
    std::vector<double> sum(m);
    std::vector<std::size_t> cnt(m);
    std::size_t cells = 0;
    for (int rep = 0; rep < repeats; ++rep) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
        rng.shuffle(order);
        for (int fold = 0; fold < folds; ++fold) {
            const std::size_t lo = N * static_cast<std::size_t>(fold) /
                                   static_cast<std::size_t>(folds);
            const std::size_t hi = N * static_cast<std::size_t>(fold + 1) /
                                   static_cast<std::size_t>(folds);
            if (hi == lo) throw DataError("lasso CV: empty fold");

            // Training statistics for this cell.
            std::fill(sum.begin(), sum.end(), 0.0);
            std::fill(cnt.begin(), cnt.end(), std::size_t{0});
            double train_total = 0.0;
            std::size_t train_n = 0;
            for (std::size_t k = 0; k < N; ++k) {
                if (k >= lo && k < hi) continue;
                const auto& o = obs[order[k]];
                sum[o.player] += o.value;
                cnt[o.player] += 1;
                train_total += o.value;
                ++train_n;
            }
            PlayerMeans pm;
            pm.grand_mean = train_total / static_cast<double>(train_n);
            pm.centered_mean.assign(m, 0.0);
            pm.count.assign(m, 1);  // placeholder for absent players; their beta is forced to 0
            for (std::size_t i = 0; i < m; ++i)
                if (cnt[i] > 0) {
                    pm.centered_mean[i] = sum[i] / static_cast<double>(cnt[i]) - pm.grand_mean;
                    pm.count[i] = cnt[i];
                } else {
                    pm.centered_mean[i] = 0.0;
                }

            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double f = grid[g];
                double lambda;
                if (f >= 1.0) lambda = 0.0;
                else if (f <= 0.0) lambda = detail::lambda_max(pm);
                else lambda = detail::lambda_for_fraction(pm, f);
                const std::vector<double> beta =
                    f <= 0.0 ? std::vector<double>(m, 0.0) : detail::fit_means(pm, lambda);
                double sse = 0.0;
                for (std::size_t k = lo; k < hi; ++k) {
                    const auto& o = obs[order[k]];
                    const double pred = pm.grand_mean + (cnt[o.player] > 0 ? beta[o.player] : 0.0);
                    sse += (o.value - pred) * (o.value - pred);
                }
                out.mean_rmse[g] += std::sqrt(sse / static_cast<double>(hi - lo));
            }
            ++cells;
        }
    }
    for (auto& r : out.mean_rmse) r /= static_cast<double>(cells);

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (out.mean_rmse[g] < out.mean_rmse[best]) best = g;  // ties keep the smaller f
    out.chosen_f = out.grid[best];
    return out;
}

}  // namespace pansig
