#pragma once
// Redundancy analysis across metrics: PCA of the player-season x metric
// matrix (complete cases, z-scored columns), permutation null bands,
// bootstrap variability bands, and the significant-component count.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "panel.hpp"
#include "rng.hpp"

namespace pansig {

struct PcaInput {
    Eigen::MatrixXd raw;  // complete-case rows x metrics
    Eigen::MatrixXd z;    // column-standardized copy
    std::vector<std::string> row_ids;   // "player_id:season"
    std::vector<std::string> columns;   // metric names
    Eigen::VectorXd col_mean, col_sd;
};

struct PcaResult {
    Eigen::VectorXd eigenvalues;  // descending, >= 0
    Eigen::MatrixXd loadings;     // orthonormal columns; largest |entry| positive
    std::vector<double> null_band;            // permutation quantile per component
    std::vector<double> boot_lo, boot_hi;     // bootstrap central interval
};

namespace detail {

// Sample SD with the N-1 divisor, per column.
inline void standardize(const Eigen::MatrixXd& x, Eigen::MatrixXd& z, Eigen::VectorXd& mean,
                        Eigen::VectorXd& sd) {
    const auto n = static_cast<double>(x.rows());
    mean = x.colwise().mean();
    z = x.rowwise() - mean.transpose();
    sd = (z.colwise().squaredNorm() / (n - 1.0)).cwiseSqrt();
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        if (sd[c] > 0.0) z.col(c) /= sd[c];
        else z.col(c).setZero();  // degenerate column; caller decides
    }
}

// Eigenvalues of the correlation matrix of a standardized matrix, descending.
// Columns that were constant (all-zero z) are treated as self-correlated only.
inline Eigen::VectorXd correlation_spectrum(const Eigen::MatrixXd& z,
                                            Eigen::MatrixXd* vectors = nullptr) {
    const auto n = static_cast<double>(z.rows());
    Eigen::MatrixXd corr = (z.transpose() * z) / (n - 1.0);
    for (Eigen::Index c = 0; c < corr.cols(); ++c)
        if (corr(c, c) == 0.0) corr(c, c) = 1.0;
    corr = 0.5 * (corr + corr.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        corr, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigendecomposition of the correlation matrix failed");
    // Eigen returns ascending order.
    Eigen::VectorXd values = solver.eigenvalues().reverse();
    for (Eigen::Index c = 0; c < values.size(); ++c) values[c] = std::max(values[c], 0.0);
    if (vectors) *vectors = solver.eigenvectors().rowwise().reverse();
    return values;
}

}  // namespace detail

// Builds the PCA input from per-metric panels: inner join of player-seasons
// present in every panel, rows in canonical (player_id, season) order,
// columns z-scored.
inline PcaInput assemble(std::span<const MetricPanel> panels) {
    if (panels.size() < 2) throw DataError("pca: need at least 2 metrics");
    using Key = std::pair<std::string, int>;
    std::map<Key, std::vector<double>> cells;
    for (const auto& o : panels[0].observations())
        cells[{panels[0].player_id(o.player), o.season}] = {o.value};
    for (std::size_t p = 1; p < panels.size(); ++p) {
        for (const auto& o : panels[p].observations()) {
            const auto it = cells.find({panels[p].player_id(o.player), o.season});
            if (it != cells.end() && it->second.size() == p) it->second.push_back(o.value);
        }
    }

    std::vector<Key> keys;
    for (const auto& [key, values] : cells)
        if (values.size() == panels.size()) keys.push_back(key);
    if (keys.size() < 3)
        throw DataError("pca: fewer than 3 complete player-season rows across the selected metrics");

    PcaInput in;
    in.raw.resize(static_cast<Eigen::Index>(keys.size()),
                  static_cast<Eigen::Index>(panels.size()));
    in.row_ids.reserve(keys.size());
    for (std::size_t r = 0; r < keys.size(); ++r) {
        const auto& values = cells.at(keys[r]);
        for (std::size_t c = 0; c < panels.size(); ++c)
            in.raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[c];
        in.row_ids.push_back(keys[r].first + ":" + std::to_string(keys[r].second));
    }
    for (const auto& p : panels) in.columns.push_back(p.name());
    detail::standardize(in.raw, in.z, in.col_mean, in.col_sd);
    for (Eigen::Index c = 0; c < in.col_sd.size(); ++c)
        if (!(in.col_sd[c] > 0.0))
            throw DataError("pca: metric '" + in.columns[static_cast<std::size_t>(c)] +
                            "' has zero variance on the joined rows");
    return in;
}

// Builds the PCA input from an explicit matrix. Rows are sorted by row id so
// the spectrum does not depend on input row order.
inline PcaInput assemble_matrix(const Eigen::MatrixXd& raw, std::vector<std::string> row_ids,
                                std::vector<std::string> columns) {
    if (raw.cols() < 2) throw DataError("pca: need at least 2 columns");
    if (raw.rows() < 3) throw DataError("pca: need at least 3 rows");
    if (static_cast<Eigen::Index>(row_ids.size()) != raw.rows() ||
        static_cast<Eigen::Index>(columns.size()) != raw.cols())
        throw DataError("pca: row/column label sizes do not match the matrix");
    std::vector<std::size_t> order(row_ids.size());
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return row_ids[a] < row_ids[b]; });
    PcaInput in;
    in.raw.resize(raw.rows(), raw.cols());
    in.row_ids.reserve(row_ids.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        in.raw.row(static_cast<Eigen::Index>(r)) = raw.row(static_cast<Eigen::Index>(order[r]));
        in.row_ids.push_back(row_ids[order[r]]);
    }
    in.columns = std::move(columns);
    detail::standardize(in.raw, in.z, in.col_mean, in.col_sd);
    for (Eigen::Index c = 0; c < in.col_sd.size(); ++c)
        if (!(in.col_sd[c] > 0.0))
            throw DataError("pca: column '" + in.columns[static_cast<std::size_t>(c)] +
                            "' has zero variance");
    return in;
}

// Spectrum and loadings of the sample correlation matrix.
inline PcaResult decompose(const PcaInput& in) {
    PcaResult out;
    Eigen::MatrixXd vectors;
    out.eigenvalues = detail::correlation_spectrum(in.z, &vectors);
    // Sign convention: the largest-magnitude loading of each component is
    // positive.
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
    out.loadings = std::move(vectors);
    return out;
}

// Null band: each rep permutes every column independently (breaking
// cross-column correlation, preserving marginals) and records the spectrum;
// the band is the per-component `quant` quantile across reps.
inline std::vector<double> permutation_band(const PcaInput& in, int reps = 500,
                                            double quant = 0.95, std::uint64_t seed = 1) {
    if (reps < 100) throw DataError("pca: permutation band needs at least 100 reps");
    const Eigen::Index n = in.z.rows();
    const Eigen::Index p = in.z.cols();
    std::vector<std::vector<double>> per_component(static_cast<std::size_t>(p));
    Eigen::MatrixXd zp = in.z;
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(n));
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
        for (Eigen::Index c = 0; c < p; ++c) {
            for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<std::uint32_t>(k);
            rng.shuffle(idx);
            for (Eigen::Index r = 0; r < n; ++r) zp(r, c) = in.z(idx[static_cast<std::size_t>(r)], c);
        }
        const Eigen::VectorXd values = detail::correlation_spectrum(zp);
        for (Eigen::Index c = 0; c < p; ++c)
            per_component[static_cast<std::size_t>(c)].push_back(values[c]);
    }
    std::vector<double> band(static_cast<std::size_t>(p));
    for (std::size_t c = 0; c < band.size(); ++c)
        band[c] = quantile(per_component[c], quant);
    return band;
}

// Bootstrap band: resample rows with replacement, re-standardize, recompute
// the spectrum; the band is the central `quant`-mass interval per component.
inline std::pair<std::vector<double>, std::vector<double>> bootstrap_band(
    const PcaInput& in, int reps = 500, double quant = 0.95, std::uint64_t seed = 1) {
    if (reps < 1) throw DataError("pca: bootstrap band needs at least 1 rep");
    const Eigen::Index n = in.raw.rows();
    const Eigen::Index p = in.raw.cols();
    std::vector<std::vector<double>> per_component(static_cast<std::size_t>(p));
    Eigen::MatrixXd sample(n, p), z;
    Eigen::VectorXd mean, sd;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
        for (Eigen::Index r = 0; r < n; ++r)
            sample.row(r) = in.raw.row(static_cast<Eigen::Index>(
                rng.bounded(static_cast<std::uint64_t>(n))));
        detail::standardize(sample, z, mean, sd);
        const Eigen::VectorXd values = detail::correlation_spectrum(z);
        for (Eigen::Index c = 0; c < p; ++c)
            per_component[static_cast<std::size_t>(c)].push_back(values[c]);
    }
    std::vector<double> lo(static_cast<std::size_t>(p)), hi(static_cast<std::size_t>(p));
    for (std::size_t c = 0; c < lo.size(); ++c) {
        std::sort(per_component[c].begin(), per_component[c].end());
        lo[c] = quantile_sorted(per_component[c], 0.5 * (1.0 - quant));
        hi[c] = quantile_sorted(per_component[c], 0.5 * (1.0 + quant));
    }
    return {lo, hi};
}

// Leading components whose observed eigenvalue strictly exceeds the null
// band; counting stops at the first component that fails.
inline int significant_components(const Eigen::VectorXd& observed,
                                  std::span<const double> null_band) {
    if (static_cast<std::size_t>(observed.size()) != null_band.size())
        throw DataError("pca: spectrum and null band sizes differ");
    int count = 0;
    for (Eigen::Index c = 0; c < observed.size(); ++c) {
        if (observed[c] > null_band[static_cast<std::size_t>(c)]) ++count;
        else break;
    }
    return count;
}

}  // namespace pansig
