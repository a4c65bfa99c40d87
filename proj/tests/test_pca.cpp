#include <catch2/catch_amalgamated.hpp>

#include "pansig/pca.hpp"
#include "testutil.hpp"

using namespace pansig;

namespace {

std::vector<std::string> index_ids(std::size_t n) {
    std::vector<std::string> ids;
    char buf[32];
    for (std::size_t r = 0; r < n; ++r) {
        std::snprintf(buf, sizeof(buf), "r%06zu", r);
        ids.emplace_back(buf);
    }
    return ids;
}

std::vector<std::string> col_names(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < p; ++c) names.push_back("m" + std::to_string(c));
    return names;
}

// Rank-k factor data: groups of columns share a factor, signal sd `snr` vs
// unit noise.
Eigen::MatrixXd planted_matrix(std::size_t n, std::size_t p, std::size_t rank, double snr,
                               std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, p);
    std::vector<double> factors(rank);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto& f : factors) f = rng.normal();
        for (std::size_t c = 0; c < p; ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                snr * factors[c % rank] + rng.normal();
    }
    return x;
}

PcaInput gaussian_input(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal();
    return assemble_matrix(x, index_ids(n), col_names(p));
}

}  // namespace

TEST_CASE("assemble inner-joins player-seasons and z-scores", "[pca]") {
    const MetricPanel a = testutil::make_panel(
        "a", {{"p1", 2000, 1.0, 1.0}, {"p1", 2001, 2.0, 1.0}, {"p2", 2000, 3.0, 1.0},
              {"p2", 2001, 4.0, 1.0}, {"p3", 2000, 5.0, 1.0}});
    const MetricPanel b = testutil::make_panel(
        "b", {{"p1", 2000, 2.0, 1.0}, {"p1", 2001, 1.0, 1.0}, {"p2", 2000, 5.0, 1.0},
              {"p2", 2001, 2.0, 1.0}, {"p3", 2001, 9.0, 1.0}});  // p3 mismatched season
    const PcaInput in = assemble(std::vector<MetricPanel>{a, b});
    REQUIRE(in.raw.rows() == 4);  // p3 drops: no common season
    REQUIRE(in.columns == std::vector<std::string>{"a", "b"});
    CHECK(in.row_ids[0] == "p1:2000");
    // Each z column has mean ~0 and sample sd ~1.
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(in.z.col(c).mean() == Catch::Approx(0.0).margin(1e-12));
        CHECK(in.z.col(c).squaredNorm() / 3.0 == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("assemble restricts rows when a late metric joins", "[pca]") {
    // A metric observed only from 2002 forces the joined rows to 2002+.
    std::vector<std::tuple<std::string, int, double, double>> wide, late;
    Rng rng(3);
    for (int i = 0; i < 6; ++i)
        for (int y = 1998; y <= 2004; ++y) {
            wide.emplace_back("p" + std::to_string(i), y, rng.normal(), 1.0);
            if (y >= 2002) late.emplace_back("p" + std::to_string(i), y, rng.normal(), 1.0);
        }
    const PcaInput in = assemble(std::vector<MetricPanel>{
        testutil::make_panel("wide", wide), testutil::make_panel("late", late)});
    CHECK(in.raw.rows() == 6 * 3);
    for (const auto& id : in.row_ids)
        CHECK(std::stoi(id.substr(id.find(':') + 1)) >= 2002);
}

TEST_CASE("assemble input validation", "[pca]") {
    const MetricPanel a = testutil::make_panel(
        "a", {{"p1", 2000, 1.0, 1.0}, {"p2", 2000, 2.0, 1.0}, {"p3", 2000, 3.0, 1.0}});
    CHECK_THROWS_AS(assemble(std::vector<MetricPanel>{a}), DataError);
    const MetricPanel disjoint = testutil::make_panel(
        "d", {{"q1", 2000, 1.0, 1.0}, {"q2", 2000, 2.0, 1.0}, {"q3", 2000, 3.0, 1.0}});
    CHECK_THROWS_AS(assemble(std::vector<MetricPanel>{a, disjoint}), DataError);
    const MetricPanel flat = testutil::make_panel(
        "f", {{"p1", 2000, 7.0, 1.0}, {"p2", 2000, 7.0, 1.0}, {"p3", 2000, 7.0, 1.0}});
    CHECK_THROWS_AS(assemble(std::vector<MetricPanel>{a, flat}), DataError);
}

TEST_CASE("identical columns give spectrum (2, 0)", "[pca]") {
    Rng rng(14);
    Eigen::MatrixXd x(50, 2);
    for (Eigen::Index r = 0; r < 50; ++r) {
        x(r, 0) = rng.normal();
        x(r, 1) = x(r, 0) * 3.0 + 1.0;  // same column up to affine scale
    }
    const PcaResult res = decompose(assemble_matrix(x, index_ids(50), col_names(2)));
    CHECK(res.eigenvalues[0] == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(res.eigenvalues[1] == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("two correlated columns: eigenvalues are 1 +- r exactly", "[pca]") {
    Rng rng(15);
    const std::size_t n = 10000;
    Eigen::MatrixXd x(n, 2);
    const double rho = 0.6;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double u = rng.normal();
        x(r, 0) = u;
        x(r, 1) = rho * u + std::sqrt(1.0 - rho * rho) * rng.normal();
    }
    const PcaInput in = assemble_matrix(x, index_ids(n), col_names(2));
    const PcaResult res = decompose(in);
    // Exact algebra: for a 2x2 correlation matrix the eigenvalues are 1 +- |r|.
    const double r_hat = (in.z.col(0).dot(in.z.col(1))) / static_cast<double>(n - 1);
    CHECK(res.eigenvalues[0] == Catch::Approx(1.0 + std::abs(r_hat)).epsilon(1e-12));
    CHECK(res.eigenvalues[1] == Catch::Approx(1.0 - std::abs(r_hat)).epsilon(1e-12));
    // And the population limit.
    CHECK(res.eigenvalues[0] == Catch::Approx(1.6).margin(0.05));
    CHECK(res.eigenvalues[1] == Catch::Approx(0.4).margin(0.05));
}

TEST_CASE("isotropic columns give a flat spectrum near 1", "[pca]") {
    const PcaResult res = decompose(gaussian_input(10000, 3, 16));
    for (Eigen::Index c = 0; c < 3; ++c)
        CHECK(res.eigenvalues[c] == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("rank-1 structure dominates the spectrum", "[pca]") {
    Rng rng(17);
    const std::size_t p = 6;
    Eigen::MatrixXd x(2000, p);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double f = rng.normal();
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = f + 0.01 * rng.normal();
    }
    const PcaResult res = decompose(assemble_matrix(x, index_ids(2000), col_names(p)));
    CHECK(res.eigenvalues[0] > 5.9);
}

TEST_CASE("pca algebra invariants", "[pca]") {
    const PcaInput in = assemble_matrix(planted_matrix(300, 8, 2, 1.5, 18), index_ids(300),
                                        col_names(8));
    const PcaResult res = decompose(in);
    CHECK(res.eigenvalues.sum() == Catch::Approx(8.0).margin(1e-8));
    for (Eigen::Index c = 1; c < res.eigenvalues.size(); ++c)
        CHECK(res.eigenvalues[c] <= res.eigenvalues[c - 1] + 1e-14);
    const Eigen::MatrixXd gram = res.loadings.transpose() * res.loadings;
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
    // Sign convention: largest |loading| per component is positive.
    for (Eigen::Index c = 0; c < res.loadings.cols(); ++c) {
        Eigen::Index arg = 0;
        res.loadings.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(res.loadings(arg, c) > 0.0);
    }
}

TEST_CASE("spectrum is exactly invariant under row permutation", "[pca]") {
    const std::size_t n = 200;
    const Eigen::MatrixXd x = planted_matrix(n, 5, 2, 1.0, 19);
    const auto ids = index_ids(n);
    const PcaResult base = decompose(assemble_matrix(x, ids, col_names(5)));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(20);
    rng.shuffle(perm);
    Eigen::MatrixXd xp(x.rows(), x.cols());
    std::vector<std::string> idsp;
    for (std::size_t r = 0; r < n; ++r) {
        xp.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(perm[r]));
        idsp.push_back(ids[perm[r]]);
    }
    const PcaResult permuted = decompose(assemble_matrix(xp, idsp, col_names(5)));
    for (Eigen::Index c = 0; c < 5; ++c)
        CHECK(base.eigenvalues[c] == permuted.eigenvalues[c]);  // bitwise
}

TEST_CASE("permuted columns preserve marginals", "[pca]") {
    const PcaInput in = gaussian_input(500, 4, 21);
    Rng rng(22);
    Eigen::MatrixXd zp = in.z;
    for (Eigen::Index c = 0; c < zp.cols(); ++c) {
        std::vector<std::uint32_t> idx(500);
        std::iota(idx.begin(), idx.end(), 0u);
        rng.shuffle(idx);
        for (Eigen::Index r = 0; r < zp.rows(); ++r) zp(r, c) = in.z(idx[static_cast<std::size_t>(r)], c);
    }
    for (Eigen::Index c = 0; c < zp.cols(); ++c) {
        CHECK(zp.col(c).mean() == Catch::Approx(in.z.col(c).mean()).margin(1e-12));
        CHECK(zp.col(c).squaredNorm() == Catch::Approx(in.z.col(c).squaredNorm()).epsilon(1e-12));
    }
}

TEST_CASE("permutation band brackets the isotropic spectrum", "[pca][slow]") {
    const PcaInput in = gaussian_input(800, 6, 23);
    const PcaResult res = decompose(in);
    const auto band = permutation_band(in, 200, 0.95, 31);
    REQUIRE(band.size() == 6);
    // Pure noise: no component clears the band (at 0.95 an occasional
    // exceedance is possible, but not for this seeded input).
    CHECK(significant_components(res.eigenvalues, band) == 0);
    int exceed = 0;
    for (Eigen::Index c = 0; c < 6; ++c)
        if (res.eigenvalues[c] > band[static_cast<std::size_t>(c)]) ++exceed;
    CHECK(exceed <= 1);
    // The middle of the band sits near the isotropic eigenvalue 1.
    CHECK(band[2] == Catch::Approx(1.0).margin(0.25));
    CHECK_THROWS_AS(permutation_band(in, 50, 0.95, 1), DataError);
}

TEST_CASE("planted rank-3 structure yields exactly 3 significant components", "[pca][slow]") {
    const PcaInput in = assemble_matrix(planted_matrix(2000, 20, 3, 3.0, 24), index_ids(2000),
                                        col_names(20));
    const PcaResult res = decompose(in);
    const auto band = permutation_band(in, 500, 0.95, 32);
    CHECK(significant_components(res.eigenvalues, band) == 3);
}

TEST_CASE("bootstrap band degenerates at reps=1 and tightens with N", "[pca][slow]") {
    const PcaInput in = gaussian_input(400, 4, 25);
    const PcaResult res = decompose(in);
    const auto [lo1, hi1] = bootstrap_band(in, 1, 0.95, 41);
    for (std::size_t c = 0; c < 4; ++c) CHECK(lo1[c] == hi1[c]);

    const auto [lo_small, hi_small] = bootstrap_band(in, 200, 0.95, 42);
    const PcaInput big = gaussian_input(6400, 4, 26);
    const auto [lo_big, hi_big] = bootstrap_band(big, 200, 0.95, 43);
    CHECK(hi_big[0] - lo_big[0] < hi_small[0] - lo_small[0]);
    (void)res;
}

TEST_CASE("bootstrap interval covers the full-sample top eigenvalue", "[pca][slow]") {
    // Planted structure, repeated experiments: the level-0.95 interval for
    // eigenvalue 1 should cover the observed eigenvalue in >= 9/10 runs.
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const PcaInput in = assemble_matrix(planted_matrix(600, 8, 3, 3.0, 100 + seed),
                                            index_ids(600), col_names(8));
        const PcaResult res = decompose(in);
        const auto [lo, hi] = bootstrap_band(in, 200, 0.95, 200 + seed);
        if (res.eigenvalues[0] >= lo[0] && res.eigenvalues[0] <= hi[0]) ++covered;
    }
    CHECK(covered >= 9);
}

TEST_CASE("significant_components stops at the first failure", "[pca]") {
    Eigen::VectorXd observed(5);
    observed << 5.0, 3.0, 0.9, 2.0, 1.5;
    const std::vector<double> band = {1.4, 1.3, 1.2, 1.1, 1.0};
    CHECK(significant_components(observed, band) == 2);  // the dip at c=3 stops counting
    Eigen::VectorXd flat(3);
    flat << 1.0, 1.0, 1.0;
    CHECK(significant_components(flat, std::vector<double>{1.2, 1.1, 1.0}) == 0);
}
