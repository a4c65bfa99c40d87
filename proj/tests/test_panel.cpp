#include <catch2/catch_amalgamated.hpp>

#include "pansig/panel.hpp"
#include "pansig/rng.hpp"
#include "testutil.hpp"

using namespace pansig;

namespace {

std::vector<RawObs> random_obs(std::uint64_t seed, std::size_t players, int seasons) {
    Rng rng(seed);
    std::vector<RawObs> obs;
    for (std::size_t i = 0; i < players; ++i)
        for (int j = 0; j < seasons; ++j) {
            RawObs o;
            o.player_id = "p" + std::to_string(i);
            o.season = 2000 + j;
            o.value = rng.normal();
            o.opportunity = static_cast<double>(rng.bounded(500) + 50);
            obs.push_back(std::move(o));
        }
    return obs;
}

}  // namespace

TEST_CASE("panel is canonical under row permutation", "[panel]") {
    auto obs = random_obs(5, 8, 4);
    const MetricPanel a = MetricPanel::from_opportunities("x", obs);
    Rng rng(9);
    rng.shuffle(obs);
    const MetricPanel b = MetricPanel::from_opportunities("x", obs);
    REQUIRE(a.hash() == b.hash());
    REQUIRE(a.player_ids() == b.player_ids());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.observations()[k].value == b.observations()[k].value);
        CHECK(a.observations()[k].weight == b.observations()[k].weight);
    }
}

TEST_CASE("opportunity-derived weights have the pinned normalization", "[panel]") {
    const MetricPanel p = MetricPanel::from_opportunities("x", random_obs(6, 20, 3));
    double wn = 0.0, n = 0.0, w = 0.0;
    for (const auto& o : p.observations()) {
        wn += o.weight * o.opportunity;
        n += o.opportunity;
        w += o.weight;
    }
    // Opportunity-weighted mean of w is 1 exactly by construction of
    // w = n_bar / n; the unweighted mean is >= 1 (AM/HM inequality).
    CHECK(wn / n == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(w / static_cast<double>(p.size()) >= 1.0 - 1e-13);
}

TEST_CASE("panel rejects bad weights, duplicates and empty input", "[panel]") {
    CHECK_THROWS_AS(MetricPanel::from_opportunities("x", {}), DataError);
    std::vector<RawObs> zero_opp{{"a", 2000, 1.0, 0.0, {}}};
    CHECK_THROWS_AS(MetricPanel::from_opportunities("x", zero_opp), DataError);
    std::vector<RawObs> dup{{"a", 2000, 1.0, 1.0, 1.0}, {"a", 2000, 2.0, 1.0, 1.0}};
    CHECK_THROWS_AS(MetricPanel::from_weights("x", dup), DataError);
    std::vector<RawObs> neg_w{{"a", 2000, 1.0, 1.0, -0.5}};
    CHECK_THROWS_AS(MetricPanel::from_weights("x", neg_w), DataError);
}

TEST_CASE("panel csv round-trips byte-identically", "[panel]") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "pansig_panel_a.csv";
    const auto p2 = dir / "pansig_panel_b.csv";
    const MetricPanel a = MetricPanel::from_opportunities("metric/odd name", random_obs(7, 5, 3));
    a.write_csv(p1);
    const MetricPanel b = MetricPanel::read_csv(p1);
    b.write_csv(p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(a.hash() == b.hash());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}
