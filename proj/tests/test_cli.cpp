#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <map>

#include <unistd.h>

#include "pansig/cli.hpp"
#include "testutil.hpp"

using namespace pansig;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pansig_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

RunConfig fast_config(const fs::path& out) {
    RunConfig cfg;
    cfg.out_dir = out.string();
    cfg.seed = 31337;
    cfg.truth.players = 24;
    cfg.truth.seasons_per_player = 4;
    cfg.truth.mu = 0.1;
    cfg.truth.sigma2 = 0.01;
    cfg.truth.tau2 = 0.05;
    cfg.truth.p1 = 0.5;
    cfg.truth.metric_name = "demo";
    cfg.chain.total = 1500;
    cfg.chain.burnin = 500;
    cfg.chain.thin = 10;   // 100 retained draws
    cfg.lasso_grid = 11;
    cfg.repeats = 2;
    cfg.pca_reps = 100;
    return cfg;
}

void write_raw_fixture(const fs::path& p) {
    std::ofstream out(p);
    out << "player_id,season,PA,AB,H,1B,2B,3B,HR,R,RBI,BB,IBB,K,HBP,SF,SH,GDP,SB,CS,BUH,GB,FB,"
           "LD,IFFB,IFH,BIP,OB,Spd\n";
    Rng rng(8);
    for (int i = 0; i < 12; ++i)
        for (int y = 2000; y < 2006; ++y) {
            const long pa = 400 + static_cast<long>(rng.bounded(200));
            const long ab = pa - 60;
            const long h = 80 + static_cast<long>(rng.bounded(80));
            out << "player" << i << "," << y << "," << pa << "," << ab << "," << h << ","
                << h - 40 << ",25,5,10,"
                << 50 + rng.bounded(40) << "," << 50 + rng.bounded(40) << ","
                << 30 + rng.bounded(40) << "," << rng.bounded(10) << ","
                << 60 + rng.bounded(60) << "," << rng.bounded(8) << "," << rng.bounded(8) << ","
                << rng.bounded(8) << "," << rng.bounded(12) << "," << rng.bounded(20) << ","
                << rng.bounded(8) << "," << rng.bounded(6) << "," << 100 + rng.bounded(50) << ","
                << 90 + rng.bounded(50) << "," << 60 + rng.bounded(30) << ","
                << rng.bounded(15) << "," << rng.bounded(12) << "," << 250 + rng.bounded(60)
                << "," << 150 + rng.bounded(60) << "," << 3.0 + 0.01 * rng.bounded(300) << "\n";
        }
}

}  // namespace

TEST_CASE("ingest writes panels and the normality table", "[cli]") {
    TempDir tmp("ingest");
    const fs::path raw = tmp.path / "raw.csv";
    write_raw_fixture(raw);

    RunConfig cfg = fast_config(tmp.path / "out");
    cfg.raw_csv = raw.string();
    cfg.metrics = {"AVG", "HR/PA", "SB/OB", "Spd"};
    REQUIRE(cli::cmd_ingest(cfg) == 0);
    CHECK(fs::exists(tmp.path / "out/panels/AVG.csv"));
    CHECK(fs::exists(tmp.path / "out/panels/HR_PA.csv"));
    CHECK(fs::exists(tmp.path / "out/panels/SB_OB.csv"));
    CHECK(fs::exists(tmp.path / "out/panels/Spd.csv"));
    const CsvTable normality = read_csv_file(tmp.path / "out/normality.csv");
    CHECK(normality.rows.size() == 4);

    // Full-coverage fixture: all 50 builtin metrics build.
    RunConfig all = fast_config(tmp.path / "out_all");
    all.raw_csv = raw.string();
    // wOBA/wRC/wRAA passthrough columns are absent in this fixture.
    REQUIRE(cli::cmd_ingest(all) == 0);
    const auto files = cli::sorted_files(tmp.path / "out_all/panels", ".csv");
    CHECK(files.size() == 47);
    const CsvTable summary = read_csv_file(tmp.path / "out_all/ingest_summary.csv");
    std::size_t errors = 0;
    for (const auto& row : summary.rows)
        if (row[1] == "error") ++errors;
    CHECK(errors == 3);  // wOBA, wRC, wRAA
}

TEST_CASE("ingest errors map to data problems", "[cli]") {
    TempDir tmp("ingest_err");
    RunConfig cfg = fast_config(tmp.path / "out");
    cfg.raw_csv = (tmp.path / "missing.csv").string();
    CHECK_THROWS_AS(cli::cmd_ingest(cfg), DataError);
    RunConfig none = fast_config(tmp.path / "out2");
    CHECK_THROWS_AS(cli::cmd_ingest(none), DataError);  // no input configured
}

TEST_CASE("synth then fit then report produces the documented artifacts", "[cli][slow]") {
    TempDir tmp("pipeline");
    RunConfig cfg = fast_config(tmp.path / "out");
    REQUIRE(cli::cmd_synth(cfg) == 0);
    CHECK(fs::exists(tmp.path / "out/panels/demo.csv"));
    CHECK(fs::exists(tmp.path / "out/truth/demo_truth.csv"));

    REQUIRE(cli::cmd_fit(cfg) == 0);
    CHECK(fs::exists(tmp.path / "out/samples/demo_samples.csv"));
    CHECK(fs::exists(tmp.path / "out/samples/demo_meta.json"));
    const CsvTable fit_summary = read_csv_file(tmp.path / "out/fit_summary.csv");
    REQUIRE(fit_summary.rows.size() == 1);
    CHECK(fit_summary.rows[0][1] == "ok");
    CHECK(fit_summary.rows[0][2] == "100");

    REQUIRE(cli::cmd_report(cfg) == 0);
    for (const char* f : {"summary_metrics.csv", "summary_players.csv", "top_players.csv",
                          "figure2.csv", "figure2_full.svg", "figure2_zoom.svg"})
        CHECK(fs::exists(tmp.path / "out/report" / f));
    const CsvTable top = read_csv_file(tmp.path / "out/report/top_players.csv");
    CHECK(top.rows.size() == 5);  // top_k defaults to 5

    REQUIRE(cli::cmd_lasso(cfg) == 0);
    CHECK(fs::exists(tmp.path / "out/lasso/demo_path.csv"));
    CHECK(fs::exists(tmp.path / "out/lasso/summary.csv"));

    // Figure 3 appears once lasso results exist.
    REQUIRE(cli::cmd_report(cfg) == 0);
    CHECK(fs::exists(tmp.path / "out/report/figure3.csv"));
    CHECK(fs::exists(tmp.path / "out/report/figure3_p1.svg"));

    // PCA needs >= 2 metrics; add a second synthetic panel.
    RunConfig second = cfg;
    second.truth.metric_name = "demo2";
    second.truth.tau2 = 0.02;
    REQUIRE(cli::cmd_synth(second) == 0);
    REQUIRE(cli::cmd_pca(cfg) == 0);
    CHECK(fs::exists(tmp.path / "out/pca/all_spectrum.csv"));
    CHECK(fs::exists(tmp.path / "out/pca/all.svg"));
    const CsvTable spectrum = read_csv_file(tmp.path / "out/pca/all_spectrum.csv");
    CHECK(spectrum.rows.size() == 2);
}

TEST_CASE("fit isolates per-metric failures", "[cli]") {
    TempDir tmp("fit_fail");
    RunConfig cfg = fast_config(tmp.path / "out");
    REQUIRE(cli::cmd_synth(cfg) == 0);
    // A panel with a single observation cannot be fitted.
    {
        std::ofstream bad(tmp.path / "out/panels/bad.csv");
        bad << "metric,player_id,season,value,opportunity,weight\nbad,p1,2000,1.5,1,1\n";
    }
    REQUIRE(cli::cmd_fit(cfg) == 0);
    const CsvTable summary = read_csv_file(tmp.path / "out/fit_summary.csv");
    REQUIRE(summary.rows.size() == 2);
    std::map<std::string, std::string> status;
    for (const auto& row : summary.rows) status[row[0]] = row[1];
    CHECK(status["demo"] == "ok");
    CHECK(status["bad"] == "error");
}

TEST_CASE("unknown metric selection fails fast", "[cli]") {
    TempDir tmp("select");
    RunConfig cfg = fast_config(tmp.path / "out");
    REQUIRE(cli::cmd_synth(cfg) == 0);
    cfg.metrics = {"nope"};
    CHECK_THROWS_AS(cli::cmd_fit(cfg), DataError);
}

TEST_CASE("parallel fit matches serial fit byte for byte", "[cli]") {
    TempDir tmp("jobs");
    RunConfig serial = fast_config(tmp.path / "serial");
    RunConfig parallel = fast_config(tmp.path / "parallel");
    parallel.jobs = 3;
    for (RunConfig* cfg : {&serial, &parallel}) {
        for (const char* name : {"m_a", "m_b", "m_c", "m_d"}) {
            RunConfig one = *cfg;
            one.truth.metric_name = name;
            REQUIRE(cli::cmd_synth(one) == 0);
        }
        REQUIRE(cli::cmd_fit(*cfg) == 0);
    }
    for (const char* name : {"m_a", "m_b", "m_c", "m_d"}) {
        const std::string f = std::string(name) + "_samples.csv";
        CHECK(slurp(tmp.path / "serial/samples" / f) == slurp(tmp.path / "parallel/samples" / f));
    }
}

TEST_CASE("pca splits metric sets by the high-signal rectangle", "[cli][slow]") {
    TempDir tmp("pcasets");
    RunConfig cfg = fast_config(tmp.path / "out");
    // Three metrics: two with strong signal, one pure noise.
    for (const auto& [name, p1, tau2] :
         std::vector<std::tuple<std::string, double, double>>{
             {"strong1", 0.9, 0.5}, {"strong2", 0.9, 0.5}, {"noise", 0.0, 0.05}}) {
        RunConfig one = cfg;
        one.truth.metric_name = name;
        one.truth.p1 = p1;
        one.truth.tau2 = tau2;
        one.truth.sigma2 = 0.01;
        REQUIRE(cli::cmd_synth(one) == 0);
    }
    REQUIRE(cli::cmd_fit(cfg) == 0);

    // high/rest need the report's classification first.
    RunConfig sets = cfg;
    sets.pca_sets = {"all", "high", "rest"};
    CHECK_THROWS_AS(cli::cmd_pca(sets), DataError);
    REQUIRE(cli::cmd_report(cfg) == 0);
    REQUIRE(cli::cmd_pca(sets) == 0);
    CHECK(fs::exists(tmp.path / "out/pca/all_spectrum.csv"));
    const CsvTable summary = read_csv_file(tmp.path / "out/pca/summary.csv");
    REQUIRE(summary.rows.size() == 3);
    std::map<std::string, std::string> counts;
    for (const auto& row : summary.rows) counts[row[0]] = row[1];
    CHECK(counts["all"] == "3");
    CHECK(counts["high"] == "2");  // the two strong metrics clear the default rectangle
    CHECK(fs::exists(tmp.path / "out/pca/high_spectrum.csv"));
    // "rest" holds a single metric, which pca skips with a note.
    CHECK(counts["rest"] == "1");
}

TEST_CASE("zoom figure honors the configured rectangle", "[cli]") {
    TempDir tmp("zoom");
    RunConfig cfg = fast_config(tmp.path / "out");
    REQUIRE(cli::cmd_synth(cfg) == 0);
    REQUIRE(cli::cmd_fit(cfg) == 0);
    REQUIRE(cli::cmd_report(cfg) == 0);
    const std::string before = slurp(tmp.path / "out/report/figure2_zoom.svg");
    cfg.rect_p1 = 0.25;
    cfg.rect_neg_entropy = -0.55;
    REQUIRE(cli::cmd_report(cfg) == 0);
    const std::string after = slurp(tmp.path / "out/report/figure2_zoom.svg");
    CHECK(before != after);
}

TEST_CASE("pipeline output is byte-identical across runs", "[cli][slow]") {
    TempDir tmp("determinism");
    RunConfig a = fast_config(tmp.path / "a");
    RunConfig b = fast_config(tmp.path / "b");
    for (RunConfig* cfg : {&a, &b}) {
        REQUIRE(cli::cmd_synth(*cfg) == 0);
        REQUIRE(cli::cmd_fit(*cfg) == 0);
        REQUIRE(cli::cmd_report(*cfg) == 0);
        REQUIRE(cli::cmd_lasso(*cfg) == 0);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(tmp.path / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), tmp.path / "a");
        INFO("file " << rel.string());
        CHECK(slurp(entry.path()) == slurp(tmp.path / "b" / rel));
        ++compared;
    }
    CHECK(compared >= 10);
}

#ifdef PANSIG_CLI_BIN
TEST_CASE("binary exit codes follow the contract", "[cli]") {
    TempDir tmp("exitcodes");
    const std::string bin = PANSIG_CLI_BIN;
    const auto run = [&](const std::string& args) {
        const int rc = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(rc);
    };
    CHECK(run("--help") == 0);
    CHECK(run("definitely-not-a-subcommand") == 1);
    CHECK(run("fit --bogus-flag") == 1);
    const std::string out = (tmp.path / "out").string();
    CHECK(run("ingest --raw /nonexistent.csv --out " + out) == 2);
    CHECK(run("synth --players 10 --seasons 2 --out " + out + " --seed 5") == 0);
    CHECK(fs::exists(tmp.path / "out/panels/synthetic.csv"));
    CHECK(run("fit --out " + out + " --iterations 300 --burnin 100 --thin 2 --seed 5") == 0);
    // Usage errors beat data errors: burnin >= total is a config validation
    // failure surfaced as a data error (exit 2).
    CHECK(run("fit --out " + out + " --iterations 100 --burnin 100") == 2);
}
#endif
