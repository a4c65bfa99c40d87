#pragma once
// Batch commands wiring ingest -> chains -> summaries -> validation arms.
// Each command reads/writes artifacts under the configured output directory:
//
//   panels/<metric>.csv             per-metric observation panels
//   truth/<metric>_truth.csv        synth ground truth
//   normality.csv, ingest_summary.csv
//   samples/<metric>_samples.csv + <metric>_meta.json, fit_summary.csv
//   report/...                      summary tables and figure CSV/SVGs
//   lasso/...                       fraction paths and chosen-f summary
//   pca/...                         spectra with null/bootstrap bands
//
// All file writes happen on the coordinating thread; worker threads only
// compute. Per-metric seeds derive deterministically from the master seed.

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "config.hpp"
#include "evaluate.hpp"
#include "ingest.hpp"
#include "lasso.hpp"
#include "pca.hpp"
#include "samples_io.hpp"
#include "svg.hpp"
#include "synth.hpp"

namespace pansig::cli {

namespace fs = std::filesystem;

inline std::uint64_t metric_seed(std::uint64_t master, std::string_view purpose,
                                 std::string_view name) {
    return derive_seed(master, fnv1a64(std::string(purpose) + ":" + std::string(name)));
}

inline fs::path ensure_dir(const fs::path& p) {
    fs::create_directories(p);
    return p;
}

inline std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view extension) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// Loads every panel under <out>/panels, filtered by the metric selection.
inline std::vector<MetricPanel> load_panels(const RunConfig& cfg) {
    const fs::path dir = fs::path(cfg.out_dir) / "panels";
    std::vector<MetricPanel> panels;
    std::set<std::string> names;
    for (const auto& p : sorted_files(dir, ".csv")) {
        panels.push_back(MetricPanel::read_csv(p));
        if (!names.insert(panels.back().name()).second)
            throw DataError("metric '" + panels.back().name() + "' appears in more than one panel file under " +
                            dir.string());
    }
    if (!cfg.metrics.empty()) {
        const std::set<std::string> wanted(cfg.metrics.begin(), cfg.metrics.end());
        std::erase_if(panels, [&](const MetricPanel& p) { return !wanted.count(p.name()); });
        for (const auto& name : wanted) {
            const bool found = std::any_of(panels.begin(), panels.end(),
                                           [&](const MetricPanel& p) { return p.name() == name; });
            if (!found)
                throw DataError("no panel file for metric '" + name + "' under " + dir.string());
        }
    }
    if (panels.empty()) throw DataError("no panel files under " + dir.string());
    return panels;
}

// ---------------------------------------------------------------------------
// ingest

inline int cmd_ingest(const RunConfig& cfg) {
    const fs::path out(cfg.out_dir);
    ensure_dir(out / "panels");

    std::vector<MetricPanel> panels;
    std::vector<std::pair<std::string, std::string>> failures;  // metric, message
    std::vector<std::array<std::string, 3>> drops;              // metric, kept, dropped

    if (!cfg.raw_csv.empty()) {
        auto defs = builtin_definitions();
        if (!cfg.definitions.empty()) defs = load_definitions(cfg.definitions, std::move(defs));
        const auto rows = parse_raw_file(cfg.raw_csv);

        std::vector<MetricDefinition> selected;
        if (cfg.metrics.empty()) {
            selected = defs;
        } else {
            for (const auto& name : cfg.metrics) {
                const auto* d = find_definition(defs, name);
                if (!d) throw DataError("unknown metric '" + name + "'");
                selected.push_back(*d);
            }
        }
        for (const auto& def : selected) {
            try {
                PanelBuild b = build_panel(rows, def);
                drops.push_back({def.name, std::to_string(b.panel.size()),
                                 std::to_string(b.drops.total())});
                panels.push_back(std::move(b.panel));
            } catch (const DataError& e) {
                failures.emplace_back(def.name, e.what());
            }
        }
    } else if (!cfg.metric_dir.empty()) {
        for (const auto& p : sorted_files(cfg.metric_dir, ".csv")) {
            MetricPanel panel = MetricPanel::read_csv(p);
            if (!cfg.metrics.empty() &&
                std::find(cfg.metrics.begin(), cfg.metrics.end(), panel.name()) ==
                    cfg.metrics.end())
                continue;
            drops.push_back({panel.name(), std::to_string(panel.size()), "0"});
            panels.push_back(std::move(panel));
        }
        if (panels.empty()) throw DataError("no per-metric csv files under " + cfg.metric_dir);
    } else {
        throw DataError("ingest needs an input: raw_csv or metric_dir");
    }

    std::set<std::string> stems;
    for (const auto& panel : panels)
        if (!stems.insert(sanitize_name(panel.name())).second)
            throw DataError("metrics '" + panel.name() +
                            "' and another selection collide on panel file name '" +
                            sanitize_name(panel.name()) + ".csv'");

    const NormalityOptions nopt{cfg.skew_threshold, cfg.zero_threshold};
    CsvWriter normality(out / "normality.csv");
    normality.row({"metric", "skewness", "zero_fraction", "approx_normal"});
    for (const auto& panel : panels) {
        panel.write_csv(out / "panels" / (sanitize_name(panel.name()) + ".csv"));
        try {
            const NormalityFlag f = screen_normality(panel, nopt);
            normality.row({f.metric, fmt_double(f.skewness), fmt_double(f.zero_fraction),
                           f.approx_normal ? "1" : "0"});
        } catch (const DataError& e) {
            failures.emplace_back(panel.name(), e.what());
        }
    }
    normality.close();

    CsvWriter summary(out / "ingest_summary.csv");
    summary.row({"metric", "status", "rows", "dropped", "message"});
    for (const auto& d : drops) summary.row({d[0], "ok", d[1], d[2], ""});
    for (const auto& [metric, message] : failures) summary.row({metric, "error", "", "", message});
    summary.close();

    std::cout << "ingest: wrote " << panels.size() << " panel(s)";
    if (!failures.empty()) std::cout << ", " << failures.size() << " failure(s)";
    std::cout << " -> " << (out / "panels").string() << "\n";
    if (panels.empty()) throw DataError("ingest produced no panels");
    return 0;
}

// ---------------------------------------------------------------------------
// synth

inline int cmd_synth(const RunConfig& cfg) {
    const fs::path out(cfg.out_dir);
    ensure_dir(out / "panels");
    ensure_dir(out / "truth");

    TruthParams truth = cfg.truth;
    truth.seed = metric_seed(cfg.seed, "synth", truth.metric_name);
    const SynthPanel s = generate_panel(truth);
    const std::string stem = sanitize_name(truth.metric_name);
    s.panel.write_csv(out / "panels" / (stem + ".csv"));
    write_truth_csv(out / "truth" / (stem + "_truth.csv"), s);
    std::cout << "synth: " << s.panel.players() << " players, " << s.panel.size()
              << " player-seasons -> " << (out / "panels" / (stem + ".csv")).string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit

inline int cmd_fit(const RunConfig& cfg) {
    const std::vector<MetricPanel> panels = load_panels(cfg);
    const fs::path out(cfg.out_dir);
    ensure_dir(out / "samples");

    struct Outcome {
        std::string metric;
        bool ok = false;
        std::string message;
        PosteriorSamples samples;
    };
    std::vector<Outcome> outcomes(panels.size());

    const int jobs = std::max(1, cfg.jobs);
    const auto run_one = [&](std::size_t k) {
        Outcome& o = outcomes[k];
        o.metric = panels[k].name();
        try {
            ChainConfig chain = cfg.chain;
            chain.seed = metric_seed(cfg.seed, "fit", panels[k].name());
            o.samples = run_chain(panels[k], cfg.hyper, chain);
            o.ok = true;
        } catch (const std::exception& e) {
            o.message = e.what();
        }
    };
    // Waves of `jobs` chains; all writes happen afterwards on this thread.
    for (std::size_t base = 0; base < panels.size(); base += static_cast<std::size_t>(jobs)) {
        std::vector<std::thread> pool;
        const std::size_t hi = std::min(panels.size(), base + static_cast<std::size_t>(jobs));
        for (std::size_t k = base; k < hi; ++k) pool.emplace_back(run_one, k);
        for (auto& t : pool) t.join();
    }

    std::size_t ok = 0;
    CsvWriter summary(out / "fit_summary.csv");
    summary.row({"metric", "status", "draws", "seed", "message"});
    for (const auto& o : outcomes) {
        if (o.ok) {
            const std::string stem = sanitize_name(o.metric);
            write_samples(o.samples, out / "samples" / (stem + "_samples.csv"),
                          out / "samples" / (stem + "_meta.json"));
            summary.row({o.metric, "ok", std::to_string(o.samples.draws),
                         std::to_string(o.samples.config.seed), ""});
            ++ok;
        } else {
            summary.row({o.metric, "error", "", "", o.message});
        }
    }
    summary.close();
    std::cout << "fit: " << ok << "/" << outcomes.size() << " chains done -> "
              << (out / "samples").string() << "\n";
    if (ok == 0) throw DataError("every chain failed; see fit_summary.csv");
    return 0;
}

// ---------------------------------------------------------------------------
// report

inline std::vector<PosteriorSamples> load_samples(const RunConfig& cfg) {
    const fs::path dir = fs::path(cfg.out_dir) / "samples";
    std::vector<PosteriorSamples> all;
    for (const auto& meta : sorted_files(dir, ".json")) {
        fs::path csv = meta;
        const std::string stem = meta.stem().string();  // "<name>_meta"
        csv.replace_filename(stem.substr(0, stem.size() - 5) + "_samples.csv");
        all.push_back(read_samples(csv, meta));
    }
    if (!cfg.metrics.empty()) {
        const std::set<std::string> wanted(cfg.metrics.begin(), cfg.metrics.end());
        std::erase_if(all, [&](const PosteriorSamples& s) { return !wanted.count(s.metric); });
    }
    if (all.empty())
        throw DataError("no posterior sample files under " + dir.string() + "; run fit first");
    return all;
}

inline int cmd_report(const RunConfig& cfg) {
    const std::vector<PosteriorSamples> samples = load_samples(cfg);
    const fs::path out(cfg.out_dir);
    ensure_dir(out / "report");

    // Normality flags recomputed from the stored panels when available.
    const NormalityOptions nopt{cfg.skew_threshold, cfg.zero_threshold};
    std::vector<MetricSummary> summaries;
    for (const auto& s : samples) {
        bool approx_normal = true;
        const fs::path panel_path = out / "panels" / (sanitize_name(s.metric) + ".csv");
        if (fs::exists(panel_path)) {
            const MetricPanel panel = MetricPanel::read_csv(panel_path);
            if (panel.size() >= 10) approx_normal = screen_normality(panel, nopt).approx_normal;
        }
        summaries.push_back(summarize(s, approx_normal));
    }

    CsvWriter metrics_csv(out / "report" / "summary_metrics.csv");
    metrics_csv.row({"metric", "p1_hat", "neg_entropy", "mu_hat", "approx_normal"});
    for (const auto& s : summaries)
        metrics_csv.row({s.metric, fmt_double(s.p1_hat), fmt_double(s.neg_entropy),
                         fmt_double(s.mu_hat), s.approx_normal ? "1" : "0"});
    metrics_csv.close();

    CsvWriter players_csv(out / "report" / "summary_players.csv");
    players_csv.row({"metric", "player_id", "gamma_hat", "mean_est", "sd_est"});
    for (const auto& s : summaries)
        for (const auto& p : s.players)
            players_csv.row({s.metric, p.player_id, fmt_double(p.gamma_hat),
                             fmt_double(p.mean_est), fmt_double(p.sd_est)});
    players_csv.close();

    CsvWriter top_csv(out / "report" / "top_players.csv");
    top_csv.row({"metric", "rank", "player_id", "mean_est", "sd_est", "gamma_hat", "mu_hat"});
    for (const auto& s : summaries) {
        const auto ranked = top_players(s, static_cast<std::size_t>(std::max(0, cfg.top_k)),
                                        !cfg.rank_ascending);
        for (std::size_t r = 0; r < ranked.size(); ++r)
            top_csv.row({s.metric, std::to_string(r + 1), ranked[r].player_id,
                         fmt_double(ranked[r].mean_est), fmt_double(ranked[r].sd_est),
                         fmt_double(ranked[r].gamma_hat), fmt_double(s.mu_hat)});
    }
    top_csv.close();

    const HighSignalRect rect{cfg.rect_p1, cfg.rect_neg_entropy};
    const auto scatter = scatter_table(summaries, rect);
    CsvWriter fig2(out / "report" / "figure2.csv");
    fig2.row({"metric", "p1_hat", "neg_entropy", "approx_normal", "high_signal"});
    for (const auto& r : scatter)
        fig2.row({r.metric, fmt_double(r.p1_hat), fmt_double(r.neg_entropy),
                  r.approx_normal ? "1" : "0", r.high_signal ? "1" : "0"});
    fig2.close();

    const auto draw_fig2 = [&](bool zoom) {
        SvgPlot plot(zoom ? "p1_hat vs negative entropy (high-signal zoom)"
                          : "p1_hat vs negative entropy",
                     "negative entropy", "p1_hat");
        if (zoom) {
            const double xpad = 0.04 * std::abs(cfg.rect_neg_entropy);
            plot.set_range(cfg.rect_neg_entropy - xpad, 0.0 + xpad, cfg.rect_p1 - 0.04, 1.04);
        } else {
            plot.set_range(-0.75, 0.03, -0.03, 1.03);
        }
        plot.add_rect(cfg.rect_neg_entropy, cfg.rect_p1, 0.0, 1.0, "#555555");
        for (const auto& r : scatter) {
            if (zoom && !r.high_signal) continue;
            plot.add_point(r.neg_entropy, r.p1_hat, r.approx_normal ? "red" : "black", r.metric);
        }
        plot.save(out / "report" / (zoom ? "figure2_zoom.svg" : "figure2_full.svg"));
    };
    draw_fig2(false);
    draw_fig2(true);

    // Figure-3 scatters when the lasso arm has run.
    const fs::path lasso_summary = out / "lasso" / "summary.csv";
    if (fs::exists(lasso_summary)) {
        const CsvTable t = read_csv_file(lasso_summary);
        const int c_metric = t.require_col("metric");
        const int c_pct = t.require_col("lasso_pct");
        std::map<std::string, double> pct;
        for (const auto& row : t.rows)
            pct[row[static_cast<std::size_t>(c_metric)]] =
                std::stod(row[static_cast<std::size_t>(c_pct)]);

        CsvWriter fig3(out / "report" / "figure3.csv");
        fig3.row({"metric", "lasso_pct", "p1_hat", "neg_entropy", "approx_normal"});
        SvgPlot p1_plot("p1_hat vs Lasso%", "Lasso%", "p1_hat");
        SvgPlot ne_plot("Lasso% vs negative entropy", "negative entropy", "Lasso%");
        p1_plot.set_range(-3.0, 103.0, -0.03, 1.03);
        for (const auto& r : scatter) {
            const auto it = pct.find(r.metric);
            if (it == pct.end()) continue;
            fig3.row({r.metric, fmt_double(it->second), fmt_double(r.p1_hat),
                      fmt_double(r.neg_entropy), r.approx_normal ? "1" : "0"});
            const std::string color = r.approx_normal ? "red" : "black";
            p1_plot.add_point(it->second, r.p1_hat, color, r.metric);
            ne_plot.add_point(r.neg_entropy, it->second, color, r.metric);
        }
        fig3.close();
        p1_plot.save(out / "report" / "figure3_p1.svg");
        ne_plot.save(out / "report" / "figure3_negH.svg");
    }

    std::cout << "report: " << summaries.size() << " metric(s) -> "
              << (out / "report").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// lasso

inline int cmd_lasso(const RunConfig& cfg) {
    const std::vector<MetricPanel> panels = load_panels(cfg);
    const fs::path out(cfg.out_dir);
    ensure_dir(out / "lasso");

    const std::vector<double> grid = default_fraction_grid(cfg.lasso_grid);
    CsvWriter summary(out / "lasso" / "summary.csv");
    summary.row({"metric", "chosen_f", "lasso_pct", "cv_rmse", "degenerate"});
    for (const auto& panel : panels) {
        const CvResult cv = cross_validate(panel, grid, cfg.folds, cfg.repeats,
                                           metric_seed(cfg.seed, "lasso", panel.name()));
        const std::vector<LassoFit> path = fraction_path(panel, std::vector<double>{cv.chosen_f});
        const LassoFit& chosen = path.front();
        double chosen_rmse = 0.0;
        for (std::size_t g = 0; g < cv.grid.size(); ++g)
            if (cv.grid[g] == cv.chosen_f) chosen_rmse = cv.mean_rmse[g];

        CsvWriter path_csv(out / "lasso" / (sanitize_name(panel.name()) + "_path.csv"));
        path_csv.row({"fraction", "mean_rmse"});
        for (std::size_t g = 0; g < cv.grid.size(); ++g)
            path_csv.row({fmt_double(cv.grid[g]), fmt_double(cv.mean_rmse[g])});
        path_csv.close();

        summary.row({panel.name(), fmt_double(cv.chosen_f), fmt_double(chosen.pct_nonzero),
                     fmt_double(chosen_rmse), chosen.degenerate ? "1" : "0"});
    }
    summary.close();
    std::cout << "lasso: " << panels.size() << " metric(s) -> " << (out / "lasso").string()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// pca

inline int cmd_pca(const RunConfig& cfg) {
    std::vector<MetricPanel> panels = load_panels(cfg);
    // SBPA is excluded from every PCA set: too many player-seasons lose their
    // denominator (SB + CS = 0).
    std::erase_if(panels, [](const MetricPanel& p) { return p.name() == "SBPA"; });
    if (panels.size() < 2) throw DataError("pca: fewer than 2 usable metrics after exclusions");

    const fs::path out(cfg.out_dir);
    ensure_dir(out / "pca");

    // The high-signal split comes from the report stage when requested.
    std::set<std::string> high;
    const bool needs_split =
        std::any_of(cfg.pca_sets.begin(), cfg.pca_sets.end(),
                    [](const std::string& s) { return s == "high" || s == "rest"; });
    if (needs_split) {
        const fs::path fig2 = out / "report" / "figure2.csv";
        if (!fs::exists(fig2))
            throw DataError("pca sets 'high'/'rest' need report/figure2.csv; run report first");
        const CsvTable t = read_csv_file(fig2);
        const int c_metric = t.require_col("metric");
        const int c_high = t.require_col("high_signal");
        for (const auto& row : t.rows)
            if (row[static_cast<std::size_t>(c_high)] == "1")
                high.insert(row[static_cast<std::size_t>(c_metric)]);
    }

    CsvWriter summary(out / "pca" / "summary.csv");
    summary.row({"set", "metrics", "rows", "significant_components"});
    for (const std::string& set : cfg.pca_sets) {
        std::vector<MetricPanel> chosen;
        for (const auto& p : panels) {
            const bool is_high = high.count(p.name()) > 0;
            if (set == "all" || (set == "high" && is_high) || (set == "rest" && !is_high))
                chosen.push_back(p);
        }
        if (chosen.size() < 2) {
            summary.row({set, std::to_string(chosen.size()), "0", "skipped"});
            continue;
        }
        const PcaInput input = assemble(chosen);
        PcaResult result = decompose(input);
        result.null_band = permutation_band(input, cfg.pca_reps, cfg.pca_quantile,
                                            metric_seed(cfg.seed, "pca-perm", set));
        std::tie(result.boot_lo, result.boot_hi) =
            bootstrap_band(input, cfg.pca_reps, cfg.pca_quantile,
                           metric_seed(cfg.seed, "pca-boot", set));
        const int significant = significant_components(result.eigenvalues, result.null_band);

        CsvWriter spectrum(out / "pca" / (set + "_spectrum.csv"));
        spectrum.row({"component", "observed", "null_band", "boot_lo", "boot_hi"});
        std::vector<std::pair<double, double>> observed_line, null_line;
        std::vector<double> xs;
        for (Eigen::Index c = 0; c < result.eigenvalues.size(); ++c) {
            const auto k = static_cast<std::size_t>(c);
            spectrum.row({std::to_string(c + 1), fmt_double(result.eigenvalues[c]),
                          fmt_double(result.null_band[k]), fmt_double(result.boot_lo[k]),
                          fmt_double(result.boot_hi[k])});
            xs.push_back(static_cast<double>(c + 1));
            observed_line.emplace_back(xs.back(), result.eigenvalues[c]);
            null_line.emplace_back(xs.back(), result.null_band[k]);
        }
        spectrum.close();

        SvgPlot plot("variance by principal component (" + set + ")", "component",
                     "variance");
        plot.add_band(xs, result.boot_lo, result.boot_hi, "#dd6666");
        plot.add_line(observed_line, "black");
        plot.add_line(null_line, "#888888", true);
        plot.save(out / "pca" / (set + ".svg"));

        summary.row({set, std::to_string(chosen.size()), std::to_string(input.raw.rows()),
                     std::to_string(significant)});
    }
    summary.close();
    std::cout << "pca: sets done -> " << (out / "pca").string() << "\n";
    return 0;
}

}  // namespace pansig::cli
