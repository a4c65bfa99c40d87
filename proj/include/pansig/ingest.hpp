#pragma once
// Ingestion: raw counting-stat CSVs -> per-metric panels, plus the normality
// screen applied to each metric's observed values.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "csv.hpp"
#include "metrics.hpp"
#include "panel.hpp"

#include <nlohmann/json.hpp>

namespace pansig {

// ---------------------------------------------------------------------------
// parse_raw

namespace detail {

inline long long parse_count(const std::string& s, const std::string& src, std::size_t line,
                             const std::string& col) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(src + ": row " + std::to_string(line) + ": column '" + col +
                        "': cannot parse integer from '" + s + "'");
    if (v < 0)
        throw DataError(src + ": row " + std::to_string(line) + ": column '" + col +
                        "': negative count " + s);
    return v;
}

inline double parse_real(const std::string& s, const std::string& src, std::size_t line,
                         const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(src + ": row " + std::to_string(line) + ": column '" + col +
                        "': cannot parse number from '" + s + "'");
    }
}

}  // namespace detail

// Parses a raw season file. Required header columns: player_id, season. The 26
// counting-stat columns and the 4 precomputed real columns are read when
// present; blank cells become missing values; unknown columns are ignored.
inline std::vector<RawSeasonRow> parse_raw(std::istream& in, const std::string& source) {
    const CsvTable t = read_csv(in, source);
    const int c_pid = t.require_col("player_id");
    const int c_season = t.require_col("season");

    std::vector<std::pair<int, CountField>> count_cols;
    for (int f = 0; f < kNumCountFields; ++f) {
        const int c = t.col(count_field_name(static_cast<CountField>(f)));
        if (c >= 0) count_cols.emplace_back(c, static_cast<CountField>(f));
    }
    std::vector<std::pair<int, int>> pass_cols;  // column index, pass slot
    for (int p = 0; p < 4; ++p) {
        const int c = t.col(kPassColumns[p]);
        if (c >= 0) pass_cols.emplace_back(c, p);
    }

    std::vector<RawSeasonRow> rows;
    rows.reserve(t.rows.size());
    std::set<std::pair<std::string, int>> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& rec = t.rows[r];
        const std::size_t line = r + 2;  // 1-based, after header
        RawSeasonRow row;
        row.player_id = rec[static_cast<std::size_t>(c_pid)];
        if (row.player_id.empty())
            throw DataError(source + ": row " + std::to_string(line) + ": empty player_id");
        row.season = static_cast<int>(
            detail::parse_count(rec[static_cast<std::size_t>(c_season)], source, line, "season"));
        if (!seen.emplace(row.player_id, row.season).second)
            throw DataError(source + ": row " + std::to_string(line) + ": duplicate (player_id, season) = ('" +
                            row.player_id + "', " + std::to_string(row.season) + ")");
        for (const auto& [c, f] : count_cols) {
            const std::string& cell = rec[static_cast<std::size_t>(c)];
            if (cell.empty()) continue;
            row.counts[static_cast<int>(f)] =
                detail::parse_count(cell, source, line, count_field_name(f));
        }
        for (const auto& [c, p] : pass_cols) {
            const std::string& cell = rec[static_cast<std::size_t>(c)];
            if (cell.empty()) continue;
            row.pass[static_cast<std::size_t>(p)] =
                detail::parse_real(cell, source, line, kPassColumns[p]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<RawSeasonRow> parse_raw_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return parse_raw(in, path.string());
}

// ---------------------------------------------------------------------------
// build_panel

struct PanelBuild {
    MetricPanel panel;
    DropCounts drops;
};

// Computes y_ij and the opportunity count for every usable row; rows with
// missing recipe fields, zero denominators, zero opportunity counts, or
// seasons before the metric's first valid season are dropped and counted.
inline PanelBuild build_panel(std::span<const RawSeasonRow> rows, const MetricDefinition& def) {
    std::vector<RawObs> obs;
    obs.reserve(rows.size());
    DropCounts drops;
    for (const RawSeasonRow& row : rows) {
        if (row.season < def.available_from) {
            ++drops.pre_available;
            continue;
        }
        DropReason why = DropReason::None;
        const auto y = eval_metric_value(def, row, why);
        if (!y) {
            if (why == DropReason::ZeroDenominator) ++drops.zero_denominator;
            else ++drops.missing_field;
            continue;
        }
        const auto n = eval_weight_recipe(def.weight, row);
        if (!n) {
            ++drops.missing_field;
            continue;
        }
        if (*n <= 0.0) {
            ++drops.zero_opportunity;
            continue;
        }
        RawObs o;
        o.player_id = row.player_id;
        o.season = row.season;
        o.value = *y;
        o.opportunity = *n;
        obs.push_back(std::move(o));
    }
    if (obs.empty()) {
        std::string detail = "metric '" + def.name + "': no usable rows (" +
                             std::to_string(drops.total()) + " dropped)";
        if (def.kind == MetricDefinition::Kind::Passthrough && drops.missing_field > 0)
            detail += "; passthrough column '" +
                      std::string(kPassColumns[static_cast<std::size_t>(def.pass_column)]) +
                      "' absent";
        throw DataError(detail);
    }
    return PanelBuild{MetricPanel::from_opportunities(def.name, std::move(obs)), drops};
}

// ---------------------------------------------------------------------------
// Normality screen

struct NormalityFlag {
    std::string metric;
    double skewness = 0.0;
    double zero_fraction = 0.0;
    bool approx_normal = true;
};

struct NormalityOptions {
    double skew_threshold = 2.0;
    double zero_threshold = 0.5;
};

// Sample skewness g1 = m3 / m2^(3/2) with population (1/N) central moments;
// defined as 0 for zero-variance samples.
inline double sample_skewness(std::span<const double> xs) {
    const double mu = mean_of(xs);
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : xs) {
        const double d = x - mu;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

inline NormalityFlag screen_normality(const MetricPanel& panel,
                                      const NormalityOptions& opt = {}) {
    if (panel.size() < 10)
        throw DataError("metric '" + panel.name() + "': normality screen needs at least 10 observations, have " +
                        std::to_string(panel.size()));
    std::vector<double> ys;
    ys.reserve(panel.size());
    std::size_t zeros = 0;
    for (const auto& o : panel.observations()) {
        ys.push_back(o.value);
        if (o.value == 0.0) ++zeros;
    }
    NormalityFlag f;
    f.metric = panel.name();
    f.skewness = sample_skewness(ys);
    f.zero_fraction = static_cast<double>(zeros) / static_cast<double>(panel.size());
    f.approx_normal =
        std::abs(f.skewness) <= opt.skew_threshold && f.zero_fraction <= opt.zero_threshold;
    return f;
}

// ---------------------------------------------------------------------------
// User-supplied metric definitions (JSON)
//
// Format: an array of objects. Ratio metrics:
//   {"name":"AVG","numerator":[["H",1]],"denominator":[["AB",1]],
//    "weight":"AB","available_from":0}
// with optional "numerator2"/"denominator2" for a second additive ratio.
// Passthrough metrics: {"name":"Spd","column":"Spd","weight":"PA"}.
// Weight strings: a count column name, "PA*", "SB+CS", or "AB*PA*".
// Definitions replace shipped ones with the same name; new names are added.

namespace detail {

inline WeightRecipe parse_weight_recipe(const std::string& s, const std::string& where) {
    if (s == "PA*" || s == "PA_star") return {WeightRecipe::Kind::PaStar, CountField::PA};
    if (s == "SB+CS") return {WeightRecipe::Kind::SumSbCs, CountField::SB};
    if (s == "AB*PA*" || s == "AB*PA_star")
        return {WeightRecipe::Kind::GeomeanAbPaStar, CountField::AB};
    const auto f = count_field_from_name(s);
    if (!f) throw DataError(where + ": unknown weight recipe '" + s + "'");
    return {WeightRecipe::Kind::Field, *f};
}

inline std::vector<Term> parse_terms(const nlohmann::json& j, const std::string& where) {
    std::vector<Term> terms;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw DataError(where + ": term must be [\"FIELD\", coef]");
        const auto f = count_field_from_name(e[0].get<std::string>());
        if (!f) throw DataError(where + ": unknown count field '" + e[0].get<std::string>() + "'");
        terms.push_back(Term{*f, e[1].get<double>()});
    }
    if (terms.empty()) throw DataError(where + ": empty term list");
    return terms;
}

}  // namespace detail

inline std::vector<MetricDefinition> load_definitions(const std::filesystem::path& path,
                                                      std::vector<MetricDefinition> base) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open definitions file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw DataError(path.string() + ": expected a JSON array");
    for (const auto& j : doc) {
        const std::string where = path.string() + ": definition '" +
                                  j.value("name", std::string("<unnamed>")) + "'";
        if (!j.contains("name")) throw DataError(path.string() + ": definition without a name");
        MetricDefinition d;
        d.name = j.at("name").get<std::string>();
        d.available_from = j.value("available_from", 0);
        if (!j.contains("weight")) throw DataError(where + ": missing weight recipe");
        d.weight = detail::parse_weight_recipe(j.at("weight").get<std::string>(), where);
        if (j.contains("column")) {
            d.kind = MetricDefinition::Kind::Passthrough;
            const std::string col = j.at("column").get<std::string>();
            d.pass_column = -1;
            for (int p = 0; p < 4; ++p)
                if (col == kPassColumns[p]) d.pass_column = p;
            if (d.pass_column < 0)
                throw DataError(where + ": unknown passthrough column '" + col + "'");
        } else {
            d.kind = MetricDefinition::Kind::Ratio;
            d.ratio.num = detail::parse_terms(j.at("numerator"), where);
            if (j.contains("denominator"))
                d.ratio.den = detail::parse_terms(j.at("denominator"), where);
            if (j.contains("numerator2")) {
                d.kind = MetricDefinition::Kind::RatioSum;
                d.ratio2.num = detail::parse_terms(j.at("numerator2"), where);
                if (j.contains("denominator2"))
                    d.ratio2.den = detail::parse_terms(j.at("denominator2"), where);
            }
        }
        bool replaced = false;
        for (auto& b : base)
            if (b.name == d.name) {
                b = d;
                replaced = true;
            }
        if (!replaced) base.push_back(std::move(d));
    }
    return base;
}

}  // namespace pansig
