#pragma once
// MetricPanel: one metric's player-season observations with variance weights.
//
// The panel is canonical: players are indexed in lexicographic player_id
// order and observations are sorted by (player, season), so two panels built
// from the same observations in any row order are identical.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "csv.hpp"

namespace pansig {

// A raw (pre-index) observation. `weight` may be NaN, in which case it is
// derived from the opportunity count when the panel is assembled.
struct RawObs {
    std::string player_id;
    int season = 0;
    double value = 0.0;
    double opportunity = 0.0;
    double weight = std::numeric_limits<double>::quiet_NaN();
};

struct PanelObs {
    std::uint32_t player = 0;  // index into player_ids()
    int season = 0;
    double value = 0.0;
    double opportunity = 0.0;
    double weight = 1.0;
};

class MetricPanel {
  public:
    MetricPanel() = default;

    // Builds a panel from observations carrying opportunity counts n_ij.
    // Weights are w_ij = n_bar / n_ij with n_bar the panel mean opportunity
    // count, so sigma^2 keeps the scale of a season with average
    // opportunities. All n_ij must be > 0 (callers filter first).
    static MetricPanel from_opportunities(std::string name, std::vector<RawObs> obs) {
        if (obs.empty()) throw DataError("empty panel for metric '" + name + "'");
        double n_sum = 0.0;
        for (const auto& o : obs) {
            if (!(o.opportunity > 0.0) || !std::isfinite(o.opportunity))
                throw DataError("metric '" + name + "': nonpositive opportunity count for player '" +
                                o.player_id + "' season " + std::to_string(o.season));
            n_sum += o.opportunity;
        }
        const double n_bar = n_sum / static_cast<double>(obs.size());
        for (auto& o : obs) o.weight = n_bar / o.opportunity;
        return MetricPanel(std::move(name), std::move(obs));
    }

    // Builds a panel from observations with explicit weights.
    static MetricPanel from_weights(std::string name, std::vector<RawObs> obs) {
        if (obs.empty()) throw DataError("empty panel for metric '" + name + "'");
        return MetricPanel(std::move(name), std::move(obs));
    }

    const std::string& name() const { return name_; }
    std::size_t players() const { return player_ids_.size(); }         // m
    std::size_t size() const { return obs_.size(); }                   // N
    const std::vector<std::string>& player_ids() const { return player_ids_; }
    const std::string& player_id(std::size_t i) const { return player_ids_[i]; }
    std::span<const PanelObs> observations() const { return obs_; }

    // Observation range [begin, end) for player i.
    std::pair<std::size_t, std::size_t> span(std::size_t i) const { return spans_[i]; }

    std::uint64_t hash() const {
        std::uint64_t h = fnv1a64(name_);
        for (const auto& o : obs_) {
            h = fnv1a64(player_ids_[o.player], h);
            h = fnv1a64_mix(static_cast<std::uint64_t>(o.season), h);
            h = fnv1a64_mix(o.value, h);
            h = fnv1a64_mix(o.weight, h);
        }
        return h;
    }

    void write_csv(const std::filesystem::path& path) const {
        CsvWriter w(path);
        w.row({"metric", "player_id", "season", "value", "opportunity", "weight"});
        for (const auto& o : obs_)
            w.row({name_, player_ids_[o.player], std::to_string(o.season),
                   fmt_double(o.value), fmt_double(o.opportunity), fmt_double(o.weight)});
        w.close();
    }

    static MetricPanel read_csv(const std::filesystem::path& path) {
        const CsvTable t = read_csv_file(path);
        const int c_metric = t.require_col("metric");
        const int c_pid = t.require_col("player_id");
        const int c_season = t.require_col("season");
        const int c_value = t.require_col("value");
        const int c_opp = t.col("opportunity");
        const int c_weight = t.col("weight");
        if (c_opp < 0 && c_weight < 0)
            throw DataError(t.source + ": need an 'opportunity' or 'weight' column");
        if (t.rows.empty()) throw DataError(t.source + ": no observations");
        std::string name = t.rows.front()[static_cast<std::size_t>(c_metric)];
        std::vector<RawObs> obs;
        obs.reserve(t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            if (row[static_cast<std::size_t>(c_metric)] != name)
                throw DataError(t.source + ": line " + std::to_string(r + 2) +
                                ": mixed metric names in one panel file");
            RawObs o;
            o.player_id = row[static_cast<std::size_t>(c_pid)];
            o.season = parse_int(row[static_cast<std::size_t>(c_season)], t.source, r + 2, "season");
            o.value = parse_double(row[static_cast<std::size_t>(c_value)], t.source, r + 2, "value");
            if (c_opp >= 0)
                o.opportunity = parse_double(row[static_cast<std::size_t>(c_opp)], t.source, r + 2,
                                             "opportunity");
            if (c_weight >= 0)
                o.weight = parse_double(row[static_cast<std::size_t>(c_weight)], t.source, r + 2,
                                        "weight");
            obs.push_back(std::move(o));
        }
        if (c_weight >= 0) return from_weights(std::move(name), std::move(obs));
        return from_opportunities(std::move(name), std::move(obs));
    }

  private:
    MetricPanel(std::string name, std::vector<RawObs> raw) : name_(std::move(name)) {
        // Canonical player index: lexicographic player_id order.
        std::map<std::string, std::uint32_t> index;
        for (const auto& o : raw) index.emplace(o.player_id, 0);
        player_ids_.reserve(index.size());
        for (auto& [id, idx] : index) {
            idx = static_cast<std::uint32_t>(player_ids_.size());
            player_ids_.push_back(id);
        }
        obs_.reserve(raw.size());
        for (const auto& o : raw) {
            if (!std::isfinite(o.value))
                throw DataError("metric '" + name_ + "': non-finite value for player '" +
                                o.player_id + "'");
            if (!(o.weight > 0.0) || !std::isfinite(o.weight))
                throw DataError("metric '" + name_ + "': nonpositive weight for player '" +
                                o.player_id + "' season " + std::to_string(o.season));
            PanelObs p;
            p.player = index.at(o.player_id);
            p.season = o.season;
            p.value = o.value;
            p.opportunity = o.opportunity;
            p.weight = o.weight;
            obs_.push_back(p);
        }
        std::sort(obs_.begin(), obs_.end(), [](const PanelObs& a, const PanelObs& b) {
            if (a.player != b.player) return a.player < b.player;
            return a.season < b.season;
        });
        for (std::size_t k = 1; k < obs_.size(); ++k)
            if (obs_[k].player == obs_[k - 1].player && obs_[k].season == obs_[k - 1].season)
                throw DataError("metric '" + name_ + "': duplicate (player_id, season) = ('" +
                                player_ids_[obs_[k].player] + "', " +
                                std::to_string(obs_[k].season) + ")");
        spans_.resize(player_ids_.size());
        std::size_t begin = 0;
        for (std::size_t k = 0; k <= obs_.size(); ++k) {
            if (k == obs_.size() || (k > begin && obs_[k].player != obs_[begin].player)) {
                spans_[obs_[begin].player] = {begin, k};
                begin = k;
            }
        }
    }

    static int parse_int(const std::string& s, const std::string& src, std::size_t line,
                         const char* col) {
        try {
            std::size_t pos = 0;
            const int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw DataError(src + ": line " + std::to_string(line) + ": column '" + col +
                            "': cannot parse integer from '" + s + "'");
        }
    }

    static double parse_double(const std::string& s, const std::string& src, std::size_t line,
                               const char* col) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw DataError(src + ": line " + std::to_string(line) + ": column '" + col +
                            "': cannot parse number from '" + s + "'");
        }
    }

    std::string name_;
    std::vector<std::string> player_ids_;
    std::vector<PanelObs> obs_;
    std::vector<std::pair<std::size_t, std::size_t>> spans_;
};

}  // namespace pansig
