#pragma once
// Raw season rows and the shipped metric definitions.
//
// A metric definition is a small recipe over raw counting stats: a linear
// numerator over a linear denominator (counts are the degenerate case with
// denominator 1), a sum of two such ratios (OPS), or a passthrough column for
// metrics whose formula is supplied externally (wOBA, wRC, wRAA, Spd). Each
// definition also names the opportunity count that drives the observation's
// variance weight.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace pansig {

enum class CountField : int {
    PA, AB, H, B1, B2, B3, HR, R, RBI, BB, IBB, K, HBP,
    SF, SH, GDP, SB, CS, BUH, GB, FB, LD, IFFB, IFH, BIP, OB,
};

inline constexpr int kNumCountFields = 26;

inline const char* count_field_name(CountField f) {
    static constexpr const char* names[kNumCountFields] = {
        "PA", "AB", "H", "1B", "2B", "3B", "HR", "R", "RBI", "BB", "IBB", "K", "HBP",
        "SF", "SH", "GDP", "SB", "CS", "BUH", "GB", "FB", "LD", "IFFB", "IFH", "BIP", "OB",
    };
    return names[static_cast<int>(f)];
}

inline std::optional<CountField> count_field_from_name(std::string_view name) {
    for (int i = 0; i < kNumCountFields; ++i)
        if (name == count_field_name(static_cast<CountField>(i)))
            return static_cast<CountField>(i);
    return std::nullopt;
}

inline constexpr const char* kPassColumns[4] = {"wOBA", "wRC", "wRAA", "Spd"};

struct RawSeasonRow {
    std::string player_id;
    int season = 0;
    std::array<std::optional<long long>, kNumCountFields> counts{};
    std::array<std::optional<double>, 4> pass{};  // wOBA, wRC, wRAA, Spd

    std::optional<long long> count(CountField f) const { return counts[static_cast<int>(f)]; }
};

struct Term {
    CountField field;
    double coef = 1.0;
};

// num / den, evaluated on one RawSeasonRow; empty den means denominator 1.
struct LinearRatio {
    std::vector<Term> num;
    std::vector<Term> den;
};

struct WeightRecipe {
    enum class Kind { Field, PaStar, SumSbCs, GeomeanAbPaStar } kind = Kind::Field;
    CountField field = CountField::PA;
};

struct MetricDefinition {
    enum class Kind { Ratio, RatioSum, Passthrough };

    std::string name;
    Kind kind = Kind::Ratio;
    LinearRatio ratio;
    LinearRatio ratio2;        // second term when kind == RatioSum
    int pass_column = -1;      // index into kPassColumns when kind == Passthrough
    WeightRecipe weight;
    int available_from = 0;    // first season with data for this metric

    bool is_simple_ratio() const { return kind == Kind::Ratio && !ratio.den.empty(); }
};

namespace detail {

inline std::optional<double> eval_terms(const std::vector<Term>& terms, const RawSeasonRow& row) {
    double s = 0.0;
    for (const Term& t : terms) {
        const auto c = row.count(t.field);
        if (!c) return std::nullopt;
        s += t.coef * static_cast<double>(*c);
    }
    return s;
}

}  // namespace detail

// Why a row contributes no observation to a panel.
enum class DropReason { None, PreAvailable, MissingField, ZeroDenominator, ZeroOpportunity };

struct DropCounts {
    std::size_t pre_available = 0;
    std::size_t missing_field = 0;
    std::size_t zero_denominator = 0;
    std::size_t zero_opportunity = 0;

    std::size_t total() const {
        return pre_available + missing_field + zero_denominator + zero_opportunity;
    }
};

// Opportunity count n_ij for one row, or nullopt if a needed count is missing
// or the recipe evaluates to a nonpositive value.
inline std::optional<double> eval_weight_recipe(const WeightRecipe& w, const RawSeasonRow& row) {
    switch (w.kind) {
        case WeightRecipe::Kind::Field: {
            const auto c = row.count(w.field);
            if (!c) return std::nullopt;
            return static_cast<double>(*c);
        }
        case WeightRecipe::Kind::PaStar: {
            const auto pa = row.count(CountField::PA);
            const auto sh = row.count(CountField::SH);
            if (!pa || !sh) return std::nullopt;
            return static_cast<double>(*pa - *sh);
        }
        case WeightRecipe::Kind::SumSbCs: {
            const auto sb = row.count(CountField::SB);
            const auto cs = row.count(CountField::CS);
            if (!sb || !cs) return std::nullopt;
            return static_cast<double>(*sb + *cs);
        }
        case WeightRecipe::Kind::GeomeanAbPaStar: {
            // The Appendix lists "AB x PA*" for OPS; the geometric mean keeps
            // the opportunity count on the scale of a single count.
            const auto ab = row.count(CountField::AB);
            const auto pa = row.count(CountField::PA);
            const auto sh = row.count(CountField::SH);
            if (!ab || !pa || !sh) return std::nullopt;
            const double pastar = static_cast<double>(*pa - *sh);
            const double abv = static_cast<double>(*ab);
            if (abv <= 0.0 || pastar <= 0.0) return 0.0;
            return std::sqrt(abv * pastar);
        }
    }
    return std::nullopt;
}

// Metric value y_ij for one row, or the reason it cannot be computed.
inline std::optional<double> eval_metric_value(const MetricDefinition& def,
                                               const RawSeasonRow& row, DropReason& why) {
    why = DropReason::None;
    if (def.kind == MetricDefinition::Kind::Passthrough) {
        const auto v = row.pass[static_cast<std::size_t>(def.pass_column)];
        if (!v) {
            why = DropReason::MissingField;
            return std::nullopt;
        }
        return *v;
    }
    const auto one = [&](const LinearRatio& r) -> std::optional<double> {
        const auto num = detail::eval_terms(r.num, row);
        if (!num) {
            why = DropReason::MissingField;
            return std::nullopt;
        }
        if (r.den.empty()) return *num;
        const auto den = detail::eval_terms(r.den, row);
        if (!den) {
            why = DropReason::MissingField;
            return std::nullopt;
        }
        if (*den <= 0.0) {
            why = DropReason::ZeroDenominator;
            return std::nullopt;
        }
        return *num / *den;
    };
    const auto a = one(def.ratio);
    if (!a) return std::nullopt;
    if (def.kind == MetricDefinition::Kind::Ratio) return a;
    const auto b = one(def.ratio2);
    if (!b) return std::nullopt;
    return *a + *b;
}

// The 50 shipped metric definitions, following the Appendix tables. The ten
// batted-ball metrics are only available from the 2002 season.
inline const std::vector<MetricDefinition>& builtin_definitions() {
    static const std::vector<MetricDefinition> defs = [] {
        using K = MetricDefinition::Kind;
        using F = CountField;
        std::vector<MetricDefinition> v;

        const auto wf = [](CountField f) {
            return WeightRecipe{WeightRecipe::Kind::Field, f};
        };
        const auto count = [&](std::string name, F f, WeightRecipe w, int from = 0) {
            MetricDefinition d;
            d.name = std::move(name);
            d.kind = K::Ratio;
            d.ratio.num = {{f, 1.0}};
            d.weight = w;
            d.available_from = from;
            v.push_back(std::move(d));
        };
        const auto rate = [&](std::string name, std::vector<Term> num, std::vector<Term> den,
                              WeightRecipe w, int from = 0) {
            MetricDefinition d;
            d.name = std::move(name);
            d.kind = K::Ratio;
            d.ratio.num = std::move(num);
            d.ratio.den = std::move(den);
            d.weight = w;
            d.available_from = from;
            v.push_back(std::move(d));
        };
        const auto pass = [&](std::string name, int col, WeightRecipe w) {
            MetricDefinition d;
            d.name = std::move(name);
            d.kind = K::Passthrough;
            d.pass_column = col;
            d.weight = w;
            v.push_back(std::move(d));
        };

        const WeightRecipe w_pa = wf(F::PA);
        const WeightRecipe w_pastar{WeightRecipe::Kind::PaStar, F::PA};

        // 1. Simple hitting totals and rates.
        count("1B", F::B1, w_pa);
        rate("1B/PA", {{F::B1, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("2B", F::B2, w_pa);
        rate("2B/PA", {{F::B2, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("3B", F::B3, w_pa);
        rate("3B/PA", {{F::B3, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("HR", F::HR, w_pa);
        rate("HR/PA", {{F::HR, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("R", F::R, w_pa);
        rate("R/PA", {{F::R, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("RBI", F::RBI, w_pa);
        rate("RBI/PA", {{F::RBI, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("BB", F::BB, w_pa);
        rate("BB/PA", {{F::BB, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("IBB", F::IBB, w_pa);
        rate("IBB/PA", {{F::IBB, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("K", F::K, w_pa);
        rate("K/PA", {{F::K, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("HBP", F::HBP, w_pa);
        rate("HBP/PA", {{F::HBP, 1.0}}, {{F::PA, 1.0}}, w_pa);
        count("BUH", F::BUH, wf(F::H), 2002);
        rate("BUH/H", {{F::BUH, 1.0}}, {{F::H, 1.0}}, wf(F::H), 2002);
        count("H", F::H, w_pa);
        count("GDP", F::GDP, w_pa);
        count("SF", F::SF, w_pa);
        count("SH", F::SH, w_pa);

        // 2. More complicated hitting totals and rates. Total bases enters as
        // 1B + 2*2B + 3*3B + 4*HR.
        const std::vector<Term> tb = {{F::B1, 1.0}, {F::B2, 2.0}, {F::B3, 3.0}, {F::HR, 4.0}};
        rate("OBP", {{F::OB, 1.0}}, {{F::PA, 1.0}, {F::SH, -1.0}}, w_pastar);
        rate("AVG", {{F::H, 1.0}}, {{F::AB, 1.0}}, wf(F::AB));
        rate("SLG", tb, {{F::AB, 1.0}}, wf(F::AB));
        {
            MetricDefinition d;
            d.name = "OPS";
            d.kind = K::RatioSum;
            d.ratio.num = {{F::OB, 1.0}};
            d.ratio.den = {{F::PA, 1.0}, {F::SH, -1.0}};
            d.ratio2.num = tb;
            d.ratio2.den = {{F::AB, 1.0}};
            d.weight = WeightRecipe{WeightRecipe::Kind::GeomeanAbPaStar, F::AB};
            v.push_back(std::move(d));
        }
        rate("ISO", {{F::B2, 1.0}, {F::B3, 2.0}, {F::HR, 3.0}}, {{F::AB, 1.0}}, wf(F::AB));
        rate("BB/K", {{F::BB, 1.0}}, {{F::K, 1.0}}, w_pa);
        rate("HR/FB", {{F::HR, 1.0}}, {{F::FB, 1.0}}, w_pa, 2002);
        rate("GB/FB", {{F::GB, 1.0}}, {{F::FB, 1.0}}, wf(F::BIP), 2002);
        rate("BABIP", {{F::H, 1.0}, {F::HR, -1.0}}, {{F::BIP, 1.0}}, wf(F::BIP));
        rate("LD/BIP", {{F::LD, 1.0}}, {{F::BIP, 1.0}}, wf(F::BIP), 2002);
        rate("GB/BIP", {{F::GB, 1.0}}, {{F::BIP, 1.0}}, wf(F::BIP), 2002);
        rate("FB/BIP", {{F::FB, 1.0}}, {{F::BIP, 1.0}}, wf(F::BIP), 2002);
        rate("IFFB/FB", {{F::IFFB, 1.0}}, {{F::FB, 1.0}}, wf(F::FB), 2002);
        count("IFH", F::IFH, wf(F::GB), 2002);
        rate("IFH/H", {{F::IFH, 1.0}}, {{F::H, 1.0}}, wf(F::GB), 2002);
        pass("wOBA", 0, w_pastar);
        pass("wRC", 1, w_pa);
        pass("wRAA", 2, w_pa);

        // 3. Baserunning totals and rates.
        count("SB", F::SB, wf(F::OB));
        rate("SB/OB", {{F::SB, 1.0}}, {{F::OB, 1.0}}, wf(F::OB));
        count("CS", F::CS, wf(F::OB));
        rate("CS/OB", {{F::CS, 1.0}}, {{F::OB, 1.0}}, wf(F::OB));
        rate("SBPA", {{F::SB, 1.0}}, {{F::SB, 1.0}, {F::CS, 1.0}},
             WeightRecipe{WeightRecipe::Kind::SumSbCs, F::SB});
        pass("Spd", 3, w_pa);

        return v;
    }();
    return defs;
}

inline const MetricDefinition* find_definition(const std::vector<MetricDefinition>& defs,
                                               std::string_view name) {
    for (const auto& d : defs)
        if (d.name == name) return &d;
    return nullptr;
}

}  // namespace pansig
