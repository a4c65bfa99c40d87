#pragma once
// Shared small helpers: error types, hashing, number formatting, quantiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pansig {

// Bad inputs: malformed files, missing columns, impossible requests.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: non-finite state, failed decomposition.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a 64-bit, used for content hashes and seed-derivation keys.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_mix(std::uint64_t value, std::uint64_t h) {
    char buf[8];
    std::memcpy(buf, &value, 8);
    return fnv1a64(std::string_view(buf, 8), h);
}

inline std::uint64_t fnv1a64_mix(double value, std::uint64_t h) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    return fnv1a64_mix(bits, h);
}

// All doubles in CSV artifacts go through this so identical runs produce
// byte-identical files. %.17g round-trips every finite double.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int precision) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Population (1/N) variance.
inline double variance_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double mu = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return s / static_cast<double>(xs.size());
}

// Linear-interpolation quantile (numpy's default convention) on sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DataError("quantile of empty sample");
    q = std::clamp(q, 0.0, 1.0);
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline double quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    return quantile_sorted(xs, q);
}

// Filesystem-safe version of a metric name ("1B/PA" -> "1B_PA").
inline std::string sanitize_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

}  // namespace pansig
