#pragma once
// Fixed, portable random number generation.
//
// Every stochastic routine in the library draws from a Xoshiro256++ engine
// seeded through SplitMix64. The distribution transforms live here instead of
// <random> because the standard leaves normal/gamma algorithms
// implementation-defined and we need identical streams for reproducible runs.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "common.hpp"

namespace pansig {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a master seed with a stream key to derive independent substreams
// (per player, per chain, per permutation rep).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t s = seed ^ (0xa0761d6478bd642fULL + key * 0xe7037ed1a0b428dbULL);
    const std::uint64_t a = splitmix64_next(s);
    const std::uint64_t b = splitmix64_next(s);
    return a ^ (b >> 1);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    static Rng stream(std::uint64_t seed, std::uint64_t key) {
        return Rng(derive_seed(seed, key));
    }

    // Xoshiro256++ core step.
    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller, cosine branch only. Two words per variate, no cached state.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Marsaglia-Tsang squeeze for Gamma(shape, scale = 1).
    double gamma(double shape) {
        if (!(shape > 0.0)) throw NumericError("gamma shape must be > 0");
        if (shape < 1.0) {
            const double boost = std::pow(uniform_pos(), 1.0 / shape);
            return gamma(shape + 1.0) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double gamma(double shape, double scale) { return gamma(shape) * scale; }

    // Inverse-Gamma(shape, rate): density proportional to x^{-shape-1} e^{-rate/x}.
    double inverse_gamma(double shape, double rate) {
        return rate / gamma(shape);
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n). Multiply-shift; bias is negligible for the
    // n used here (permutation indices, fold sizes).
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    long uniform_int(long lo, long hi) {  // inclusive range
        return lo + static_cast<long>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <class T>
    void shuffle(std::span<T> xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(xs[i - 1], xs[j]);
        }
    }

    template <class T>
    void shuffle(std::vector<T>& xs) {
        shuffle(std::span<T>(xs));
    }

  private:
    static constexpr double two_pi = 6.283185307179586476925286766559;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

}  // namespace pansig
