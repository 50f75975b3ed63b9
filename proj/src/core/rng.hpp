#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "error.hpp"

namespace vce {

// splitmix64 (Steele/Lea/Flood), the usual seed-expansion mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from (seed, stream_id). Used for
// per-patient substreams so runs are reproducible regardless of scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream_id ^ 0xD6E8FEB86659FD93ULL));
}

// mt19937_64 with our own variate transforms. The engine's sequence is fully
// specified by the standard; std::*_distribution algorithms are not, so all
// transforms below are written out to keep output identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1); never returns 0 so log() is safe.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform_range(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) fail(Errc::invalid_argument, "uniform_int bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Geometric number of frames with the given mean, support {1, 2, ...}.
    // Matches the self-loop dwell model: P(k) = (1/d) * (1 - 1/d)^(k-1).
    std::int64_t geometric_count(double mean) {
        if (!(mean >= 1.0)) fail(Errc::dwell_too_small, "geometric mean must be >= 1");
        const double p = 1.0 / mean;
        if (p >= 1.0) return 1;
        const double u = uniform_open();
        const double k = 1.0 + std::floor(std::log(u) / std::log1p(-p));
        return k < 1.0 ? 1 : static_cast<std::int64_t>(k);
    }

    // Index sampled proportionally to the given non-negative weights.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    // Fisher-Yates, in place.
    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace vce
