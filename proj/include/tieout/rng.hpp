#pragma once

// Seeded deterministic RNG for the synthetic generator.
//
// mt19937_64 raw output is specified bit-exactly by the standard; all
// derived sampling (bounded ints, weighted picks) is implemented here rather
// than via std::*_distribution, whose output may vary across standard
// library implementations. The algorithm identifier below is recorded in
// generated manifests so outputs can be reproduced elsewhere.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace tieout {

inline constexpr const char* kRngAlgorithm = "mt19937_64/rejection-v1";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = eng_(); } while (v >= limit);
        return v % n;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Uniform in [0, 1) with 53 significant bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

    // Index drawn proportionally to weights.
    std::size_t weighted(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        double x = unit() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            x -= weights[i];
            if (x < 0) return i;
        }
        return weights.size() - 1;
    }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

private:
    std::mt19937_64 eng_;
};

} // namespace tieout
