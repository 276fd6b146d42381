#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "hetegcn/types.hpp"

namespace hetegcn {

// Deterministic RNG used everywhere instead of std distributions, whose
// output is implementation-defined. Every draw below is fully specified,
// so identical seeds reproduce identical streams on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [-bound, bound).
    double next_symmetric(double bound) {
        return (2.0 * next_double() - 1.0) * bound;
    }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[next_below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Named sub-seed so one master seed drives independent random streams
/// (weight init, dropout, splits) without coupling their draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(master ^ h);
}

} // namespace hetegcn
