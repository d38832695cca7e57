#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace prct {

// Deterministic draws on top of mt19937_64. Standard-library distributions
// are implementation-defined, so anything that must reproduce byte-identical
// artifacts across platforms goes through these helpers instead.
namespace rng {

using Engine = std::mt19937_64;

// Uniform integer in [0, n) via rejection sampling (no modulo bias).
inline std::uint64_t bounded(Engine& eng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in (0, 1).
inline double uniform01(Engine& eng) {
    return (double(eng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Standard normal via Box-Muller (one value per call; the pair's second
// half is discarded to keep call sites stateless).
inline double standard_normal(Engine& eng) {
    double u1 = uniform01(eng);
    double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

template <typename T>
void shuffle(Engine& eng, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = std::size_t(bounded(eng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// 64-bit seed derived from SHA-256 of (seed, label); gives independent
// deterministic streams keyed by label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

} // namespace rng
} // namespace prct
