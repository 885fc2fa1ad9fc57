#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fairswap {

// mt19937_64's output sequence is fixed by the standard; the helpers below
// avoid the implementation-defined std:: distributions so runs replay
// bit-identically across standard libraries.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return draw % bound;
}

/// Uniform double in [0, 1) with 53 bits of resolution.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform_unit(rng) < p;
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_below(rng, i)]);
    }
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    return items[uniform_below(rng, items.size())];
}

}  // namespace fairswap
