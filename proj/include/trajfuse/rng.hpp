#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trajfuse {

using Rng = std::mt19937_64;

/// 53-bit uniform in [0, 1). Avoids std::uniform_real_distribution, whose
/// output sequence is implementation-defined; this stays bit-identical for a
/// given seed on any platform.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal via Box-Muller. Draws exactly two words per call.
double normal01(Rng& rng);

/// Fisher-Yates permutation of [0, n). Consumes exactly n-1 words.
std::vector<int> shuffled_indices(int n, Rng& rng);

/// Stable named sub-seed so a single master seed fans out to independent
/// streams (init, shuffle, dropout, synth, ...).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace trajfuse
