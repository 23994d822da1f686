#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace aec {

// All randomness in the project flows through these helpers instead of
// <random> distribution objects: the mapping from raw engine output to
// values is then fixed by this code, so runs are reproducible across
// standard-library implementations and engine state round-trips through
// checkpoints without hidden distribution state.

inline double rng_uniform(std::mt19937& g, double lo, double hi) {
    // 53-bit uniform in [0,1).
    const std::uint64_t hi26 = g() >> 6;  // 26 bits
    const std::uint64_t lo27 = g() >> 5;  // 27 bits
    const double u = static_cast<double>((hi26 << 27) | lo27) * (1.0 / 9007199254740992.0);
    return lo + (hi - lo) * u;
}

inline float rng_uniform_f(std::mt19937& g, float lo, float hi) {
    return static_cast<float>(rng_uniform(g, lo, hi));
}

// Uniform integer in [0, n).
inline std::uint32_t rng_index(std::mt19937& g, std::uint32_t n) {
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint32_t limit = std::mt19937::max() - std::mt19937::max() % n;
    std::uint32_t x = g();
    while (x >= limit) x = g();
    return x % n;
}

inline std::string rng_state_to_string(const std::mt19937& g) {
    std::ostringstream os;
    os << g;
    return os.str();
}

inline std::mt19937 rng_state_from_string(const std::string& s) {
    std::mt19937 g;
    std::istringstream is(s);
    is >> g;
    return g;
}

// Stable per-worker seeding.
inline std::mt19937 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937(seq);
}

}  // namespace aec
