#pragma once

#include <cstdint>
#include <random>

namespace dsa {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used only to turn (seed, stream id) into engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
    env = 1,      // PU dynamics and initial network state
    explore = 2,  // epsilon-greedy draws, random sensing schedules, random access
    replay = 3,   // minibatch sampling
    init = 4,     // network weight initialization
    transmit = 5, // Bernoulli(P_ac) transmit decisions
};

inline Rng make_stream(std::uint64_t seed, Stream stream) {
    const std::uint64_t s = splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

// One independent engine per consumer so that, e.g., changing the batch size
// does not perturb the environment trajectory.
struct RngStreams {
    Rng env;
    Rng explore;
    Rng replay;
    Rng init;
    Rng transmit;

    static RngStreams from_seed(std::uint64_t seed) {
        return RngStreams{make_stream(seed, Stream::env), make_stream(seed, Stream::explore),
                          make_stream(seed, Stream::replay), make_stream(seed, Stream::init),
                          make_stream(seed, Stream::transmit)};
    }
};

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace dsa
