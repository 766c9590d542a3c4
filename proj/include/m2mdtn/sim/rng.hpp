#ifndef M2MDTN_SIM_RNG_HPP
#define M2MDTN_SIM_RNG_HPP

// Deterministic random streams. All draws go through the helpers below
// rather than <random> distributions so results are identical across
// standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>

namespace m2mdtn::sim {

using Engine = std::mt19937_64;

enum class Stream : std::uint64_t {
    mobility = 1,
    traffic = 2,
    mac = 3,
    oracle = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sub-stream `index` of subsystem `stream` under `root`.
inline Engine make_engine(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
    const std::uint64_t a = splitmix64(root);
    const std::uint64_t b = splitmix64(a ^ static_cast<std::uint64_t>(stream) * 0xd1342543de82ef95ULL);
    const std::uint64_t c = splitmix64(b + index);
    std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Engine(seq);
}

// [0, 1)
inline double uniform01(Engine &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Engine &rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double exponential(Engine &rng, double mean) { return -mean * std::log1p(-uniform01(rng)); }

inline bool bernoulli(Engine &rng, double p) { return uniform01(rng) < p; }

// Uniform integer in [0, n), n > 0, without modulo bias.
inline std::uint64_t below(Engine &rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

} // namespace m2mdtn::sim

#endif
