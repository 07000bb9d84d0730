#pragma once

#include <cstdint>
#include <initializer_list>

namespace semlink {

// Mixing step used for seeding and seed derivation (splitmix64).
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and a list of
// tag/counter words. Order-sensitive: derive(m,{a,b}) != derive(m,{b,a}).
uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> parts);

// Fourcc-style tag helper for readable derivation labels.
constexpr uint64_t seed_tag(char a, char b, char c, char d) {
    return (uint64_t(uint8_t(a)) << 24) | (uint64_t(uint8_t(b)) << 16) |
           (uint64_t(uint8_t(c)) << 8) | uint64_t(uint8_t(d));
}

// Deterministic xoshiro256++ generator. All distributions are generated
// from explicit formulas so that identical seeds give identical sequences
// on any conforming platform (std::normal_distribution and friends make
// no such guarantee).
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform();
    // Uniform on [a, b).
    double uniform(double a, double b);
    // Standard normal via Box-Muller (second deviate cached).
    double gaussian();
    // Uniform integer on [lo, hi] inclusive, unbiased.
    int64_t uniform_int(int64_t lo, int64_t hi);

private:
    uint64_t s_[4];
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace semlink
