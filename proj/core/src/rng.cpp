#include "semlink/rng.hpp"

#include <cmath>

namespace semlink {

uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> parts) {
    uint64_t s = master;
    (void)splitmix64(s);
    for (uint64_t p : parts) {
        s ^= p * 0x9E3779B97F4A7C15ULL;
        (void)splitmix64(s);
    }
    uint64_t state = s;
    return splitmix64(state);
}

Rng::Rng(uint64_t seed) {
    uint64_t state = seed;
    for (auto& w : s_) w = splitmix64(state);
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) {
    return a + (b - a) * uniform();
}

double Rng::gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // u1 in (0,1] so log() is finite.
    double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = uint64_t(hi - lo) + 1;
    if (span == 0) return int64_t(next_u64()); // full 64-bit range
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return lo + int64_t(v % span);
}

} // namespace semlink
