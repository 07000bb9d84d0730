#include <doctest.h>

#include <cmath>

#include "semlink/fft.hpp"
#include "semlink/rng.hpp"

using namespace semlink;

namespace {

// Brute-force reference transform.
std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse) {
    const size_t n = x.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    double sign = inverse ? 1.0 : -1.0;
    for (size_t k = 0; k < n; ++k) {
        for (size_t j = 0; j < n; ++j) {
            double a = sign * 2.0 * M_PI * double(j) * double(k) / double(n);
            out[k] += x[j] * cplx(std::cos(a), std::sin(a));
        }
    }
    return out;
}

std::vector<cplx> random_signal(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> x(n);
    for (auto& v : x) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return x;
}

} // namespace

TEST_CASE("derive_seed is deterministic and order sensitive") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
    CHECK(derive_seed(1, {}) != derive_seed(1, {0}));
}

TEST_CASE("rng streams repeat under the same seed") {
    Rng a(42), b(42), c(43);
    bool same = true, differ = false;
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.next_u64();
        same = same && va == b.next_u64();
        differ = differ || va != c.next_u64();
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("rng uniform_int covers bounds uniformly") {
    Rng rng(7);
    int counts[6] = {0};
    for (int i = 0; i < 60000; ++i) {
        int64_t v = rng.uniform_int(10, 15);
        REQUIRE(v >= 10);
        REQUIRE(v <= 15);
        counts[v - 10]++;
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("rng gaussian has unit variance and zero mean") {
    Rng rng(11);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        sum += g;
        sum2 += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("dft matches the brute-force reference on mixed-radix sizes") {
    for (size_t n : {1u, 2u, 3u, 5u, 8u, 12u, 16u, 17u, 34u, 272u}) {
        auto x = random_signal(n, 100 + n);
        auto fast = dft(x);
        auto ref = naive_dft(x, false);
        double err = 0.0, scale = 0.0;
        for (size_t k = 0; k < n; ++k) {
            err = std::max(err, std::abs(fast[k] - ref[k]));
            scale = std::max(scale, std::abs(ref[k]));
        }
        CHECK(err <= 1e-10 * (1.0 + scale));

        auto fasti = idft(x);
        auto refi = naive_dft(x, true);
        err = 0.0;
        for (size_t k = 0; k < n; ++k) err = std::max(err, std::abs(fasti[k] - refi[k]));
        CHECK(err <= 1e-10 * (1.0 + scale));
    }
}

TEST_CASE("symmetric transforms round-trip and preserve energy") {
    auto x = random_signal(272, 5);
    auto f = fft_forward(x);
    auto back = fft_inverse(f);

    double energy_x = 0.0, energy_f = 0.0, err = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        energy_x += std::norm(x[k]);
        energy_f += std::norm(f[k]);
        err = std::max(err, std::abs(back[k] - x[k]));
    }
    CHECK(err < 1e-9);
    CHECK(std::abs(energy_x - energy_f) < 1e-9 * energy_x);
}
