#include <doctest.h>

#include <cmath>

#include "semlink/quant.hpp"

using namespace semlink;

TEST_CASE("uniform quantizer worked examples") {
    CHECK(uniform_quantize(0.3, {1.0, 2}) == doctest::Approx(0.25));
    CHECK(uniform_quantize(1.5, {1.0, 2}) == doctest::Approx(0.75));   // saturation
    CHECK(uniform_quantize(-0.4, {1.0, 1}) == doctest::Approx(-0.5)); // one-bit
}

TEST_CASE("cell boundaries resolve to the lower cell, +gamma to the top level") {
    QuantizerSpec q{1.0, 2}; // step 0.5, levels at -0.75 -0.25 0.25 0.75
    CHECK(uniform_quantize(0.5, q) == doctest::Approx(0.25));
    CHECK(uniform_quantize(0.0, q) == doctest::Approx(-0.25));
    CHECK(uniform_quantize(1.0, q) == doctest::Approx(0.75));
    CHECK(uniform_quantize(-1.0, q) == doctest::Approx(-0.75));
    CHECK(uniform_quantize(-1.5, q) == doctest::Approx(-0.75)); // saturation low
}

TEST_CASE("levels lie strictly inside (-gamma, gamma)") {
    for (int b = 1; b <= 8; ++b) {
        QuantizerSpec q{1.0, b};
        for (int l = 0; l < q.levels(); ++l) {
            CHECK(q.level_value(l) > -q.gamma);
            CHECK(q.level_value(l) < q.gamma);
        }
        CHECK(q.step() == 2.0 / double(1 << b));
    }
}

TEST_CASE("dithered quantizer matches the plain quantizer when z = 0") {
    auto [l, v] = dithered_quantize_with(0.3, {1.0, 2}, 0.0);
    CHECK(l == 2);
    CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("dither just below half a step pushes zero to the level above") {
    QuantizerSpec q{1.0, 3}; // step 0.25
    double z = std::nextafter(q.step() / 2.0, 0.0);
    auto [l, v] = dithered_quantize_with(0.0, q, z);
    CHECK(l == 4);
    CHECK(v == doctest::Approx(0.125));
}

TEST_CASE("dither source is reproducible and bounded") {
    QuantizerSpec q{1.0, 4};
    DitherSource a(99, q), b(99, q);
    for (int i = 0; i < 1000; ++i) {
        double z = a.next();
        CHECK(z == b.next());
        CHECK(std::abs(z) <= q.step() / 2.0);
    }
}

TEST_CASE("monte-carlo unbiasedness of the dithered quantizer") {
    QuantizerSpec q{1.0, 4};
    DitherSource dither(2024, q);
    const double y = 0.37;
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += dithered_quantize(y, q, dither).second;
    double mean = sum / n;
    double step = q.step();
    double bound = 3.0 * (step / std::sqrt(12.0 * n)) + 0.005 * step;
    CHECK(std::abs(mean - y) < bound);
    CHECK(std::abs(mean - y) < 0.01 * step);
}

TEST_CASE("absolute error is bounded by one step inside the safe range") {
    QuantizerSpec q{1.0, 3};
    DitherSource dither(5, q);
    Rng rng(6);
    for (int i = 0; i < 20000; ++i) {
        double y = rng.uniform(-(q.gamma - q.step()), q.gamma - q.step());
        auto [l, v] = dithered_quantize(y, q, dither);
        CHECK(std::abs(v - y) <= q.step() + 1e-12);
        CHECK(v == doctest::Approx(q.level_value(l)));
    }
}

TEST_CASE("one-bit quantizer is a scaled sign function") {
    QuantizerSpec q{1.0, 1};
    DitherSource dither(17, q);
    Rng rng(18);
    for (int i = 0; i < 5000; ++i) {
        double y = rng.uniform(-0.9, 0.9);
        double z = dither.next();
        auto [l, v] = dithered_quantize_with(y, q, z);
        (void)l;
        double s = y + z;
        double expect = s > 0.0 ? 0.5 : -0.5; // boundary s == 0 resolves to the lower cell
        CHECK(v == doctest::Approx(expect));
    }
}

TEST_CASE("bit codec round-trips indices") {
    QuantizerSpec q2{1.0, 2}, q3{1.0, 3}, q4{1.0, 4};
    CHECK(encode_bits(2, q2) == BitVec{1, 0});
    CHECK(encode_bits(0, q4) == BitVec{0, 0, 0, 0});
    CHECK(encode_bits(5, q3) == BitVec{1, 0, 1});
    CHECK(dequantize({1, 0}, q2) == doctest::Approx(0.25));
    CHECK(dequantize({0}, {1.0, 1}) == doctest::Approx(-0.5));

    DitherSource dither(3, q4);
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        double y = rng.uniform(-1.2, 1.2);
        auto [l, v] = dithered_quantize(y, q4, dither);
        CHECK(dequantize(encode_bits(l, q4), q4) == doctest::Approx(v));
    }
}

TEST_CASE("quantizer input and spec validation") {
    QuantizerSpec q{1.0, 2};
    CHECK_THROWS(uniform_quantize(std::nan(""), q));
    CHECK_THROWS(uniform_quantize(INFINITY, q));
    CHECK_THROWS(encode_bits(4, q));
    CHECK_THROWS(encode_bits(-1, q));
    CHECK_THROWS(dequantize({1, 0, 1}, q));
    CHECK_THROWS(uniform_quantize(0.1, {0.0, 2}));
    CHECK_THROWS(uniform_quantize(0.1, {1.0, 0}));
}
