#include <doctest.h>

#include <cmath>

#include "semlink/coding.hpp"
#include "semlink/qam.hpp"
#include "semlink/rng.hpp"

using namespace semlink;

namespace {

BitVec nibble(int v) {
    return {uint8_t((v >> 3) & 1), uint8_t((v >> 2) & 1), uint8_t((v >> 1) & 1),
            uint8_t(v & 1)};
}

} // namespace

TEST_CASE("identity code is a passthrough") {
    ChannelCode code{CodeVariant::identity};
    BitVec in = {1, 0, 1};
    CHECK(channel_encode(in, code) == in);
    CHECK(channel_decode(in, code, 3) == in);
    CHECK(code.rate() == doctest::Approx(1.0));
}

TEST_CASE("hamming74 encodes the zero and a known block") {
    ChannelCode code{CodeVariant::hamming74};
    CHECK(channel_encode({0, 0, 0, 0}, code) == BitVec{0, 0, 0, 0, 0, 0, 0});
    // data 1011 -> parities p1=0, p2=1, p3=0 in the [p1 p2 d0 p3 d1 d2 d3] layout
    CHECK(channel_encode({1, 0, 1, 1}, code) == BitVec{0, 1, 1, 0, 0, 1, 1});
    CHECK(code.rate() == doctest::Approx(4.0 / 7.0));
    CHECK(code.coded_length(3) == 7); // padded to one block
    CHECK(code.coded_length(5) == 14);
}

TEST_CASE("hamming74 round-trips all 16 data blocks") {
    ChannelCode code{CodeVariant::hamming74};
    for (int v = 0; v < 16; ++v) {
        BitVec d = nibble(v);
        CHECK(channel_decode(channel_encode(d, code), code, 4) == d);
    }
}

TEST_CASE("hamming74 corrects every single-bit error") {
    ChannelCode code{CodeVariant::hamming74};
    for (int v = 0; v < 16; ++v) {
        BitVec d = nibble(v);
        BitVec c = channel_encode(d, code);
        for (int pos = 0; pos < 7; ++pos) {
            BitVec corrupted = c;
            corrupted[size_t(pos)] ^= 1;
            CHECK(channel_decode(corrupted, code, 4) == d);
        }
    }
}

TEST_CASE("hamming74 miscorrects double errors (differential check)") {
    ChannelCode code{CodeVariant::hamming74};
    for (int v = 0; v < 16; ++v) {
        BitVec d = nibble(v);
        BitVec c = channel_encode(d, code);
        for (int p1 = 0; p1 < 7; ++p1) {
            for (int p2 = p1 + 1; p2 < 7; ++p2) {
                BitVec corrupted = c;
                corrupted[size_t(p1)] ^= 1;
                corrupted[size_t(p2)] ^= 1;
                CHECK(channel_decode(corrupted, code, 4) != d);
            }
        }
    }
}

TEST_CASE("hamming74 pads odd-length payloads and validates input") {
    ChannelCode code{CodeVariant::hamming74};
    BitVec in = {1, 1, 0, 1, 1};
    BitVec coded = channel_encode(in, code);
    CHECK(coded.size() == 14);
    CHECK(channel_decode(coded, code, in.size()) == in);
    CHECK_THROWS(channel_decode({1, 0, 1}, code, 3));
}

TEST_CASE("qam64 maps the all-zero group to the gray corner") {
    auto syms = qam64_modulate({0, 0, 0, 0, 0, 0});
    REQUIRE(syms.size() == 1);
    double s = 1.0 / std::sqrt(42.0);
    CHECK(syms[0].real() == doctest::Approx(7.0 * s));
    CHECK(syms[0].imag() == doctest::Approx(7.0 * s));
}

TEST_CASE("qam64 constellation has exactly unit average energy") {
    double energy = 0.0;
    for (int v = 0; v < 64; ++v) {
        BitVec bits(6);
        for (int k = 0; k < 6; ++k) bits[size_t(k)] = uint8_t((v >> (5 - k)) & 1);
        energy += std::norm(qam64_modulate(bits)[0]);
    }
    CHECK(std::abs(energy / 64.0 - 1.0) < 1e-12);
}

TEST_CASE("qam64 round-trips all 64 patterns") {
    BitVec bits;
    for (int v = 0; v < 64; ++v) {
        for (int k = 0; k < 6; ++k) bits.push_back(uint8_t((v >> (5 - k)) & 1));
    }
    CHECK(qam64_demodulate(qam64_modulate(bits)) == bits);
}

TEST_CASE("qam64 survives noise below half the minimum distance") {
    const double half_min = 1.0 / std::sqrt(42.0); // min distance 2/sqrt(42)
    Rng rng(31);
    BitVec bits;
    for (int v = 0; v < 64; ++v) {
        for (int k = 0; k < 6; ++k) bits.push_back(uint8_t((v >> (5 - k)) & 1));
    }
    auto syms = qam64_modulate(bits);
    for (auto& s : syms) {
        double a = rng.uniform(0.0, 2.0 * M_PI);
        double r = 0.95 * half_min * rng.uniform();
        s += cplx(r * std::cos(a), r * std::sin(a));
    }
    CHECK(qam64_demodulate(syms) == bits);
}

TEST_CASE("qam64 demaps the origin deterministically toward smaller gray patterns") {
    auto bits = qam64_demodulate({cplx(0.0, 0.0)});
    CHECK(bits == BitVec{0, 1, 0, 0, 1, 0}); // +1 beats -1 on both axes
    CHECK_THROWS(qam64_demodulate({cplx(std::nan(""), 0.0)}));
}
