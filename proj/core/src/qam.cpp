#include "semlink/qam.hpp"

#include <cmath>
#include <stdexcept>

namespace semlink {

namespace {

const double kScale = 1.0 / std::sqrt(42.0);

// amp_of_gray[g] = PAM-8 level for the 3-bit pattern g. Built from the Gray
// sequence i ^ (i >> 1) walking levels 7, 5, 3, ... so adjacent levels
// differ in exactly one bit.
struct GrayTable {
    double amp_of_gray[8];
    GrayTable() {
        for (int i = 0; i < 8; ++i) {
            int g = i ^ (i >> 1);
            amp_of_gray[g] = double(7 - 2 * i);
        }
    }
};
const GrayTable kGray;

int gray_of_bits(const uint8_t* b) {
    return (int(b[0] & 1) << 2) | (int(b[1] & 1) << 1) | int(b[2] & 1);
}

// Nearest level; scanning Gray patterns in ascending order with a strict
// comparison resolves exact ties toward the smaller pattern.
int detect_axis(double x) {
    int best_g = 0;
    double best_d = std::abs(x - kGray.amp_of_gray[0] * kScale);
    for (int g = 1; g < 8; ++g) {
        double d = std::abs(x - kGray.amp_of_gray[g] * kScale);
        if (d < best_d) {
            best_g = g;
            best_d = d;
        }
    }
    return best_g;
}

} // namespace

std::vector<cplx> qam64_modulate(const BitVec& bits) {
    if (bits.size() % kQamBitsPerSymbol != 0)
        throw std::invalid_argument("qam64_modulate: bit count not a multiple of 6");
    std::vector<cplx> out(bits.size() / kQamBitsPerSymbol);
    for (size_t s = 0; s < out.size(); ++s) {
        const uint8_t* grp = bits.data() + s * kQamBitsPerSymbol;
        double i = kGray.amp_of_gray[gray_of_bits(grp)] * kScale;
        double q = kGray.amp_of_gray[gray_of_bits(grp + 3)] * kScale;
        out[s] = cplx(i, q);
    }
    return out;
}

BitVec qam64_demodulate(const std::vector<cplx>& symbols) {
    BitVec out;
    out.reserve(symbols.size() * kQamBitsPerSymbol);
    for (const cplx& s : symbols) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("qam64_demodulate: non-finite symbol");
        int gi = detect_axis(s.real());
        int gq = detect_axis(s.imag());
        out.push_back(uint8_t((gi >> 2) & 1));
        out.push_back(uint8_t((gi >> 1) & 1));
        out.push_back(uint8_t(gi & 1));
        out.push_back(uint8_t((gq >> 2) & 1));
        out.push_back(uint8_t((gq >> 1) & 1));
        out.push_back(uint8_t(gq & 1));
    }
    return out;
}

} // namespace semlink
