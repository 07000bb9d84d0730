#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "semlink/rng.hpp"

namespace semlink {

using BitVec = std::vector<uint8_t>; // one bit per element, values 0/1

// Uniform mid-rise quantizer over [-gamma, gamma] with 2^bits levels.
// Reconstruction levels are -gamma + step*(l + 0.5), l = 0..levels-1; all
// levels lie strictly inside (-gamma, gamma).
struct QuantizerSpec {
    double gamma = 1.0;
    int bits = 1;

    int levels() const { return 1 << bits; }
    double step() const { return 2.0 * gamma / double(levels()); }
    double level_value(int l) const { return -gamma + step() * (double(l) + 0.5); }
    void validate() const; // throws std::invalid_argument
};

// I.i.d. dither uniform on [-step/2, +step/2], independent of the input.
// Same seed => identical sample sequence.
class DitherSource {
public:
    DitherSource(uint64_t seed, QuantizerSpec spec);
    double next();
    const QuantizerSpec& spec() const { return spec_; }

private:
    QuantizerSpec spec_;
    Rng rng_;
};

// Cell index for input y. Cell l covers [l*step - gamma, (l+1)*step - gamma];
// boundary inputs resolve to the lower-index cell except y == +gamma, which
// maps to the top level. |y| > gamma saturates to the end cells.
int quantize_index(double y, const QuantizerSpec& spec);

// Uniform quantization: level of the cell containing y, saturating to
// sign(y)*(gamma - step/2) for |y| > gamma.
double uniform_quantize(double y, const QuantizerSpec& spec);

// Non-subtractive dithered quantization: quantizes y + z where z is drawn
// from the dither source; the dither is never subtracted. Returns the cell
// index and its reconstruction level.
std::pair<int, double> dithered_quantize(double y, const QuantizerSpec& spec,
                                         DitherSource& dither);

// Same, with an explicitly supplied dither value (test hooks and callers
// that manage their own dither streams).
std::pair<int, double> dithered_quantize_with(double y, const QuantizerSpec& spec,
                                              double dither);

// Big-endian fixed-width binary of index; length exactly spec.bits.
BitVec encode_bits(int index, const QuantizerSpec& spec);

// Inverse of encode_bits composed with the level lookup.
double dequantize(const BitVec& bits, const QuantizerSpec& spec);

} // namespace semlink
