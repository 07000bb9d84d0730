#include "semlink/quant.hpp"

#include <cmath>
#include <stdexcept>

namespace semlink {

void QuantizerSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("quantizer: gamma must be positive and finite");
    if (bits < 1 || bits > 30)
        throw std::invalid_argument("quantizer: bits must be in [1, 30]");
}

DitherSource::DitherSource(uint64_t seed, QuantizerSpec spec)
    : spec_(spec), rng_(seed) {
    spec_.validate();
}

double DitherSource::next() {
    const double half = spec_.step() * 0.5;
    return rng_.uniform(-half, half);
}

int quantize_index(double y, const QuantizerSpec& spec) {
    if (!std::isfinite(y))
        throw std::invalid_argument("quantizer: input must be finite");
    const int m = spec.levels();
    if (y > spec.gamma) return m - 1;
    if (y < -spec.gamma) return 0;
    const double u = (y + spec.gamma) / spec.step();
    int l = int(std::ceil(u)) - 1;
    if (l < 0) l = 0;
    if (l > m - 1) l = m - 1;
    return l;
}

double uniform_quantize(double y, const QuantizerSpec& spec) {
    spec.validate();
    return spec.level_value(quantize_index(y, spec));
}

std::pair<int, double> dithered_quantize(double y, const QuantizerSpec& spec,
                                         DitherSource& dither) {
    return dithered_quantize_with(y, spec, dither.next());
}

std::pair<int, double> dithered_quantize_with(double y, const QuantizerSpec& spec,
                                              double dither) {
    spec.validate();
    if (!std::isfinite(y))
        throw std::invalid_argument("quantizer: input must be finite");
    int l = quantize_index(y + dither, spec);
    return {l, spec.level_value(l)};
}

BitVec encode_bits(int index, const QuantizerSpec& spec) {
    if (index < 0 || index >= spec.levels())
        throw std::out_of_range("encode_bits: index out of range");
    BitVec out(static_cast<size_t>(spec.bits));
    for (int k = 0; k < spec.bits; ++k) {
        out[size_t(k)] = uint8_t((index >> (spec.bits - 1 - k)) & 1);
    }
    return out;
}

double dequantize(const BitVec& bits, const QuantizerSpec& spec) {
    if (int(bits.size()) != spec.bits)
        throw std::invalid_argument("dequantize: bit count does not match spec");
    int l = 0;
    for (uint8_t b : bits) l = (l << 1) | int(b & 1);
    return spec.level_value(l);
}

} // namespace semlink
