#pragma once

#include "semlink/fft.hpp"
#include "semlink/quant.hpp"

namespace semlink {

// Square 64QAM, Gray-mapped per axis: the first 3 bits of each group select
// the in-phase level, the last 3 the quadrature level. Scaled by 1/sqrt(42)
// so the constellation's average energy is exactly 1. The all-zero group
// maps to the (7+7i)/sqrt(42) corner.
std::vector<cplx> qam64_modulate(const BitVec& bits);

// Hard-decision nearest-point detection, per axis. Distance ties resolve to
// the smaller 3-bit Gray pattern, so an exact mid-point (e.g. the origin)
// demaps deterministically.
BitVec qam64_demodulate(const std::vector<cplx>& symbols);

constexpr int kQamBitsPerSymbol = 6;

} // namespace semlink
