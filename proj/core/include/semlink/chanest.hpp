#pragma once

#include <vector>

#include "semlink/ofdm.hpp"

namespace semlink {

enum class ChestMethod { ls_interp, mmse };

// Mean tap powers (normalized to sum 1) at integer sample delays; the
// second-order statistics behind the MMSE smoother.
struct PowerDelayProfile {
    std::vector<int> delays;
    std::vector<double> powers;
};

// Per-subcarrier channel estimate from one OFDM symbol's pilot observations.
//
// ls_interp: least-squares at the pilots (obs / pilot_value), linearly
// interpolated between pilots and linearly extrapolated past the edges.
//
// mmse: LS pilot estimates smoothed through the frequency-correlation matrix
// of `pdp`, regularized by `noise_var` (per-bin noise variance relative to a
// unit-power pilot). Requires pdp.
std::vector<cplx> estimate_channel(const std::vector<cplx>& pilot_obs,
                                   const OfdmConfig& cfg, ChestMethod method,
                                   const PowerDelayProfile* pdp = nullptr,
                                   double noise_var = 0.0);

// Element-wise y_k / h_k. With strict=true a |h_k| below 1e-12 throws
// (singular subchannel); otherwise |h_k| is floored at 1e-6, phase kept.
std::vector<cplx> equalize(const std::vector<cplx>& obs, const std::vector<cplx>& h,
                           bool strict = false);

} // namespace semlink
