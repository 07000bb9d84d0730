#pragma once

#include <cstdint>
#include <vector>

#include "semlink/ofdm.hpp"
#include "semlink/quant.hpp"

namespace semlink {

// Sparse multipath realization: complex gains at integer sample delays plus
// the derived per-subcarrier frequency response (unnormalized DFT of the
// impulse response over n_sub bins).
struct ChannelRealization {
    std::vector<int> tap_delays;
    std::vector<cplx> tap_gains;
    std::vector<cplx> freq_response;

    int max_delay() const;
};

struct NoiseConfig {
    double snr_db = 10.0; // +infinity disables noise
    uint64_t seed = 0;
};

std::vector<cplx> sparse_freq_response(const std::vector<int>& delays,
                                       const std::vector<cplx>& gains, int n_sub);

// SUI-5 style three-tap channel: delays {0, 4, 10} samples, mean tap powers
// {0, -5, -10} dB, Rayleigh-faded and normalized to unit expected total power.
ChannelRealization make_sui5(uint64_t seed, const OfdmConfig& cfg);

// n_paths taps at evenly spaced integer delays in [0, 10] with a -5 dB per
// tap decay, normalized to unit expected total power.
ChannelRealization make_multipath(int n_paths, uint64_t seed, const OfdmConfig& cfg);

// Linear convolution with the impulse response (output truncated to the
// input length) plus complex AWGN. The noise variance is set against the
// measured mean power of the input samples: sigma^2 = P_in * 10^(-snr/10).
std::vector<cplx> apply_channel(const std::vector<cplx>& samples,
                                const ChannelRealization& ch, const NoiseConfig& noise);

// Same convolution with an explicitly supplied noise variance: one receiver
// noise floor shared across transmissions of different shapes and lengths.
std::vector<cplx> apply_channel_fixed_noise(const std::vector<cplx>& samples,
                                            const ChannelRealization& ch, double sigma2,
                                            uint64_t seed);

// Binary symmetric channel: each bit flipped independently with probability p.
BitVec bsc(const BitVec& bits, double p, uint64_t seed);

} // namespace semlink
