#pragma once

#include <vector>

#include "semlink/fft.hpp"

namespace semlink {

// Frequency-domain frame layout: n_sub subcarriers per OFDM symbol, of which
// n_pilot carry a known pilot and the rest carry data. The cyclic prefix
// copies the last cp_len time samples in front of each symbol.
struct OfdmConfig {
    int n_sub = 272;
    int n_pilot = 16;
    int cp_len = 72;
    cplx pilot_value{1.0, 0.0};
    std::vector<int> pilot_positions; // empty => evenly spaced via make()

    int n_data() const { return n_sub - n_pilot; }
    int symbol_len() const { return n_sub + cp_len; }

    static OfdmConfig make(int n_sub = 272, int n_pilot = 16, int cp_len = 72);
    std::vector<int> data_positions() const;
    void validate() const;

    // Data positions recomputed once per distinct config (hot path).
    const std::vector<int>& data_positions_cached() const {
        if (data_positions_.empty()) data_positions_ = data_positions();
        return data_positions_;
    }

private:
    mutable std::vector<int> data_positions_;
};

// Places pilots and data on the grid, applies the orthonormal inverse DFT
// and prepends the cyclic prefix. Output length = n_sub + cp_len.
std::vector<cplx> ofdm_modulate(const std::vector<cplx>& data_grid, const OfdmConfig& cfg);

struct OfdmDemodResult {
    std::vector<cplx> data;
    std::vector<cplx> pilots;
};

// Removes the prefix, applies the forward DFT and splits pilot and data bins.
OfdmDemodResult ofdm_demodulate(const std::vector<cplx>& samples, const OfdmConfig& cfg);

} // namespace semlink
