#include "semlink/ofdm.hpp"

#include <algorithm>
#include <stdexcept>

namespace semlink {

OfdmConfig OfdmConfig::make(int n_sub, int n_pilot, int cp_len) {
    OfdmConfig cfg;
    cfg.n_sub = n_sub;
    cfg.n_pilot = n_pilot;
    cfg.cp_len = cp_len;
    cfg.pilot_positions.resize(size_t(n_pilot));
    for (int k = 0; k < n_pilot; ++k) {
        cfg.pilot_positions[size_t(k)] = int(int64_t(k) * n_sub / n_pilot);
    }
    cfg.validate();
    return cfg;
}

std::vector<int> OfdmConfig::data_positions() const {
    std::vector<bool> is_pilot(size_t(n_sub), false);
    for (int p : pilot_positions) is_pilot[size_t(p)] = true;
    std::vector<int> out;
    out.reserve(size_t(n_data()));
    for (int k = 0; k < n_sub; ++k) {
        if (!is_pilot[size_t(k)]) out.push_back(k);
    }
    return out;
}

void OfdmConfig::validate() const {
    if (n_sub <= 0 || n_pilot < 0 || n_pilot >= n_sub)
        throw std::invalid_argument("ofdm: need 0 <= n_pilot < n_sub");
    if (int(pilot_positions.size()) != n_pilot)
        throw std::invalid_argument("ofdm: pilot_positions size != n_pilot");
    if (cp_len < 0 || cp_len >= n_sub)
        throw std::invalid_argument("ofdm: need 0 <= cp_len < n_sub");
    std::vector<bool> seen(size_t(n_sub), false);
    for (int p : pilot_positions) {
        if (p < 0 || p >= n_sub)
            throw std::invalid_argument("ofdm: pilot position out of range");
        if (seen[size_t(p)])
            throw std::invalid_argument("ofdm: duplicate pilot position");
        seen[size_t(p)] = true;
    }
}

std::vector<cplx> ofdm_modulate(const std::vector<cplx>& data_grid, const OfdmConfig& cfg) {
    cfg.validate();
    if (int(data_grid.size()) != cfg.n_data())
        throw std::invalid_argument("ofdm_modulate: grid length != n_data");
    std::vector<cplx> freq(static_cast<size_t>(cfg.n_sub), cplx(0.0, 0.0));
    for (int p : cfg.pilot_positions) freq[size_t(p)] = cfg.pilot_value;
    const auto& data_pos = cfg.data_positions_cached();
    for (size_t i = 0; i < data_pos.size(); ++i) freq[size_t(data_pos[i])] = data_grid[i];

    auto time = fft_inverse(freq);
    std::vector<cplx> out;
    out.reserve(size_t(cfg.symbol_len()));
    out.insert(out.end(), time.end() - cfg.cp_len, time.end());
    out.insert(out.end(), time.begin(), time.end());
    return out;
}

OfdmDemodResult ofdm_demodulate(const std::vector<cplx>& samples, const OfdmConfig& cfg) {
    cfg.validate();
    if (int(samples.size()) != cfg.symbol_len())
        throw std::invalid_argument("ofdm_demodulate: sample count != n_sub + cp_len");
    std::vector<cplx> body(samples.begin() + cfg.cp_len, samples.end());
    auto freq = fft_forward(body);

    OfdmDemodResult res;
    res.pilots.reserve(size_t(cfg.n_pilot));
    for (int p : cfg.pilot_positions) res.pilots.push_back(freq[size_t(p)]);
    const auto& data_pos = cfg.data_positions_cached();
    res.data.reserve(data_pos.size());
    for (int k : data_pos) res.data.push_back(freq[size_t(k)]);
    return res;
}

} // namespace semlink
