#include "semlink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semlink/rng.hpp"

namespace semlink {

int ChannelRealization::max_delay() const {
    int m = 0;
    for (int d : tap_delays) m = std::max(m, d);
    return m;
}

std::vector<cplx> sparse_freq_response(const std::vector<int>& delays,
                                       const std::vector<cplx>& gains, int n_sub) {
    std::vector<cplx> h(static_cast<size_t>(n_sub), cplx(0.0, 0.0));
    for (int k = 0; k < n_sub; ++k) {
        cplx acc(0.0, 0.0);
        for (size_t t = 0; t < delays.size(); ++t) {
            double a = -2.0 * M_PI * double(k) * double(delays[t]) / double(n_sub);
            acc += gains[t] * cplx(std::cos(a), std::sin(a));
        }
        h[size_t(k)] = acc;
    }
    return h;
}

namespace {

ChannelRealization rayleigh_taps(const std::vector<int>& delays,
                                 const std::vector<double>& powers_db,
                                 uint64_t seed, const OfdmConfig& cfg) {
    std::vector<double> p(powers_db.size());
    double total = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] = std::pow(10.0, powers_db[i] / 10.0);
        total += p[i];
    }
    Rng rng(seed);
    ChannelRealization ch;
    ch.tap_delays = delays;
    ch.tap_gains.resize(delays.size());
    for (size_t i = 0; i < delays.size(); ++i) {
        // CN(0, p[i]/total): each component N(0, p[i]/(2*total)).
        double s = std::sqrt(p[i] / total / 2.0);
        ch.tap_gains[i] = cplx(s * rng.gaussian(), s * rng.gaussian());
    }
    ch.freq_response = sparse_freq_response(ch.tap_delays, ch.tap_gains, cfg.n_sub);
    return ch;
}

} // namespace

ChannelRealization make_sui5(uint64_t seed, const OfdmConfig& cfg) {
    const std::vector<int> delays = {0, 4, 10};
    if (delays.back() >= cfg.cp_len)
        throw std::invalid_argument("make_sui5: delay spread exceeds cyclic prefix");
    return rayleigh_taps(delays, {0.0, -5.0, -10.0}, seed, cfg);
}

ChannelRealization make_multipath(int n_paths, uint64_t seed, const OfdmConfig& cfg) {
    if (n_paths < 1 || n_paths > 11)
        throw std::invalid_argument("make_multipath: n_paths must be in [1, 11]");
    std::vector<int> delays(static_cast<size_t>(n_paths));
    std::vector<double> powers_db(static_cast<size_t>(n_paths));
    for (int j = 0; j < n_paths; ++j) {
        delays[size_t(j)] =
            n_paths == 1 ? 0 : int(std::lround(10.0 * double(j) / double(n_paths - 1)));
        powers_db[size_t(j)] = -5.0 * double(j);
    }
    if (delays.back() >= cfg.cp_len)
        throw std::invalid_argument("make_multipath: delay spread exceeds cyclic prefix");
    ChannelRealization ch = rayleigh_taps(delays, powers_db, seed, cfg);
    // Realized total power pinned to 1 so the path-count sweep isolates
    // frequency selectivity from total-gain fading (a single path is then
    // exactly flat with unit magnitude).
    double total = 0.0;
    for (const cplx& g : ch.tap_gains) total += std::norm(g);
    double s = total > 0.0 ? 1.0 / std::sqrt(total) : 1.0;
    for (auto& g : ch.tap_gains) g *= s;
    ch.freq_response = sparse_freq_response(ch.tap_delays, ch.tap_gains, cfg.n_sub);
    return ch;
}

namespace {

std::vector<cplx> convolve_taps(const std::vector<cplx>& samples,
                                const ChannelRealization& ch) {
    std::vector<cplx> out(samples.size(), cplx(0.0, 0.0));
    for (size_t t = 0; t < ch.tap_delays.size(); ++t) {
        const int d = ch.tap_delays[t];
        const cplx g = ch.tap_gains[t];
        for (size_t n = size_t(d); n < samples.size(); ++n) {
            out[n] += g * samples[n - size_t(d)];
        }
    }
    return out;
}

void add_awgn(std::vector<cplx>& out, double sigma2, uint64_t seed) {
    if (sigma2 <= 0.0) return;
    double s = std::sqrt(sigma2 / 2.0);
    Rng rng(seed);
    for (auto& v : out) v += cplx(s * rng.gaussian(), s * rng.gaussian());
}

} // namespace

std::vector<cplx> apply_channel(const std::vector<cplx>& samples,
                                const ChannelRealization& ch, const NoiseConfig& noise) {
    auto out = convolve_taps(samples, ch);
    if (std::isfinite(noise.snr_db)) {
        double power = 0.0;
        for (const cplx& s : samples) power += std::norm(s);
        if (!samples.empty()) power /= double(samples.size());
        if (power > 0.0) {
            add_awgn(out, power * std::pow(10.0, -noise.snr_db / 10.0), noise.seed);
        }
    }
    return out;
}

std::vector<cplx> apply_channel_fixed_noise(const std::vector<cplx>& samples,
                                            const ChannelRealization& ch, double sigma2,
                                            uint64_t seed) {
    auto out = convolve_taps(samples, ch);
    add_awgn(out, sigma2, seed);
    return out;
}

BitVec bsc(const BitVec& bits, double p, uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("bsc: crossover probability must be in [0, 1]");
    Rng rng(seed);
    BitVec out(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        bool flip = rng.uniform() < p;
        out[i] = uint8_t((bits[i] ^ (flip ? 1 : 0)) & 1);
    }
    return out;
}

} // namespace semlink
