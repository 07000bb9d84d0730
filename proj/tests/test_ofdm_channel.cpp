#include <doctest.h>

#include <cmath>

#include "semlink/chanest.hpp"
#include "semlink/channel.hpp"
#include "semlink/ofdm.hpp"
#include "semlink/qam.hpp"
#include "semlink/rng.hpp"

using namespace semlink;

namespace {

std::vector<cplx> random_grid(int n, uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> g(static_cast<size_t>(n));
    for (auto& v : g) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return g;
}

ChannelRealization identity_channel(int n_sub) {
    ChannelRealization ch;
    ch.tap_delays = {0};
    ch.tap_gains = {cplx(1.0, 0.0)};
    ch.freq_response = sparse_freq_response(ch.tap_delays, ch.tap_gains, n_sub);
    return ch;
}

} // namespace

TEST_CASE("default ofdm frame layout") {
    auto cfg = OfdmConfig::make();
    CHECK(cfg.n_sub == 272);
    CHECK(cfg.n_pilot == 16);
    CHECK(cfg.n_data() == 256);
    CHECK(cfg.cp_len == 72);
    CHECK(cfg.pilot_positions.front() == 0);
    CHECK(cfg.pilot_positions[1] == 17); // evenly spaced across the grid
    CHECK(cfg.data_positions().size() == 256);
}

TEST_CASE("ofdm modulate/demodulate round-trips random grids") {
    auto cfg = OfdmConfig::make();
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto grid = random_grid(cfg.n_data(), seed);
        auto time = ofdm_modulate(grid, cfg);
        REQUIRE(int(time.size()) == cfg.n_sub + cfg.cp_len);
        auto res = ofdm_demodulate(time, cfg);
        double err = 0.0;
        for (int k = 0; k < cfg.n_data(); ++k)
            err = std::max(err, std::abs(res.data[size_t(k)] - grid[size_t(k)]));
        for (auto& p : res.pilots) err = std::max(err, std::abs(p - cfg.pilot_value));
        CHECK(err < 1e-9);
    }
}

TEST_CASE("all-zero grid with zero pilots gives an all-zero signal") {
    auto cfg = OfdmConfig::make();
    cfg.pilot_value = cplx(0.0, 0.0);
    std::vector<cplx> grid(static_cast<size_t>(cfg.n_data()), cplx(0.0, 0.0));
    for (const auto& s : ofdm_modulate(grid, cfg)) CHECK(std::abs(s) == 0.0);
}

TEST_CASE("a unit tone on subcarrier 0 is a constant time signal") {
    auto cfg = OfdmConfig::make(64, 0, 8);
    std::vector<cplx> grid(64, cplx(0.0, 0.0));
    grid[0] = cplx(1.0, 0.0);
    auto time = ofdm_modulate(grid, cfg);
    const double expect = 1.0 / std::sqrt(64.0);
    for (const auto& s : time) {
        CHECK(std::abs(s) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("ofdm validates dimensions") {
    auto cfg = OfdmConfig::make();
    CHECK_THROWS(ofdm_modulate(random_grid(10, 0), cfg));
    CHECK_THROWS(ofdm_demodulate(random_grid(10, 0), cfg));
}

TEST_CASE("grid and time-domain energy agree through the cyclic prefix") {
    auto cfg = OfdmConfig::make();
    cfg.pilot_value = cplx(0.0, 0.0); // isolate the transform
    auto grid = random_grid(cfg.n_data(), 9);
    auto time = ofdm_modulate(grid, cfg);
    double eg = 0.0, et = 0.0;
    for (const auto& v : grid) eg += std::norm(v);
    for (size_t i = size_t(cfg.cp_len); i < time.size(); ++i) et += std::norm(time[i]);
    CHECK(std::abs(eg - et) < 1e-9 * eg);
}

TEST_CASE("sui5 realizations are reproducible and match the power profile") {
    auto cfg = OfdmConfig::make();
    auto a = make_sui5(123, cfg);
    auto b = make_sui5(123, cfg);
    CHECK(a.tap_delays == std::vector<int>{0, 4, 10});
    for (size_t t = 0; t < 3; ++t) CHECK(a.tap_gains[t] == b.tap_gains[t]);

    // Mean tap powers over many seeds, un-normalized back to the profile.
    double p[3] = {0, 0, 0};
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        auto ch = make_sui5(derive_seed(999, {uint64_t(s)}), cfg);
        for (size_t t = 0; t < 3; ++t) p[t] += std::norm(ch.tap_gains[t]);
    }
    double total_profile = 1.0 + std::pow(10.0, -0.5) + 0.1;
    const double expect_db[3] = {0.0, -5.0, -10.0};
    for (size_t t = 0; t < 3; ++t) {
        double measured_db = 10.0 * std::log10(p[t] / n * total_profile);
        CHECK(std::abs(measured_db - expect_db[t]) < 0.2);
    }
}

TEST_CASE("single-tap frequency response is flat") {
    auto h = sparse_freq_response({0}, {cplx(1.0, 0.0)}, 272);
    for (const auto& v : h) {
        CHECK(v.real() == doctest::Approx(1.0));
        CHECK(std::abs(v.imag()) < 1e-12);
    }
}

TEST_CASE("multipath profile spacing and normalization") {
    auto cfg = OfdmConfig::make();
    auto one = make_multipath(1, 5, cfg);
    CHECK(one.tap_delays == std::vector<int>{0});
    for (const auto& v : one.freq_response) CHECK(std::abs(v) == doctest::Approx(1.0));

    auto three = make_multipath(3, 5, cfg);
    CHECK(three.tap_delays == std::vector<int>{0, 5, 10});

    double total = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        auto ch = make_multipath(4, derive_seed(31, {uint64_t(s)}), cfg);
        for (const auto& g : ch.tap_gains) total += std::norm(g);
    }
    CHECK(std::abs(total / n - 1.0) < 0.02);

    CHECK_THROWS(make_multipath(0, 1, cfg));
    CHECK_THROWS(make_multipath(12, 1, cfg));
}

TEST_CASE("apply_channel is exact without noise and hits the target snr") {
    auto cfg = OfdmConfig::make();
    auto ch = identity_channel(cfg.n_sub);
    auto x = random_grid(1000, 77);
    auto y = apply_channel(x, ch, NoiseConfig{INFINITY, 0});
    for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-15);

    auto big = random_grid(100000, 78);
    auto noisy = apply_channel(big, ch, NoiseConfig{10.0, 4242});
    double ps = 0.0, pn = 0.0;
    for (size_t i = 0; i < big.size(); ++i) {
        ps += std::norm(big[i]);
        pn += std::norm(noisy[i] - big[i]);
    }
    double snr_db = 10.0 * std::log10(ps / pn);
    CHECK(std::abs(snr_db - 10.0) < 0.2);
}

TEST_CASE("a two-tap channel shows both echoes") {
    ChannelRealization ch;
    ch.tap_delays = {0, 4};
    ch.tap_gains = {cplx(1.0, 0.0), cplx(0.5, 0.0)};
    ch.freq_response = sparse_freq_response(ch.tap_delays, ch.tap_gains, 16);
    std::vector<cplx> impulse(10, cplx(0.0, 0.0));
    impulse[0] = cplx(1.0, 0.0);
    auto y = apply_channel(impulse, ch, NoiseConfig{INFINITY, 0});
    CHECK(y[0] == cplx(1.0, 0.0));
    CHECK(y[4] == cplx(0.5, 0.0));
    for (size_t i : {1u, 2u, 3u, 5u, 6u}) CHECK(std::abs(y[i]) == 0.0);
}

TEST_CASE("bsc edge probabilities and flip statistics") {
    BitVec zeros(1000000, 0);
    CHECK(bsc(zeros, 0.0, 1) == zeros);
    auto flipped = bsc(zeros, 1.0, 1);
    for (uint8_t b : flipped) REQUIRE(b == 1);

    auto some = bsc(zeros, 0.1, 99);
    double frac = 0.0;
    for (uint8_t b : some) frac += b;
    frac /= double(some.size());
    CHECK(std::abs(frac - 0.1) < 0.001);

    CHECK_THROWS(bsc(zeros, -0.1, 1));
    CHECK_THROWS(bsc(zeros, 1.1, 1));
}

TEST_CASE("equalized end-to-end ber is non-increasing in snr on sui5") {
    auto cfg = OfdmConfig::make();
    const std::vector<double> snrs = {0, 5, 10, 15, 20, 25, 30};
    const int n_seeds = 50;
    std::vector<double> mean_ber(snrs.size(), 0.0), var_ber(snrs.size(), 0.0);
    std::vector<std::vector<double>> all(snrs.size());

    for (size_t si = 0; si < snrs.size(); ++si) {
        for (int seed = 0; seed < n_seeds; ++seed) {
            auto ch = make_sui5(derive_seed(500, {uint64_t(seed)}), cfg);
            Rng data_rng(derive_seed(501, {uint64_t(seed)}));
            BitVec bits(size_t(cfg.n_data()) * 6);
            for (auto& b : bits) b = uint8_t(data_rng.next_u64() & 1);
            auto tx = ofdm_modulate(qam64_modulate(bits), cfg);
            auto rx = apply_channel(tx, ch,
                                    NoiseConfig{snrs[si], derive_seed(502, {uint64_t(seed), si})});
            auto dem = ofdm_demodulate(rx, cfg);
            auto h = estimate_channel(dem.pilots, cfg, ChestMethod::ls_interp);
            auto data_pos = cfg.data_positions();
            std::vector<cplx> hd(data_pos.size());
            for (size_t k = 0; k < data_pos.size(); ++k) hd[k] = h[size_t(data_pos[k])];
            auto rx_bits = qam64_demodulate(equalize(dem.data, hd));
            int errors = 0;
            for (size_t i = 0; i < bits.size(); ++i) errors += bits[i] != rx_bits[i];
            all[si].push_back(double(errors) / double(bits.size()));
        }
        for (double b : all[si]) mean_ber[si] += b;
        mean_ber[si] /= n_seeds;
        for (double b : all[si]) var_ber[si] += (b - mean_ber[si]) * (b - mean_ber[si]);
        var_ber[si] /= (n_seeds - 1);
    }
    for (size_t si = 0; si + 1 < snrs.size(); ++si) {
        double se = std::sqrt(var_ber[si] / n_seeds + var_ber[si + 1] / n_seeds);
        CHECK(mean_ber[si + 1] <= mean_ber[si] + se);
    }
    CHECK(mean_ber.front() > mean_ber.back()); // the sweep actually moves
}
