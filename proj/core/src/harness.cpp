#include "semlink/harness.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "semlink/qam.hpp"

namespace semlink {

namespace {

constexpr uint64_t kTagSample = seed_tag('s', 'm', 'p', 'l');
constexpr uint64_t kTagChannel = seed_tag('c', 'h', 'a', 'n');
constexpr uint64_t kTagProbeData = seed_tag('p', 'r', 'b', 'e');
constexpr uint64_t kTagProbeNoise = seed_tag('p', 'n', 'o', 'i');
constexpr uint64_t kTagNoise = seed_tag('n', 'o', 'i', 's');
constexpr uint64_t kTagDither = seed_tag('d', 't', 'h', 'r');
constexpr uint64_t kTagBsc = seed_tag('b', 's', 'c', 's');
constexpr uint64_t kTagRam = seed_tag('r', 'a', 'm', 'a');
constexpr uint64_t kTagTrainEp = seed_tag('r', 'l', 'e', 'p');
constexpr uint64_t kTagSweepEp = seed_tag('s', 'w', 'p', 'e');
constexpr uint64_t kTagCompareEp = seed_tag('c', 'm', 'p', 'e');
constexpr uint64_t kTagExport = seed_tag('x', 'p', 'r', 't');

std::vector<int> rank_desc(const Vec& values) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return values[size_t(a)] > values[size_t(b)];
    });
    return idx;
}

struct RunningStats {
    int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / double(n);
        m2 += d * (x - mean);
    }
    double stddev() const { return n > 1 ? std::sqrt(m2 / double(n - 1)) : 0.0; }
};

BitVec random_bits(size_t n, Rng& rng) {
    BitVec b(n);
    for (auto& v : b) v = uint8_t(rng.next_u64() & 1u);
    return b;
}

double mean_power(const std::vector<cplx>& v) {
    double p = 0.0;
    for (const cplx& s : v) p += std::norm(s);
    return v.empty() ? 0.0 : p / double(v.size());
}

PowerDelayProfile profile_for(const ExperimentConfig& cfg) {
    PowerDelayProfile pdp;
    std::vector<double> db;
    if (cfg.channel == ChannelModel::sui5) {
        pdp.delays = {0, 4, 10};
        db = {0.0, -5.0, -10.0};
    } else if (cfg.channel == ChannelModel::multipath) {
        for (int j = 0; j < cfg.n_paths; ++j) {
            pdp.delays.push_back(
                cfg.n_paths == 1 ? 0 : int(std::lround(10.0 * double(j) / double(cfg.n_paths - 1))));
            db.push_back(-5.0 * double(j));
        }
    } else {
        return pdp;
    }
    double total = 0.0;
    for (double d : db) total += std::pow(10.0, d / 10.0);
    for (double d : db) pdp.powers.push_back(std::pow(10.0, d / 10.0) / total);
    return pdp;
}

SubcarrierAssignment build_assignment(const Vec& omega, const Vec& gains) {
    const int c = int(omega.size());
    const int n_data = int(gains.size());
    SubcarrierAssignment out;
    out.subcarrier_of.assign(size_t(c), -1);
    out.frame_of.assign(size_t(c), 0);
    auto ranked = rank_desc(omega);
    for (int start = 0, frame = 0; start < c; start += n_data, ++frame) {
        const int count = std::min(n_data, c - start);
        Vec sub(static_cast<size_t>(count));
        for (int j = 0; j < count; ++j) sub[size_t(j)] = omega[size_t(ranked[size_t(start + j)])];
        auto frame_assign = allocate_subcarriers(sub, gains);
        for (int j = 0; j < count; ++j) {
            int sem = ranked[size_t(start + j)];
            out.subcarrier_of[size_t(sem)] = frame_assign.subcarrier_of[size_t(j)];
            out.frame_of[size_t(sem)] = frame;
        }
    }
    return out;
}

void check_bits(const std::vector<int>& bits, int c, int budget) {
    if (int(bits.size()) != c)
        throw std::invalid_argument("episode: allocation length != semantics count");
    int total = 0;
    for (int b : bits) {
        if (b < 1 || b > 30) throw std::invalid_argument("episode: bits out of range");
        total += b;
    }
    if (total > budget) throw std::invalid_argument("episode: allocation exceeds budget");
}

} // namespace

ChannelModel parse_channel_model(const std::string& s) {
    if (s == "ideal") return ChannelModel::ideal;
    if (s == "sui5") return ChannelModel::sui5;
    if (s == "multipath") return ChannelModel::multipath;
    if (s == "bsc") return ChannelModel::bsc;
    throw std::invalid_argument("unknown channel model: " + s);
}

std::string to_string(ChannelModel m) {
    switch (m) {
        case ChannelModel::ideal: return "ideal";
        case ChannelModel::sui5: return "sui5";
        case ChannelModel::multipath: return "multipath";
        case ChannelModel::bsc: return "bsc";
    }
    return "?";
}

CodeVariant parse_code_variant(const std::string& s) {
    if (s == "identity") return CodeVariant::identity;
    if (s == "hamming74") return CodeVariant::hamming74;
    throw std::invalid_argument("unknown code variant: " + s);
}

ChestMethod parse_chest_method(const std::string& s) {
    if (s == "ls_interp") return ChestMethod::ls_interp;
    if (s == "mmse") return ChestMethod::mmse;
    throw std::invalid_argument("unknown channel estimator: " + s);
}

void ExperimentConfig::apply_profile(const std::string& name) {
    if (name == "desk") return; // defaults
    if (name == "full") {
        C = 512;
        n_samples = 4000;
        str_samples = 512;
        budget = 1100;
        trials = 50;
        return;
    }
    throw std::invalid_argument("unknown profile: " + name);
}

void ExperimentConfig::apply_axis(const std::string& axis_name, double value) {
    if (axis_name == "snr_db") {
        snr_db = value;
    } else if (axis_name == "n_paths") {
        channel = ChannelModel::multipath;
        n_paths = int(std::lround(value));
    } else if (axis_name == "n_pilots") {
        n_pilot = int(std::lround(value));
    } else if (axis_name == "budget") {
        budget = int(std::lround(value));
    } else if (axis_name == "bsc_p") {
        channel = ChannelModel::bsc;
        bsc_p = value;
    } else {
        throw std::invalid_argument("unknown sweep axis: " + axis_name);
    }
}

void ExperimentConfig::validate() const {
    if (C < 2 || W < 1 || H < 1 || N < 2 || d < 1)
        throw std::invalid_argument("config: bad codec shape");
    if (n_samples < N) throw std::invalid_argument("config: dataset smaller than class count");
    if (!(holdout_frac > 0.0 && holdout_frac < 1.0))
        throw std::invalid_argument("config: holdout_frac must be in (0,1)");
    if (budget < C) throw std::invalid_argument("config: budget below one bit per semantic");
    if (!(gamma > 0.0)) throw std::invalid_argument("config: gamma must be positive");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (!(bsc_p >= 0.0 && bsc_p <= 1.0)) throw std::invalid_argument("config: bsc_p out of range");
    ofdm().validate();
}

int default_b_max(int budget, int n_semantics) {
    return std::max(1, std::min(16, budget - n_semantics + 1));
}

// ---------------------------------------------------------------------------
// Episode environment
// ---------------------------------------------------------------------------

FeatureMaps EpisodeEnv::transmit(const std::vector<int>& bits) const {
    const int c = features.C;
    const int ms = features.map_size();
    check_bits(bits, c, cfg->budget);

    ChannelCode code{cfg->code};

    // Quantize every map entry with its semantic's resolution.
    std::vector<QuantizerSpec> specs(static_cast<size_t>(c));
    std::vector<BitVec> info(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i) {
        specs[size_t(i)] = QuantizerSpec{cfg->gamma, bits[size_t(i)]};
        BitVec& stream = info[size_t(i)];
        stream.reserve(size_t(ms * bits[size_t(i)]));
        const double* m = features.map(i);
        const double step = specs[size_t(i)].step();
        for (int e = 0; e < ms; ++e) {
            double z = dither_u[size_t(i * ms + e)] * step;
            auto [idx, val] = dithered_quantize_with(m[e], specs[size_t(i)], z);
            (void)val;
            BitVec enc = encode_bits(idx, specs[size_t(i)]);
            stream.insert(stream.end(), enc.begin(), enc.end());
        }
    }

    std::vector<BitVec> decoded(static_cast<size_t>(c));
    if (cfg->channel == ChannelModel::ideal) {
        decoded = info;
    } else if (cfg->channel == ChannelModel::bsc) {
        for (int i = 0; i < c; ++i) {
            BitVec coded = channel_encode(info[size_t(i)], code);
            BitVec rx = bsc(coded, cfg->bsc_p, derive_seed(bsc_seed, {uint64_t(i)}));
            decoded[size_t(i)] = channel_decode(rx, code, info[size_t(i)].size());
        }
    } else {
        // Per-semantic coded streams onto assigned subcarriers, one QAM
        // symbol per OFDM symbol, frames in time.
        std::vector<size_t> coded_len(static_cast<size_t>(c));
        std::vector<int> sym_count(static_cast<size_t>(c));
        std::vector<std::vector<cplx>> tx_syms(static_cast<size_t>(c));
        for (int i = 0; i < c; ++i) {
            BitVec coded = channel_encode(info[size_t(i)], code);
            coded_len[size_t(i)] = coded.size();
            while (coded.size() % kQamBitsPerSymbol != 0) coded.push_back(0);
            tx_syms[size_t(i)] = qam64_modulate(coded);
            sym_count[size_t(i)] = int(tx_syms[size_t(i)].size());
        }

        int n_frames = 1;
        for (int i = 0; i < c; ++i) n_frames = std::max(n_frames, assign.frame_of[size_t(i)] + 1);
        std::vector<std::vector<int>> frame_members(static_cast<size_t>(n_frames));
        for (int i = 0; i < c; ++i) frame_members[size_t(assign.frame_of[size_t(i)])].push_back(i);

        const int n_data = ofdm.n_data();
        // Each OFDM symbol goes through the channel with noise indexed by
        // its (frame, slot) position: different allocations within one
        // episode face identical per-slot noise rather than a re-dealt
        // stream, so allocation comparisons are common-random-number clean.
        std::vector<std::vector<cplx>> rx_syms(static_cast<size_t>(c));
        for (int i = 0; i < c; ++i) rx_syms[size_t(i)].reserve(size_t(sym_count[size_t(i)]));
        for (int f = 0; f < n_frames; ++f) {
            int dur = 1;
            for (int i : frame_members[size_t(f)]) dur = std::max(dur, sym_count[size_t(i)]);
            for (int t = 0; t < dur; ++t) {
                std::vector<cplx> grid(static_cast<size_t>(n_data), cplx(0.0, 0.0));
                for (int i : frame_members[size_t(f)]) {
                    if (t < sym_count[size_t(i)])
                        grid[size_t(assign.subcarrier_of[size_t(i)])] = tx_syms[size_t(i)][size_t(t)];
                }
                auto tx = ofdm_modulate(grid, ofdm);
                auto rx = apply_channel_fixed_noise(
                    tx, ch, sigma2, derive_seed(noise_seed, {uint64_t(f), uint64_t(t)}));
                auto dem = ofdm_demodulate(rx, ofdm);
                auto eq = equalize(dem.data, h_data);
                for (int i : frame_members[size_t(f)]) {
                    if (t < sym_count[size_t(i)])
                        rx_syms[size_t(i)].push_back(eq[size_t(assign.subcarrier_of[size_t(i)])]);
                }
            }
        }

        for (int i = 0; i < c; ++i) {
            BitVec coded = qam64_demodulate(rx_syms[size_t(i)]);
            coded.resize(coded_len[size_t(i)]); // strip QAM padding
            decoded[size_t(i)] = channel_decode(coded, code, info[size_t(i)].size());
        }
    }

    FeatureMaps out;
    out.C = c;
    out.W = features.W;
    out.H = features.H;
    out.v.assign(size_t(c * ms), 0.0);
    for (int i = 0; i < c; ++i) {
        const int b = bits[size_t(i)];
        double* m = out.map(i);
        for (int e = 0; e < ms; ++e) {
            BitVec group(decoded[size_t(i)].begin() + long(e * b),
                         decoded[size_t(i)].begin() + long((e + 1) * b));
            m[e] = dequantize(group, specs[size_t(i)]);
        }
    }
    return out;
}

double EpisodeEnv::reward_for(const std::vector<int>& bits, const Vec& omega_reward) const {
    FeatureMaps received = transmit(bits);
    double d = weighted_distortion(features, received, omega_reward, &assign);
    double task = -cross_entropy(task_forward(received, *codec).logits, label);
    return cfg->l0 + objective(task, d, cfg->beta);
}

EpisodeResult EpisodeEnv::run(const std::vector<int>& bits) const {
    EpisodeResult res;
    res.bits = bits;
    res.bits_used = std::accumulate(bits.begin(), bits.end(), 0);
    res.chest_mse = chest_mse;
    FeatureMaps received = transmit(bits);
    res.distortion = weighted_distortion(features, received, importance.omega, &assign);
    TaskOutput out = task_forward(received, *codec);
    res.top1_correct = out.label == label;
    res.reward = cfg->l0 + objective(-cross_entropy(out.logits, label), res.distortion, cfg->beta);
    return res;
}

EpisodeResult EpisodeEnv::run_analog() const {
    if (cfg->channel == ChannelModel::bsc)
        throw std::invalid_argument("analog baseline is undefined over a bit channel");

    const int c = features.C;
    const int ms = features.map_size();
    EpisodeResult res;
    res.chest_mse = chest_mse;

    FeatureMaps received;
    received.C = c;
    received.W = features.W;
    received.H = features.H;
    received.v.assign(size_t(c * ms), 0.0);

    if (cfg->channel == ChannelModel::ideal) {
        received.v = features.v;
    } else {
        // Feature pairs ride as I/Q on the semantic's subcarrier; the RMS
        // normalization factor is shared side information.
        const int pairs = (ms + 1) / 2;
        std::vector<std::vector<cplx>> tx_syms(static_cast<size_t>(c), std::vector<cplx>(size_t(pairs)));
        double power = 0.0;
        for (int i = 0; i < c; ++i) {
            const double* m = features.map(i);
            for (int t = 0; t < pairs; ++t) {
                double re = m[2 * t];
                double im = 2 * t + 1 < ms ? m[2 * t + 1] : 0.0;
                tx_syms[size_t(i)][size_t(t)] = cplx(re, im);
                power += re * re + im * im;
            }
        }
        power /= double(c * pairs);
        const double rms = power > 0.0 ? std::sqrt(power) : 1.0;

        int n_frames = 1;
        for (int i = 0; i < c; ++i) n_frames = std::max(n_frames, assign.frame_of[size_t(i)] + 1);
        std::vector<std::vector<int>> frame_members(static_cast<size_t>(n_frames));
        for (int i = 0; i < c; ++i) frame_members[size_t(assign.frame_of[size_t(i)])].push_back(i);

        const int n_data = ofdm.n_data();
        for (int f = 0; f < n_frames; ++f) {
            for (int t = 0; t < pairs; ++t) {
                std::vector<cplx> grid(static_cast<size_t>(n_data), cplx(0.0, 0.0));
                for (int i : frame_members[size_t(f)]) {
                    grid[size_t(assign.subcarrier_of[size_t(i)])] =
                        tx_syms[size_t(i)][size_t(t)] / rms;
                }
                auto tx = ofdm_modulate(grid, ofdm);
                auto rx = apply_channel_fixed_noise(
                    tx, ch, sigma2, derive_seed(noise_seed, {uint64_t(f), uint64_t(t)}));
                auto dem = ofdm_demodulate(rx, ofdm);
                auto eq = equalize(dem.data, h_data);
                for (int i : frame_members[size_t(f)]) {
                    cplx v = eq[size_t(assign.subcarrier_of[size_t(i)])] * rms;
                    double* m = received.map(i);
                    double re = std::clamp(v.real(), -cfg->gamma, cfg->gamma);
                    m[2 * t] = re;
                    if (2 * t + 1 < ms) m[2 * t + 1] = std::clamp(v.imag(), -cfg->gamma, cfg->gamma);
                }
            }
        }
    }

    res.distortion = weighted_distortion(features, received, importance.omega, &assign);
    TaskOutput out = task_forward(received, *codec);
    res.top1_correct = out.label == label;
    res.reward = cfg->l0 + objective(-cross_entropy(out.logits, label), res.distortion, cfg->beta);
    return res;
}

EpisodeContext EpisodeEnv::rl_context(bool simplified) const {
    EpisodeContext ctx;
    ctx.features = &features;
    ctx.omega = simplified ? omega_gonly : importance.omega;
    ctx.budget = cfg->budget;
    ctx.b_max = default_b_max(cfg->budget, features.C);
    Vec om = ctx.omega;
    const EpisodeEnv* self = this;
    ctx.evaluate = [self, om](const std::vector<int>& b) { return self->reward_for(b, om); };
    return ctx;
}

// ---------------------------------------------------------------------------
// Workspace
// ---------------------------------------------------------------------------

Vec compute_str(const CodecParams& codec, const SyntheticDataset& ds,
                const std::vector<int>& train_idx, int max_samples) {
    const int count = std::min<int>(max_samples, int(train_idx.size()));
    if (count < 1) throw std::invalid_argument("compute_str: no calibration samples");
    Vec acc(size_t(codec.C), 0.0);
    for (int s = 0; s < count; ++s) {
        FeatureMaps a = encode(ds.inputs[size_t(train_idx[size_t(s)])], codec);
        Mat grads = grad_logits_wrt_features(a, codec);
        Vec pooled = str_pooled_mean(grads, codec.C, codec.W, codec.H);
        for (size_t k = 0; k < acc.size(); ++k) acc[k] += pooled[k];
    }
    for (auto& v : acc) v = std::abs(v / double(count));
    return acc;
}

Workspace build_workspace(const ExperimentConfig& cfg, TrainReport* report) {
    cfg.validate();
    Workspace ws;
    ws.cfg = cfg;
    ws.ds = generate_dataset(cfg.n_samples, cfg.d, cfg.N, cfg.codec_seed, cfg.noise_std);

    const int n_test = std::max(1, int(std::lround(cfg.holdout_frac * double(cfg.n_samples))));
    const int n_train = cfg.n_samples - n_test;
    if (n_train < cfg.N) throw std::invalid_argument("config: training split too small");
    for (int i = 0; i < n_train; ++i) ws.train_idx.push_back(i);
    for (int i = n_train; i < cfg.n_samples; ++i) ws.test_idx.push_back(i);

    SyntheticDataset train = ws.ds;
    train.inputs.assign(ws.ds.inputs.begin(), ws.ds.inputs.begin() + n_train);
    train.labels.assign(ws.ds.labels.begin(), ws.ds.labels.begin() + n_train);

    CodecShape shape{cfg.C, cfg.W, cfg.H, cfg.codec_hidden};
    ws.codec = train_codec(train, shape, cfg.codec_epochs, cfg.codec_lr, cfg.codec_seed, report);
    ws.str = compute_str(ws.codec, ws.ds, ws.train_idx, cfg.str_samples);
    return ws;
}

Workspace build_workspace_from_kb(const ExperimentConfig& cfg, const KnowledgeBase& kb) {
    cfg.validate();
    if (!kb.codec) throw std::runtime_error("knowledge base has no codec section");
    if (!kb.str) throw std::runtime_error("knowledge base has no relevance section");
    if (kb.codec->C != cfg.C || kb.codec->W != cfg.W || kb.codec->H != cfg.H ||
        kb.codec->N != cfg.N || kb.codec->d != cfg.d)
        throw std::runtime_error("knowledge base codec shape does not match the config");

    Workspace ws;
    ws.cfg = cfg;
    ws.ds = generate_dataset(cfg.n_samples, cfg.d, cfg.N, cfg.codec_seed, cfg.noise_std);
    const int n_test = std::max(1, int(std::lround(cfg.holdout_frac * double(cfg.n_samples))));
    const int n_train = cfg.n_samples - n_test;
    for (int i = 0; i < n_train; ++i) ws.train_idx.push_back(i);
    for (int i = n_train; i < cfg.n_samples; ++i) ws.test_idx.push_back(i);
    ws.codec = *kb.codec;
    ws.str = *kb.str;
    ws.policies = kb.policies;
    return ws;
}

KnowledgeBase to_kb(const Workspace& ws) {
    KnowledgeBase kb;
    kb.codec = ws.codec;
    kb.str = ws.str;
    kb.policies = ws.policies;
    return kb;
}

std::shared_ptr<EpisodeEnv> make_episode_env(const Workspace& ws,
                                             const ExperimentConfig& cfg,
                                             uint64_t episode_seed, bool from_test) {
    // The env keeps a stable copy of the (possibly axis-modified) config.
    struct EnvWithCfg : EpisodeEnv {
        ExperimentConfig owned_cfg;
    };
    auto owned = std::make_shared<EnvWithCfg>();
    owned->owned_cfg = cfg;
    owned->cfg = &owned->owned_cfg;
    owned->codec = &ws.codec;
    owned->ofdm = cfg.ofdm();

    // Training episodes draw from a compact pool so the value head can
    // learn per-sample reward levels through the state; evaluation episodes
    // use the whole held-out split.
    const auto& pool = from_test ? ws.test_idx : ws.train_idx;
    size_t pool_size = from_test
                           ? pool.size()
                           : std::min<size_t>(pool.size(), size_t(cfg.dppo.train_pool));
    int pick = int(derive_seed(episode_seed, {kTagSample}) % uint64_t(pool_size));
    int sample = pool[size_t(pick)];
    owned->features = encode(ws.ds.inputs[size_t(sample)], ws.codec);
    owned->label = ws.ds.labels[size_t(sample)];

    Vec isr = isr_weights(owned->features);
    owned->importance = combine(ws.str, isr);
    owned->omega_gonly = combine(ws.str, Vec(ws.str.size(), 1.0)).omega;

    const int n_data = owned->ofdm.n_data();
    Vec gains(size_t(n_data), 1.0);
    if (cfg.channel == ChannelModel::sui5 || cfg.channel == ChannelModel::multipath) {
        uint64_t chan_seed = derive_seed(episode_seed, {kTagChannel});
        owned->ch = cfg.channel == ChannelModel::sui5
                        ? make_sui5(chan_seed, owned->ofdm)
                        : make_multipath(cfg.n_paths, chan_seed, owned->ofdm);
        owned->pdp = profile_for(cfg);

        // Receiver noise floor for the whole episode, calibrated to the
        // nominal data-symbol load (C loaded bins plus pilots).
        double ref_load =
            double(std::min(cfg.C, n_data) + owned->ofdm.n_pilot) / double(owned->ofdm.n_sub);
        owned->sigma2 = std::isfinite(cfg.snr_db)
                            ? ref_load * std::pow(10.0, -cfg.snr_db / 10.0)
                            : 0.0;

        // Sounding burst: a few symbols of pilots plus random filler data.
        // Pilot observations are averaged across the burst; the resulting
        // estimate is the CSI feedback used for matching and equalization.
        const int probes = std::max(1, cfg.chest_probe_symbols);
        std::vector<cplx> pilot_acc(size_t(owned->ofdm.n_pilot), cplx(0.0, 0.0));
        Rng probe_rng(derive_seed(episode_seed, {kTagProbeData}));
        for (int j = 0; j < probes; ++j) {
            BitVec probe_bits = random_bits(size_t(n_data) * kQamBitsPerSymbol, probe_rng);
            auto probe_tx = ofdm_modulate(qam64_modulate(probe_bits), owned->ofdm);
            auto probe_rx = apply_channel_fixed_noise(
                probe_tx, owned->ch, owned->sigma2,
                derive_seed(episode_seed, {kTagProbeNoise, uint64_t(j)}));
            auto dem = ofdm_demodulate(probe_rx, owned->ofdm);
            for (size_t p = 0; p < pilot_acc.size(); ++p) pilot_acc[p] += dem.pilots[p];
        }
        for (auto& p : pilot_acc) p /= double(probes);
        owned->h_est = estimate_channel(pilot_acc, owned->ofdm, cfg.chest, &owned->pdp,
                                        owned->sigma2 / double(probes));

        double mse = 0.0;
        for (int k = 0; k < owned->ofdm.n_sub; ++k)
            mse += std::norm(owned->h_est[size_t(k)] - owned->ch.freq_response[size_t(k)]);
        owned->chest_mse = mse / double(owned->ofdm.n_sub);

        const auto& data_pos = owned->ofdm.data_positions_cached();
        owned->h_data.resize(data_pos.size());
        for (size_t k = 0; k < data_pos.size(); ++k) {
            owned->h_data[k] = owned->h_est[size_t(data_pos[k])];
            gains[k] = std::abs(owned->h_data[k]);
        }
    }

    owned->assign = build_assignment(owned->importance.omega, gains);

    Rng dither_rng(derive_seed(episode_seed, {kTagDither}));
    owned->dither_u.resize(size_t(owned->features.total()));
    for (auto& u : owned->dither_u) u = dither_rng.uniform(-0.5, 0.5);

    owned->noise_seed = derive_seed(episode_seed, {kTagNoise});
    owned->bsc_seed = derive_seed(episode_seed, {kTagBsc});
    return owned;
}

// ---------------------------------------------------------------------------
// Training and evaluation
// ---------------------------------------------------------------------------

namespace {

EpisodeContext training_context(const Workspace& ws, int iteration, int slot,
                                bool simplified) {
    uint64_t eseed = derive_seed(ws.cfg.master_seed,
                                 {kTagTrainEp, uint64_t(iteration), uint64_t(slot)});
    auto env = make_episode_env(ws, ws.cfg, eseed, /*from_test=*/false);
    EpisodeContext ctx;
    ctx.features = &env->features;
    ctx.omega = simplified ? env->omega_gonly : env->importance.omega;
    ctx.budget = ws.cfg.budget;
    ctx.b_max = default_b_max(ws.cfg.budget, ws.cfg.C);
    Vec om = ctx.omega;
    ctx.evaluate = [env, om](const std::vector<int>& b) { return env->reward_for(b, om); };

    // Per-step rewards of the even allocation on this same episode, the
    // trainer's control variate.
    auto eam_bits = allocate_bits_eam(ctx.omega, ctx.budget).bits;
    ctx.baseline_rewards.reserve(size_t(ws.cfg.C));
    std::vector<int> prefix;
    prefix.reserve(size_t(ws.cfg.C));
    for (int i = 0; i < ws.cfg.C; ++i) {
        prefix.push_back(eam_bits[size_t(i)]);
        ctx.baseline_rewards.push_back(step_reward(ctx, prefix));
    }
    return ctx;
}

std::vector<int> allocate_for(const Workspace& ws, const EpisodeEnv& env,
                              const std::string& allocator, uint64_t episode_seed) {
    const ExperimentConfig& cfg = *env.cfg;
    if (allocator == "eam") return allocate_bits_eam(env.importance.omega, cfg.budget).bits;
    if (allocator == "rbam") return allocate_bits_rbam(env.importance.omega, cfg.budget).bits;
    if (allocator == "ram")
        return allocate_bits_ram(cfg.budget, env.features.C,
                                 derive_seed(episode_seed, {kTagRam}))
            .bits;
    if (allocator == "dppo" || allocator == "dppo_simplified") {
        auto it = ws.policies.find(allocator);
        if (it == ws.policies.end())
            throw std::runtime_error("no trained policy named '" + allocator +
                                     "' in the knowledge base");
        const Vec& om = allocator == "dppo_simplified" ? env.omega_gonly : env.importance.omega;
        return infer_allocation(it->second, env.features, om, cfg.budget);
    }
    throw std::invalid_argument("unknown allocator: " + allocator);
}

} // namespace

TrainResult train_policy(Workspace& ws, bool simplified,
                         const std::function<void(const TrainCurvePoint&)>& on_iter) {
    DppoHyper hyper = ws.cfg.dppo;
    hyper.beta = ws.cfg.beta;
    hyper.l0 = ws.cfg.l0;
    const Workspace& cws = ws;
    EpisodeFactory factory = [&cws, simplified](int it, int slot) {
        return training_context(cws, it, slot, simplified);
    };
    TrainResult res = train_dppo(factory, hyper);
    if (on_iter) {
        for (const auto& pt : res.curve) on_iter(pt);
    }
    ws.policies[simplified ? "dppo_simplified" : "dppo"] = res.params;
    return res;
}

double baseline_episode_reward(const Workspace& ws, int iteration, int slot,
                               const std::string& allocator) {
    uint64_t eseed = derive_seed(ws.cfg.master_seed,
                                 {kTagTrainEp, uint64_t(iteration), uint64_t(slot)});
    auto env = make_episode_env(ws, ws.cfg, eseed, /*from_test=*/false);
    auto bits = allocate_for(ws, *env, allocator, eseed);
    return env->reward_for(bits, env->importance.omega);
}

EpisodeResult run_episode(const Workspace& ws, const ExperimentConfig& cfg,
                          const std::string& allocator, uint64_t episode_seed) {
    EpisodeResult res;
    try {
        auto env = make_episode_env(ws, cfg, episode_seed, /*from_test=*/true);
        if (allocator == "analog") return env->run_analog();
        auto bits = allocate_for(ws, *env, allocator, episode_seed);
        return env->run(bits);
    } catch (const std::exception& e) {
        res.failed = true;
        res.fail_stage = e.what();
    }
    return res;
}

std::string format_csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string run_sweep(const Workspace& ws) {
    const ExperimentConfig& cfg = ws.cfg;
    static const std::vector<std::string> kAxes = {"snr_db", "n_paths", "n_pilots",
                                                   "budget", "bsc_p"};
    if (std::find(kAxes.begin(), kAxes.end(), cfg.axis) == kAxes.end())
        throw std::invalid_argument("run_sweep: invalid axis '" + cfg.axis + "'");
    if (cfg.axis_values.empty())
        throw std::invalid_argument("run_sweep: no axis values");

    std::ostringstream out;
    out << "axis,value,allocator,trials,distortion_mean,distortion_std,accuracy_mean,"
           "accuracy_std,reward_mean,chest_mse_mean\n";

    for (size_t ai = 0; ai < cfg.axis_values.size(); ++ai) {
        const double value = cfg.axis_values[ai];
        ExperimentConfig cfgv = cfg;
        cfgv.apply_axis(cfg.axis, value);
        cfgv.validate();

        std::map<std::string, std::array<RunningStats, 4>> stats; // d, acc, reward, chest
        for (int trial = 0; trial < cfg.trials; ++trial) {
            uint64_t eseed = derive_seed(cfg.master_seed,
                                         {kTagSweepEp, uint64_t(ai),
                                          std::bit_cast<uint64_t>(value), uint64_t(trial)});
            auto env = make_episode_env(ws, cfgv, eseed, /*from_test=*/true);
            for (const auto& name : cfg.allocators) {
                EpisodeResult res;
                if (name == "analog") {
                    res = env->run_analog();
                } else {
                    res = env->run(allocate_for(ws, *env, name, eseed));
                }
                auto& s = stats[name];
                s[0].add(res.distortion);
                s[1].add(res.top1_correct ? 1.0 : 0.0);
                s[2].add(res.reward);
                s[3].add(res.chest_mse);
            }
        }
        for (const auto& name : cfg.allocators) {
            const auto& s = stats[name];
            out << cfg.axis << ',' << format_csv_double(value) << ',' << name << ','
                << cfg.trials << ',' << format_csv_double(s[0].mean) << ','
                << format_csv_double(s[0].stddev()) << ',' << format_csv_double(s[1].mean)
                << ',' << format_csv_double(s[1].stddev()) << ','
                << format_csv_double(s[2].mean) << ',' << format_csv_double(s[3].mean)
                << '\n';
        }
    }
    return out.str();
}

CompareResult compare_allocators(const Workspace& ws) {
    const ExperimentConfig& cfg = ws.cfg;
    const auto& names = cfg.allocators;
    std::map<std::string, std::vector<EpisodeResult>> results;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        uint64_t eseed = derive_seed(cfg.master_seed, {kTagCompareEp, uint64_t(trial)});
        auto env = make_episode_env(ws, cfg, eseed, /*from_test=*/true);
        for (const auto& name : names) {
            EpisodeResult res = name == "analog"
                                    ? env->run_analog()
                                    : env->run(allocate_for(ws, *env, name, eseed));
            results[name].push_back(std::move(res));
        }
    }

    CompareResult out;
    {
        std::ostringstream s;
        s << "allocator,episodes,distortion_mean,distortion_std,accuracy_mean,"
             "accuracy_std,reward_mean\n";
        for (const auto& name : names) {
            RunningStats d, a, r;
            for (const auto& res : results[name]) {
                d.add(res.distortion);
                a.add(res.top1_correct ? 1.0 : 0.0);
                r.add(res.reward);
            }
            s << name << ',' << cfg.trials << ',' << format_csv_double(d.mean) << ','
              << format_csv_double(d.stddev()) << ',' << format_csv_double(a.mean) << ','
              << format_csv_double(a.stddev()) << ',' << format_csv_double(r.mean) << '\n';
        }
        out.summary_csv = s.str();
    }
    {
        std::ostringstream s;
        s << "allocator_a,allocator_b,distortion_win_rate\n";
        for (const auto& na : names) {
            for (const auto& nb : names) {
                if (na == nb) continue;
                int wins = 0;
                for (int t = 0; t < cfg.trials; ++t) {
                    if (results[na][size_t(t)].distortion < results[nb][size_t(t)].distortion)
                        ++wins;
                }
                s << na << ',' << nb << ','
                  << format_csv_double(double(wins) / double(cfg.trials)) << '\n';
            }
        }
        out.winrate_csv = s.str();
    }
    return out;
}

std::string export_importance_map(const Workspace& ws, const std::string& allocator) {
    uint64_t eseed = derive_seed(ws.cfg.master_seed, {kTagExport});
    auto env = make_episode_env(ws, ws.cfg, eseed, /*from_test=*/true);
    auto bits = allocate_for(ws, *env, allocator, eseed);

    std::ostringstream out;
    out << "semantic,g,v,omega,bits\n";
    for (int k = 0; k < env->features.C; ++k) {
        out << k << ',' << format_csv_double(env->importance.g[size_t(k)]) << ','
            << format_csv_double(env->importance.v[size_t(k)]) << ','
            << format_csv_double(env->importance.omega[size_t(k)]) << ','
            << bits[size_t(k)] << '\n';
    }
    return out.str();
}

double measure_chest_mse(const OfdmConfig& cfg, ChestMethod method, double snr_db,
                         uint64_t seed) {
    auto ch = make_sui5(derive_seed(seed, {kTagChannel}), cfg);
    Rng data_rng(derive_seed(seed, {kTagProbeData}));
    BitVec bits = random_bits(size_t(cfg.n_data()) * kQamBitsPerSymbol, data_rng);
    auto tx = ofdm_modulate(qam64_modulate(bits), cfg);
    double noise_var = std::isfinite(snr_db)
                           ? mean_power(tx) * std::pow(10.0, -snr_db / 10.0)
                           : 0.0;
    auto rx = apply_channel(tx, ch, NoiseConfig{snr_db, derive_seed(seed, {kTagProbeNoise})});
    auto dem = ofdm_demodulate(rx, cfg);
    PowerDelayProfile pdp;
    pdp.delays = {0, 4, 10};
    double total = 1.0 + std::pow(10.0, -0.5) + 0.1;
    pdp.powers = {1.0 / total, std::pow(10.0, -0.5) / total, 0.1 / total};
    auto h_est = estimate_channel(dem.pilots, cfg, method, &pdp, noise_var);
    double mse = 0.0;
    for (int k = 0; k < cfg.n_sub; ++k)
        mse += std::norm(h_est[size_t(k)] - ch.freq_response[size_t(k)]);
    return mse / double(cfg.n_sub);
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    auto get = [](const nlohmann::json& o, const char* key, auto& target) {
        if (o.contains(key)) target = o.at(key).get<std::decay_t<decltype(target)>>();
    };

    if (j.contains("profile")) cfg.apply_profile(j.at("profile").get<std::string>());

    if (j.contains("codec")) {
        const auto& c = j.at("codec");
        get(c, "C", cfg.C);
        get(c, "W", cfg.W);
        get(c, "H", cfg.H);
        get(c, "N", cfg.N);
        get(c, "d", cfg.d);
        get(c, "n_samples", cfg.n_samples);
        get(c, "noise_std", cfg.noise_std);
        get(c, "hidden", cfg.codec_hidden);
        get(c, "epochs", cfg.codec_epochs);
        get(c, "lr", cfg.codec_lr);
        get(c, "seed", cfg.codec_seed);
        get(c, "holdout_frac", cfg.holdout_frac);
        get(c, "str_samples", cfg.str_samples);
    }
    if (j.contains("ofdm")) {
        const auto& o = j.at("ofdm");
        get(o, "n_sub", cfg.n_sub);
        get(o, "n_pilot", cfg.n_pilot);
        get(o, "cp_len", cfg.cp_len);
    }
    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        if (c.contains("model")) cfg.channel = parse_channel_model(c.at("model"));
        get(c, "snr_db", cfg.snr_db);
        get(c, "n_paths", cfg.n_paths);
        get(c, "bsc_p", cfg.bsc_p);
    }
    if (j.contains("code") && j.at("code").contains("variant"))
        cfg.code = parse_code_variant(j.at("code").at("variant"));
    if (j.contains("chest")) {
        if (j.at("chest").contains("method"))
            cfg.chest = parse_chest_method(j.at("chest").at("method"));
        get(j.at("chest"), "probe_symbols", cfg.chest_probe_symbols);
    }
    if (j.contains("quant")) get(j.at("quant"), "gamma", cfg.gamma);
    if (j.contains("objective")) {
        get(j.at("objective"), "beta", cfg.beta);
        get(j.at("objective"), "l0", cfg.l0);
    }
    get(j, "budget", cfg.budget);
    if (j.contains("dppo")) {
        const auto& d = j.at("dppo");
        get(d, "eta", cfg.dppo.eta);
        get(d, "epsilon_clip", cfg.dppo.epsilon_clip);
        get(d, "c1", cfg.dppo.c1);
        get(d, "c2", cfg.dppo.c2);
        get(d, "lr", cfg.dppo.lr);
        get(d, "epochs", cfg.dppo.epochs);
        get(d, "hidden", cfg.dppo.hidden);
        get(d, "iterations", cfg.dppo.iterations);
        get(d, "batch_episodes", cfg.dppo.batch_episodes);
        get(d, "window", cfg.dppo.window);
        get(d, "tol", cfg.dppo.tol);
        get(d, "seed", cfg.dppo.seed);
        get(d, "dropout", cfg.dppo.dropout);
        get(d, "masked", cfg.dppo.masked);
        get(d, "train_pool", cfg.dppo.train_pool);
        get(d, "center_advantages", cfg.dppo.center_advantages);
    }
    get(j, "allocator", cfg.allocator);
    if (j.contains("allocators"))
        cfg.allocators = j.at("allocators").get<std::vector<std::string>>();
    if (j.contains("sweep")) {
        get(j.at("sweep"), "axis", cfg.axis);
        if (j.at("sweep").contains("values"))
            cfg.axis_values = j.at("sweep").at("values").get<std::vector<double>>();
    }
    get(j, "trials", cfg.trials);
    get(j, "seed", cfg.master_seed);

    cfg.dppo.beta = cfg.beta;
    cfg.dppo.l0 = cfg.l0;
    return cfg;
}

} // namespace semlink
