#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "semlink/alloc.hpp"
#include "semlink/chanest.hpp"
#include "semlink/channel.hpp"
#include "semlink/coding.hpp"
#include "semlink/dppo.hpp"
#include "semlink/kb.hpp"

namespace semlink {

enum class ChannelModel { ideal, sui5, multipath, bsc };

ChannelModel parse_channel_model(const std::string& s);
std::string to_string(ChannelModel m);
CodeVariant parse_code_variant(const std::string& s);
ChestMethod parse_chest_method(const std::string& s);

// One experiment's full parameter set. Defaults are the "desk" profile,
// sized so every sweep runs in minutes on a single core; apply_profile
// switches to the full-scale feature count and budgets.
struct ExperimentConfig {
    // codec / data
    int C = 64, W = 2, H = 2, N = 10, d = 32;
    int n_samples = 2000;
    double noise_std = 1.0;
    int codec_hidden = 64;
    int codec_epochs = 400;
    double codec_lr = 0.5;
    uint64_t codec_seed = 1;
    double holdout_frac = 0.2;
    int str_samples = 256;

    // ofdm & channel
    int n_sub = 272, n_pilot = 16, cp_len = 72;
    ChannelModel channel = ChannelModel::sui5;
    double snr_db = 10.0;
    int n_paths = 3;
    double bsc_p = 0.03;
    CodeVariant code = CodeVariant::hamming74;
    ChestMethod chest = ChestMethod::mmse;
    int chest_probe_symbols = 8; // sounding symbols averaged into the estimate

    // quantization & objective
    double gamma = 1.0;
    double beta = 0.5;
    double l0 = 10.0;
    int budget = 128;

    DppoHyper dppo;

    // experiment surface
    std::string allocator = "rbam";
    std::vector<std::string> allocators = {"eam", "rbam", "ram"};
    std::string axis;
    std::vector<double> axis_values;
    int trials = 200;
    uint64_t master_seed = 42;

    OfdmConfig ofdm() const { return OfdmConfig::make(n_sub, n_pilot, cp_len); }
    void apply_profile(const std::string& name); // "desk" | "full"
    void apply_axis(const std::string& axis_name, double value);
    void validate() const;
};

ExperimentConfig load_config(const std::string& path); // JSON, keys documented in README

struct EpisodeResult {
    double distortion = 0.0;
    double reward = 0.0;
    double chest_mse = 0.0;
    bool top1_correct = false;
    int bits_used = 0;
    std::vector<int> bits;
    bool failed = false;
    std::string fail_stage;
};

// Everything fixed for one episode: the drawn sample, its importance
// weights, one channel realization with its estimate, the greedy
// subcarrier matching and the dither stream. Evaluating an allocation is
// then a pure function of the bit vector, so paired comparisons across
// allocators share bitwise-identical randomness.
struct EpisodeEnv {
    const ExperimentConfig* cfg = nullptr;
    const CodecParams* codec = nullptr;
    OfdmConfig ofdm;
    FeatureMaps features;
    int label = 0;
    ImportanceWeights importance; // full g*v weights (metric + matching)
    Vec omega_gonly;              // normalized |g| only (ablation input)
    ChannelRealization ch;
    PowerDelayProfile pdp;
    std::vector<cplx> h_est;  // over all n_sub bins
    std::vector<cplx> h_data; // h_est restricted to the data subcarriers
    double chest_mse = 0.0;
    SubcarrierAssignment assign;
    std::vector<double> dither_u; // C*W*H unit dithers in [-1/2, 1/2]
    uint64_t noise_seed = 0;
    uint64_t bsc_seed = 0;
    // One receiver noise floor per episode, calibrated to the nominal frame
    // load, so allocations of different shapes face identical noise.
    double sigma2 = 0.0;

    // Receives the features for a complete allocation (the full digital
    // chain) and scores it.
    FeatureMaps transmit(const std::vector<int>& bits) const;
    double reward_for(const std::vector<int>& bits, const Vec& omega_reward) const;
    EpisodeResult run(const std::vector<int>& bits) const;
    EpisodeResult run_analog() const;

    EpisodeContext rl_context(bool simplified) const;
};

// Trained per-config artifacts plus the deterministic dataset split.
struct Workspace {
    ExperimentConfig cfg;
    SyntheticDataset ds;
    std::vector<int> train_idx, test_idx;
    CodecParams codec;
    Vec str;
    std::map<std::string, PolicyParams> policies;
};

// Generates the dataset, trains the codec and computes the persisted
// task-relevance weights. Policies are trained separately.
Workspace build_workspace(const ExperimentConfig& cfg, TrainReport* report = nullptr);

// Rebuilds the deterministic dataset/split but takes codec, relevance
// weights and policies from an existing knowledge base.
Workspace build_workspace_from_kb(const ExperimentConfig& cfg, const KnowledgeBase& kb);

KnowledgeBase to_kb(const Workspace& ws);

// Mean pooled-gradient relevance over a calibration slice of the training
// split, persisted alongside the codec.
Vec compute_str(const CodecParams& codec, const SyntheticDataset& ds,
                const std::vector<int>& train_idx, int max_samples);

int default_b_max(int budget, int n_semantics);

// Builds the episode for a (seed, split) draw. Training episodes come from
// the train split, evaluation episodes from the held-out split.
std::shared_ptr<EpisodeEnv> make_episode_env(const Workspace& ws,
                                             const ExperimentConfig& cfg,
                                             uint64_t episode_seed, bool from_test);

// Trains a bit-allocation policy on the workspace's train split.
TrainResult train_policy(Workspace& ws, bool simplified,
                         const std::function<void(const TrainCurvePoint&)>& on_iter = {});

// Reward of a baseline allocation on the training episode for (iteration,
// slot) — used for paired learning-curve comparisons.
double baseline_episode_reward(const Workspace& ws, int iteration, int slot,
                               const std::string& allocator);

// Runs one evaluation episode with the named allocator.
EpisodeResult run_episode(const Workspace& ws, const ExperimentConfig& cfg,
                          const std::string& allocator, uint64_t episode_seed);

// CSV emitters. All output is deterministic for a fixed master seed.
std::string run_sweep(const Workspace& ws);
struct CompareResult {
    std::string summary_csv;
    std::string winrate_csv;
};
CompareResult compare_allocators(const Workspace& ws);
std::string export_importance_map(const Workspace& ws, const std::string& allocator);

// Channel-estimation error for one random symbol through one realization.
double measure_chest_mse(const OfdmConfig& cfg, ChestMethod method, double snr_db,
                         uint64_t seed);

std::string format_csv_double(double v);

} // namespace semlink
