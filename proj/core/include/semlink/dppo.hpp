#pragma once

#include <array>
#include <functional>

#include "semlink/mlp.hpp"
#include "semlink/rng.hpp"
#include "semlink/semcodec.hpp"

namespace semlink {

// Hyperparameters of the bit-allocation learner. The defaults are the
// simulator's standard operating point.
struct DppoHyper {
    double eta = 0.99;          // discount factor
    double beta = 0.5;          // distortion weight in the reward
    double epsilon_clip = 0.25; // surrogate clipping range
    double c1 = 0.5;            // value-error coefficient
    double c2 = 0.01;           // entropy bonus coefficient
    double lr = 1e-3;
    int epochs = 20;            // optimizer passes per sampled batch
    double l0 = 10.0;           // reward offset keeping rewards positive
    double dropout = 0.0;       // optional actor hidden dropout, off by default
    int hidden = 64;
    int iterations = 500;
    int batch_episodes = 8;
    int window = 50;            // sliding window for the convergence check
    double tol = 0.0;           // 0 disables early stopping
    uint64_t seed = 7;
    bool masked = true;         // false = penalty-only ablation mode
    int train_pool = 32;        // distinct training samples episodes draw from
    // Optional: subtract each trajectory's mean advantage before the update.
    bool center_advantages = false;
};

// Fixed 8-value state summary: pooled feature statistics (mean, std, min,
// max), this semantic's importance, the mean of the still-unvisited
// importances, the remaining budget fraction and the step progress.
struct RlState {
    std::array<double, 8> v{};
};
constexpr int kStateDim = 8;

// Per-step legal actions {1, ..., valid_upper}: one bit is reserved for each
// semantic not yet visited so a positive allocation always remains feasible.
struct ActionSpace {
    int max_bits = 1;    // actor output width
    int valid_upper = 1; // number of currently legal actions
};

ActionSpace make_action_space(int max_bits, int remaining_budget,
                              int steps_remaining_after);

// Actor: 3 FC layers (tanh, tanh, masked softmax over max_bits actions).
// Critic: 3 FC layers (tanh, tanh, scalar). theta_old is snapshotted at the
// trainer's batch boundaries only.
struct PolicyParams {
    Mlp actor;
    Mlp critic;
    int b_max = 1;

    static PolicyParams make(int b_max, int hidden, uint64_t seed);
};

struct TrajectoryStep {
    RlState state;
    int action = 1;   // bits chosen at this step (1-based action value)
    double reward = 0.0;
    double value = 0.0;    // critic estimate recorded at sampling time
    double logp_old = 0.0; // log-prob of the action under the sampling policy
    int valid_upper = 1;
    std::vector<Vec> dropout_masks; // empty unless dropout is enabled
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    Vec returns;
    Vec advantages;
    double complete_reward = 0.0; // reward of the fully decided allocation
};

RlState encode_state(const FeatureMaps& a, const Vec& omega, int step_index,
                     int allocated_so_far, int budget);

// Masked softmax over actions 1..max_bits; probabilities of invalid actions
// are exactly 0 and the valid ones sum to 1.
Vec actor_forward(const RlState& state, const PolicyParams& params,
                  const ActionSpace& space);

double critic_forward(const RlState& state, const PolicyParams& params);

// One episode's fixed context: features, importance, budget and a
// deterministic evaluator mapping a complete allocation to
// l0 + task_perf - beta * distortion.
struct EpisodeContext {
    const FeatureMaps* features = nullptr;
    Vec omega;
    int budget = 0;
    int b_max = 1;
    std::function<double(const std::vector<int>&)> evaluate;
    // Optional per-step rewards of a fixed reference allocation on this
    // same episode. Used by the trainer as an action-independent control
    // variate: the episode's sample/channel level cancels out of the
    // learning signal while the optimum is unchanged.
    Vec baseline_rewards;
};

// Reward for the partial allocation after `decided` choices: the remaining
// semantics are provisionally given 1 bit each and the full pipeline runs.
double step_reward(const EpisodeContext& ctx, const std::vector<int>& decided);

// Reverse-accumulated discounted suffix sums.
Vec discounted_returns(const Vec& rewards, double eta);

// returns - values, elementwise.
Vec advantages(const Vec& returns, const Vec& values);

double prob_ratio(double logp_new, double logp_old);

// min(p*m, clip(p, 1-eps, 1+eps)*m) for a single step.
double clipped_surrogate(double ratio, double advantage, double epsilon);

struct PolicyGrad {
    Mlp::Grad actor;
    Mlp::Grad critic;
    static PolicyGrad zeros_like(const PolicyParams& p);
    void add_scaled(const PolicyGrad& o, double s);
    void scale(double s);
};

// Mean over steps of -L1 + c1*(value - return)^2 - c2*entropy. When grad is
// non-null the exact parameter gradient is accumulated into it.
double total_loss(const Trajectory& traj, const PolicyParams& params,
                  const DppoHyper& hyper, PolicyGrad* grad = nullptr);

void sgd_update(PolicyParams& params, const PolicyGrad& grad, double lr);

struct PolicyAdamState {
    AdamState actor, critic;
    static PolicyAdamState zeros_like(const PolicyParams& p);
};
void adam_update(PolicyParams& params, const PolicyGrad& grad, PolicyAdamState& st,
                 double lr);

// Samples one trajectory under `params` (the sampling policy). In unmasked
// mode infeasible actions earn a -1 penalty and are coerced to the largest
// valid choice.
Trajectory collect_trajectory(const EpisodeContext& ctx, const PolicyParams& params,
                              const DppoHyper& hyper, Rng& action_rng,
                              Rng* dropout_rng = nullptr);

struct TrainCurvePoint {
    int iteration = 0;
    double mean_reward = 0.0;     // mean per-step reward over the batch
    double complete_reward = 0.0; // mean full-allocation reward over the batch
    double loss = 0.0;
    double entropy = 0.0;
};

struct TrainResult {
    PolicyParams params;
    std::vector<TrainCurvePoint> curve;
    bool converged = false;
};

// Supplies the episode for (iteration, slot). Implementations derive all
// channel/dither/sample randomness from their own seeds so training is
// reproducible end to end.
using EpisodeFactory = std::function<EpisodeContext(int iteration, int slot)>;

TrainResult train_dppo(const EpisodeFactory& make_episode, const DppoHyper& hyper);

// Greedy (argmax) rollout; ties resolve to the smaller action. Feasible by
// construction of the masked action space.
std::vector<int> infer_allocation(const PolicyParams& params, const FeatureMaps& a,
                                  const Vec& omega, int budget);

} // namespace semlink
