#include "semlink/dppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semlink {

ActionSpace make_action_space(int max_bits, int remaining_budget,
                              int steps_remaining_after) {
    ActionSpace s;
    s.max_bits = max_bits;
    s.valid_upper = std::min(max_bits, remaining_budget - steps_remaining_after);
    if (s.valid_upper < 1)
        throw std::invalid_argument("action space: no feasible action (budget exhausted)");
    return s;
}

PolicyParams PolicyParams::make(int b_max, int hidden, uint64_t seed) {
    if (b_max < 1 || hidden < 1) throw std::invalid_argument("policy: bad shape");
    PolicyParams p;
    p.b_max = b_max;
    p.actor = Mlp::make({kStateDim, hidden, hidden, b_max},
                        derive_seed(seed, {seed_tag('a', 'c', 't', 'r')}));
    p.critic = Mlp::make({kStateDim, hidden, hidden, 1},
                         derive_seed(seed, {seed_tag('c', 'r', 't', 'c')}));
    // Zeroed output layers: the initial policy is exactly uniform over the
    // mask and the first value estimates carry no random tilt.
    for (auto& v : p.actor.w.back().a) v = 0.0;
    for (auto& v : p.critic.w.back().a) v = 0.0;
    return p;
}

RlState encode_state(const FeatureMaps& a, const Vec& omega, int step_index,
                     int allocated_so_far, int budget) {
    const int c = a.C;
    if (step_index < 1 || step_index > c)
        throw std::invalid_argument("encode_state: step index out of range");
    const int ms = a.map_size();
    const double* m = a.map(step_index - 1);
    double mean = 0.0, mn = m[0], mx = m[0];
    for (int e = 0; e < ms; ++e) {
        mean += m[e];
        mn = std::min(mn, m[e]);
        mx = std::max(mx, m[e]);
    }
    mean /= double(ms);
    double var = 0.0;
    for (int e = 0; e < ms; ++e) {
        double d = m[e] - mean;
        var += d * d;
    }
    var /= double(ms);

    double rem_mean = 0.0;
    if (step_index < c) {
        for (int j = step_index; j < c; ++j) rem_mean += omega[size_t(j)];
        rem_mean /= double(c - step_index);
    }

    RlState s;
    s.v = {mean,
           std::sqrt(var),
           mn,
           mx,
           omega[size_t(step_index - 1)],
           rem_mean,
           double(budget - allocated_so_far) / double(budget),
           double(step_index) / double(c)};
    return s;
}

namespace {

Vec state_vec(const RlState& s) { return Vec(s.v.begin(), s.v.end()); }

// Log-probabilities of the masked softmax; invalid entries get -inf.
Vec masked_log_softmax(const Vec& logits, int valid_upper) {
    Vec logp(logits.size(), -std::numeric_limits<double>::infinity());
    double mx = logits[0];
    for (int j = 1; j < valid_upper; ++j) mx = std::max(mx, logits[size_t(j)]);
    double lse = 0.0;
    for (int j = 0; j < valid_upper; ++j) lse += std::exp(logits[size_t(j)] - mx);
    lse = mx + std::log(lse);
    for (int j = 0; j < valid_upper; ++j) logp[size_t(j)] = logits[size_t(j)] - lse;
    return logp;
}

} // namespace

Vec actor_forward(const RlState& state, const PolicyParams& params,
                  const ActionSpace& space) {
    if (space.valid_upper < 1)
        throw std::invalid_argument("actor_forward: no valid action");
    Vec logits = params.actor.forward(state_vec(state));
    Vec probs(logits.size(), 0.0);
    auto logp = masked_log_softmax(logits, std::min(space.valid_upper, int(logits.size())));
    for (size_t j = 0; j < probs.size(); ++j) {
        if (std::isfinite(logp[j])) probs[j] = std::exp(logp[j]);
    }
    return probs;
}

double critic_forward(const RlState& state, const PolicyParams& params) {
    return params.critic.forward(state_vec(state))[0];
}

double step_reward(const EpisodeContext& ctx, const std::vector<int>& decided) {
    const int c = ctx.features->C;
    if (decided.empty() || int(decided.size()) > c)
        throw std::invalid_argument("step_reward: bad partial allocation");
    std::vector<int> b(size_t(c), 1); // provisional one bit for unvisited semantics
    std::copy(decided.begin(), decided.end(), b.begin());
    return ctx.evaluate(b);
}

Vec discounted_returns(const Vec& rewards, double eta) {
    if (rewards.empty()) throw std::invalid_argument("discounted_returns: empty rewards");
    Vec r(rewards.size());
    double acc = 0.0;
    for (size_t t = rewards.size(); t-- > 0;) {
        acc = rewards[t] + eta * acc;
        r[t] = acc;
    }
    return r;
}

Vec advantages(const Vec& returns, const Vec& values) {
    if (returns.size() != values.size())
        throw std::invalid_argument("advantages: length mismatch");
    Vec m(returns.size());
    for (size_t t = 0; t < m.size(); ++t) m[t] = returns[t] - values[t];
    return m;
}

double prob_ratio(double logp_new, double logp_old) {
    return std::exp(logp_new - logp_old);
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
    double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

PolicyGrad PolicyGrad::zeros_like(const PolicyParams& p) {
    PolicyGrad g;
    g.actor = Mlp::Grad::zeros_like(p.actor);
    g.critic = Mlp::Grad::zeros_like(p.critic);
    return g;
}

void PolicyGrad::add_scaled(const PolicyGrad& o, double s) {
    actor.add_scaled(o.actor, s);
    critic.add_scaled(o.critic, s);
}

void PolicyGrad::scale(double s) {
    actor.scale(s);
    critic.scale(s);
}

double total_loss(const Trajectory& traj, const PolicyParams& params,
                  const DppoHyper& hyper, PolicyGrad* grad) {
    if (traj.steps.empty()) throw std::invalid_argument("total_loss: empty trajectory");
    if (traj.returns.size() != traj.steps.size() ||
        traj.advantages.size() != traj.steps.size())
        throw std::invalid_argument("total_loss: trajectory not finalized");

    const double inv_t = 1.0 / double(traj.steps.size());
    double loss = 0.0;
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        const auto& step = traj.steps[t];
        const Vec sv = state_vec(step.state);
        const int vu = step.valid_upper;
        const int a = step.action - 1; // action value 1..b_max -> output index

        const std::vector<Vec>* masks =
            step.dropout_masks.empty() ? nullptr : &step.dropout_masks;
        Mlp::Cache acache;
        Vec logits = params.actor.forward(sv, &acache, masks);
        Vec logp = masked_log_softmax(logits, vu);
        double p = prob_ratio(logp[size_t(a)], step.logp_old);
        double m = traj.advantages[t];
        double l1 = clipped_surrogate(p, m, hyper.epsilon_clip);

        double entropy = 0.0;
        for (int j = 0; j < vu; ++j) entropy -= std::exp(logp[size_t(j)]) * logp[size_t(j)];

        Mlp::Cache ccache;
        double value = params.critic.forward(sv, &ccache)[0];
        double verr = value - traj.returns[t];

        loss += inv_t * (-l1 + hyper.c1 * verr * verr - hyper.c2 * entropy);

        if (grad) {
            // d(-L1)/dz: the clip gate passes gradient only when the
            // unclipped branch is active (ratio inside the trust band or
            // the smaller side of the min).
            double clipped = std::clamp(p, 1.0 - hyper.epsilon_clip, 1.0 + hyper.epsilon_clip);
            bool unclipped_active = p * m <= clipped * m;
            double dl1_dlogp = unclipped_active ? m * p : 0.0;

            Vec dz(logits.size(), 0.0);
            // through log-prob of the taken action
            if (dl1_dlogp != 0.0) {
                for (int j = 0; j < vu; ++j) {
                    double pij = std::exp(logp[size_t(j)]);
                    double indicator = (j == a) ? 1.0 : 0.0;
                    dz[size_t(j)] += -inv_t * dl1_dlogp * (indicator - pij);
                }
            }
            // through the entropy bonus: dS/dz_k = -pi_k (log pi_k + S)
            for (int j = 0; j < vu; ++j) {
                double pij = std::exp(logp[size_t(j)]);
                dz[size_t(j)] += -inv_t * hyper.c2 * (-pij * (logp[size_t(j)] + entropy));
            }
            params.actor.backward(acache, dz, grad->actor, nullptr, masks);

            Vec dv(1, inv_t * hyper.c1 * 2.0 * verr);
            params.critic.backward(ccache, dv, grad->critic);
        }
    }
    return loss;
}

void sgd_update(PolicyParams& params, const PolicyGrad& grad, double lr) {
    sgd_step(params.actor, grad.actor, lr);
    sgd_step(params.critic, grad.critic, lr);
}

PolicyAdamState PolicyAdamState::zeros_like(const PolicyParams& p) {
    PolicyAdamState st;
    st.actor = AdamState::zeros_like(p.actor);
    st.critic = AdamState::zeros_like(p.critic);
    return st;
}

void adam_update(PolicyParams& params, const PolicyGrad& grad, PolicyAdamState& st,
                 double lr) {
    adam_step(params.actor, grad.actor, st.actor, lr);
    adam_step(params.critic, grad.critic, st.critic, lr);
}

namespace {

std::vector<Vec> draw_dropout_masks(const Mlp& actor, double p, Rng& rng) {
    std::vector<Vec> masks;
    if (p <= 0.0) return masks;
    const double keep = 1.0 - p;
    for (size_t l = 0; l + 1 < actor.w.size(); ++l) {
        Vec m(static_cast<size_t>(actor.w[l].rows));
        for (auto& v : m) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
        masks.push_back(std::move(m));
    }
    return masks;
}

int sample_masked(const Vec& probs, int valid_upper, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (int j = 0; j < valid_upper; ++j) {
        acc += probs[size_t(j)];
        if (u < acc) return j + 1;
    }
    return valid_upper;
}

} // namespace

Trajectory collect_trajectory(const EpisodeContext& ctx, const PolicyParams& params,
                              const DppoHyper& hyper, Rng& action_rng, Rng* dropout_rng) {
    const int c = ctx.features->C;
    if (ctx.budget < c)
        throw std::invalid_argument("collect_trajectory: budget below one bit per semantic");
    Trajectory traj;
    traj.steps.reserve(size_t(c));
    std::vector<int> decided;
    decided.reserve(size_t(c));
    int allocated = 0;

    for (int i = 1; i <= c; ++i) {
        TrajectoryStep step;
        step.state = encode_state(*ctx.features, ctx.omega, i, allocated, ctx.budget);
        if (hyper.dropout > 0.0 && dropout_rng)
            step.dropout_masks = draw_dropout_masks(params.actor, hyper.dropout, *dropout_rng);

        const int remaining = ctx.budget - allocated;
        auto space = make_action_space(ctx.b_max, remaining, c - i);
        bool penalized = false;
        if (hyper.masked) {
            step.valid_upper = space.valid_upper;
        } else {
            // Ablation: expose the whole output head and penalize overdraws.
            step.valid_upper = ctx.b_max;
        }

        const std::vector<Vec>* masks =
            step.dropout_masks.empty() ? nullptr : &step.dropout_masks;
        Vec logits = params.actor.forward(state_vec(step.state), nullptr, masks);
        Vec logp = masked_log_softmax(logits, step.valid_upper);
        Vec probs(logits.size(), 0.0);
        for (int j = 0; j < step.valid_upper; ++j) probs[size_t(j)] = std::exp(logp[size_t(j)]);

        // The learner sees the sampled action; an overdraw (possible only in
        // unmasked mode) is coerced to the largest valid choice for the
        // environment and earns the penalty reward.
        int sampled = sample_masked(probs, step.valid_upper, action_rng);
        step.action = sampled;
        step.logp_old = logp[size_t(sampled - 1)];
        int executed = sampled;
        if (sampled > space.valid_upper) {
            penalized = true;
            executed = space.valid_upper;
        }

        decided.push_back(executed);
        allocated += executed;

        step.value = critic_forward(step.state, params);
        step.reward = penalized ? -1.0 : step_reward(ctx, decided);
        traj.steps.push_back(std::move(step));
    }

    // Feasibility by construction; asserted on every trajectory.
    if (allocated > ctx.budget)
        throw std::logic_error("collect_trajectory: allocation exceeded budget");

    Vec rewards(traj.steps.size());
    Vec values(traj.steps.size());
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        rewards[t] = traj.steps[t].reward;
        values[t] = traj.steps[t].value;
    }
    traj.returns = discounted_returns(rewards, hyper.eta);
    traj.advantages = advantages(traj.returns, values);
    traj.complete_reward = ctx.evaluate(decided);
    return traj;
}

TrainResult train_dppo(const EpisodeFactory& make_episode, const DppoHyper& hyper) {
    if (hyper.batch_episodes < 1 || hyper.iterations < 1)
        throw std::invalid_argument("train_dppo: bad batch/iteration counts");

    // Shape the networks from the first episode.
    EpisodeContext probe = make_episode(0, 0);
    PolicyParams params = PolicyParams::make(probe.b_max, hyper.hidden,
                                             derive_seed(hyper.seed, {seed_tag('i', 'n', 'i', 't')}));
    const int steps = probe.features->C;
    // Budget-aware initial action prior: a geometric bias profile puts the
    // untrained policy's mean spend near budget/steps instead of the middle
    // of the output head, so exploration starts in the feasible regime.
    if (steps > 0 && probe.budget > steps) {
        double mean_bits = double(probe.budget) / double(steps);
        double kappa = -std::log(1.0 - 1.0 / mean_bits);
        for (int a = 0; a < params.b_max; ++a) {
            params.actor.b.back()[size_t(a)] = -kappa * double(a);
        }
    }
    auto adam = PolicyAdamState::zeros_like(params);

    TrainResult result;
    result.curve.reserve(size_t(hyper.iterations));

    for (int it = 0; it < hyper.iterations; ++it) {
        const PolicyParams theta_old = params;
        std::vector<Trajectory> batch;
        std::vector<Vec> baselines;
        batch.reserve(size_t(hyper.batch_episodes));
        baselines.reserve(size_t(hyper.batch_episodes));
        double mean_reward = 0.0, complete_reward = 0.0;
        for (int k = 0; k < hyper.batch_episodes; ++k) {
            EpisodeContext ctx = make_episode(it, k);
            Rng action_rng(derive_seed(hyper.seed, {seed_tag('a', 'c', 't', 's'),
                                                    uint64_t(it), uint64_t(k)}));
            Rng dropout_rng(derive_seed(hyper.seed, {seed_tag('d', 'r', 'o', 'p'),
                                                     uint64_t(it), uint64_t(k)}));
            auto traj = collect_trajectory(ctx, theta_old, hyper, action_rng,
                                           hyper.dropout > 0.0 ? &dropout_rng : nullptr);
            for (const auto& s : traj.steps) mean_reward += s.reward;
            complete_reward += traj.complete_reward;
            batch.push_back(std::move(traj));
            baselines.push_back(std::move(ctx.baseline_rewards));
        }
        const int steps_per_batch = int(batch.front().steps.size());
        mean_reward /= double(hyper.batch_episodes * steps_per_batch);
        complete_reward /= double(hyper.batch_episodes);

        // The optimizer works on differential trajectories when a reference
        // allocation's step rewards are available: the baseline's rewards
        // (action-independent, same episode randomness) are subtracted
        // before the returns, cancelling the episode's common level out of
        // the learning signal without moving the optimum.
        std::vector<Trajectory> opt_batch = batch;
        for (size_t k = 0; k < opt_batch.size(); ++k) {
            const Vec& base = baselines[k];
            if (base.empty()) continue;
            auto& traj = opt_batch[k];
            if (base.size() != traj.steps.size())
                throw std::invalid_argument("train_dppo: baseline reward length mismatch");
            Vec rewards(traj.steps.size());
            Vec values(traj.steps.size());
            for (size_t t = 0; t < traj.steps.size(); ++t) {
                traj.steps[t].reward -= base[t];
                rewards[t] = traj.steps[t].reward;
                values[t] = traj.steps[t].value;
            }
            traj.returns = discounted_returns(rewards, hyper.eta);
            traj.advantages = advantages(traj.returns, values);
        }

        if (it == 0) {
            // Center the value head on the observed return scale before the
            // first update; otherwise every early advantage is one large
            // positive constant and the actor reinforces arbitrary actions.
            double mean_ret = 0.0;
            size_t count = 0;
            for (const auto& traj : opt_batch) {
                for (double r : traj.returns) mean_ret += r;
                count += traj.returns.size();
            }
            mean_ret /= double(count);
            params.critic.b.back()[0] += mean_ret;
            for (auto& traj : opt_batch) {
                for (size_t t = 0; t < traj.steps.size(); ++t) {
                    traj.steps[t].value = critic_forward(traj.steps[t].state, params);
                }
                Vec values(traj.steps.size());
                for (size_t t = 0; t < values.size(); ++t) values[t] = traj.steps[t].value;
                traj.advantages = advantages(traj.returns, values);
            }
        }

        if (hyper.center_advantages) {
            for (auto& traj : opt_batch) {
                double mean_adv = 0.0;
                for (double m : traj.advantages) mean_adv += m;
                mean_adv /= double(traj.advantages.size());
                for (double& m : traj.advantages) m -= mean_adv;
            }
        }

        double last_loss = 0.0, last_entropy = 0.0;
        for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
            auto grad = PolicyGrad::zeros_like(params);
            double loss = 0.0;
            for (const auto& traj : opt_batch) {
                auto g = PolicyGrad::zeros_like(params);
                loss += total_loss(traj, params, hyper, &g);
                grad.add_scaled(g, 1.0 / double(opt_batch.size()));
            }
            loss /= double(opt_batch.size());
            if (!std::isfinite(loss))
                throw std::runtime_error("train_dppo: loss diverged (non-finite)");
            adam_update(params, grad, adam, hyper.lr);
            last_loss = loss;
        }

        // Entropy of the updated policy on the batch states (diagnostic).
        {
            double ent = 0.0;
            int count = 0;
            for (const auto& traj : batch) {
                for (const auto& s : traj.steps) {
                    ActionSpace sp{params.b_max, s.valid_upper};
                    Vec probs = actor_forward(s.state, params, sp);
                    for (int j = 0; j < s.valid_upper; ++j) {
                        double pj = probs[size_t(j)];
                        if (pj > 0.0) ent -= pj * std::log(pj);
                    }
                    ++count;
                }
            }
            last_entropy = count ? ent / double(count) : 0.0;
        }

        result.curve.push_back({it, mean_reward, complete_reward, last_loss, last_entropy});

        if (hyper.tol > 0.0 && int(result.curve.size()) >= 2 * hyper.window) {
            double recent = 0.0, previous = 0.0;
            const auto& cv = result.curve;
            for (int j = 0; j < hyper.window; ++j) {
                recent += cv[cv.size() - 1 - size_t(j)].mean_reward;
                previous += cv[cv.size() - 1 - size_t(hyper.window) - size_t(j)].mean_reward;
            }
            if (std::abs(recent - previous) / double(hyper.window) < hyper.tol) {
                result.converged = true;
                break;
            }
        }
    }

    result.params = std::move(params);
    return result;
}

std::vector<int> infer_allocation(const PolicyParams& params, const FeatureMaps& a,
                                  const Vec& omega, int budget) {
    const int c = a.C;
    if (budget < c)
        throw std::invalid_argument("infer_allocation: budget below one bit per semantic");
    std::vector<int> bits;
    bits.reserve(size_t(c));
    int allocated = 0;
    for (int i = 1; i <= c; ++i) {
        RlState s = encode_state(a, omega, i, allocated, budget);
        auto space = make_action_space(params.b_max, budget - allocated, c - i);
        Vec probs = actor_forward(s, params, space);
        int best = 1;
        double best_p = probs[0];
        for (int j = 1; j < space.valid_upper; ++j) {
            if (probs[size_t(j)] > best_p) {
                best_p = probs[size_t(j)];
                best = j + 1;
            }
        }
        bits.push_back(best);
        allocated += best;
    }
    return bits;
}

} // namespace semlink
