#include <doctest.h>

#include <cmath>

#include "semlink/dppo.hpp"

using namespace semlink;

namespace {

FeatureMaps toy_features(int c, double fill = 0.2) {
    FeatureMaps a;
    a.C = c;
    a.W = 2;
    a.H = 2;
    a.v.assign(size_t(c * 4), fill);
    for (size_t i = 0; i < a.v.size(); ++i) a.v[i] += 0.05 * double(i % 5);
    return a;
}

Vec toy_omega(int c) {
    Vec w(static_cast<size_t>(c));
    double sum = 0.0;
    for (int i = 0; i < c; ++i) {
        w[size_t(i)] = 1.0 + double((i * 7) % 5);
        sum += w[size_t(i)];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Closed-form reward stand-in: concave value of bits weighted by importance.
EpisodeContext toy_context(const FeatureMaps* a, const Vec* omega, int budget, int b_max) {
    EpisodeContext ctx;
    ctx.features = a;
    ctx.omega = *omega;
    ctx.budget = budget;
    ctx.b_max = b_max;
    Vec om = *omega;
    ctx.evaluate = [om](const std::vector<int>& b) {
        double v = 10.0;
        for (size_t i = 0; i < b.size(); ++i) v += om[i] * std::sqrt(double(b[i]));
        return v;
    };
    return ctx;
}

double loss_at(const Trajectory& traj, const PolicyParams& params, const DppoHyper& hyper) {
    return total_loss(traj, params, hyper);
}

} // namespace

TEST_CASE("state encoding summarizes the step") {
    auto a = toy_features(4);
    auto omega = toy_omega(4);
    auto s = encode_state(a, omega, 1, 0, 48);
    CHECK(s.v[6] == doctest::Approx(1.0));        // full budget remaining
    CHECK(s.v[7] == doctest::Approx(1.0 / 4.0));  // progress

    FeatureMaps constant;
    constant.C = 1;
    constant.W = 2;
    constant.H = 2;
    constant.v.assign(4, 0.3);
    auto sc = encode_state(constant, {1.0}, 1, 0, 8);
    CHECK(sc.v[0] == doctest::Approx(0.3));
    CHECK(sc.v[1] == doctest::Approx(0.0));
    CHECK(sc.v[2] == doctest::Approx(0.3));
    CHECK(sc.v[3] == doctest::Approx(0.3));

    auto last = encode_state(a, omega, 4, 45, 48);
    CHECK(last.v[6] == doctest::Approx(3.0 / 48.0));
    CHECK(last.v[7] == doctest::Approx(1.0));
    CHECK_THROWS(encode_state(a, omega, 5, 0, 48));
}

TEST_CASE("action space reserves one bit per remaining semantic") {
    auto s = make_action_space(16, 48, 15);
    CHECK(s.valid_upper == 16);
    CHECK(make_action_space(16, 18, 15).valid_upper == 3);
    CHECK(make_action_space(16, 3, 2).valid_upper == 1);
    CHECK(make_action_space(4, 100, 0).valid_upper == 4);
    CHECK_THROWS(make_action_space(16, 2, 2));
}

TEST_CASE("masked softmax: valid mass sums to one, invalid mass is exactly zero") {
    auto params = PolicyParams::make(8, 16, 3);
    auto a = toy_features(4);
    auto omega = toy_omega(4);
    auto state = encode_state(a, omega, 2, 5, 32);
    for (int vu = 1; vu <= 8; ++vu) {
        auto probs = actor_forward(state, params, ActionSpace{8, vu});
        double sum = 0.0;
        for (int j = 0; j < 8; ++j) {
            if (j < vu) {
                sum += probs[size_t(j)];
            } else {
                CHECK(probs[size_t(j)] == 0.0);
            }
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    auto one = actor_forward(state, params, ActionSpace{8, 1});
    CHECK(one[0] == doctest::Approx(1.0));
}

TEST_CASE("zero-weight actor spreads probability uniformly over valid actions") {
    auto params = PolicyParams::make(6, 8, 4);
    for (auto& w : params.actor.w)
        for (auto& v : w.a) v = 0.0;
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    auto probs = actor_forward(encode_state(a, omega, 1, 0, 12), params, ActionSpace{6, 4});
    for (int j = 0; j < 4; ++j) CHECK(probs[size_t(j)] == doctest::Approx(0.25));
}

TEST_CASE("critic is deterministic and zero for zero weights") {
    auto params = PolicyParams::make(6, 8, 5);
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    auto state = encode_state(a, omega, 1, 0, 12);
    CHECK(critic_forward(state, params) == critic_forward(state, params));

    for (auto& w : params.critic.w)
        for (auto& v : w.a) v = 0.0;
    for (auto& b : params.critic.b)
        for (auto& v : b) v = 0.0;
    CHECK(critic_forward(state, params) == 0.0);
}

TEST_CASE("critic gradient matches finite differences") {
    auto params = PolicyParams::make(6, 8, 6);
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    auto state = encode_state(a, omega, 2, 4, 12);
    Vec sv(state.v.begin(), state.v.end());

    Mlp::Cache cache;
    (void)params.critic.forward(sv, &cache);
    auto grad = Mlp::Grad::zeros_like(params.critic);
    params.critic.backward(cache, {1.0}, grad);

    auto ptrs = params.critic.param_ptrs();
    std::vector<double> flat_grad;
    for (const auto& w : grad.w)
        for (double v : w.a) flat_grad.push_back(v);
    for (const auto& b : grad.b)
        for (double v : b) flat_grad.push_back(v);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (size_t p = 0; p < ptrs.size(); ++p) {
        double orig = *ptrs[p];
        *ptrs[p] = orig + h;
        double up = params.critic.forward(sv)[0];
        *ptrs[p] = orig - h;
        double down = params.critic.forward(sv)[0];
        *ptrs[p] = orig;
        double fd = (up - down) / (2.0 * h);
        max_rel = std::max(max_rel, std::abs(fd - flat_grad[p]) / (std::abs(fd) + 1e-6));
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("step reward fills unvisited semantics with one bit") {
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    EpisodeContext ctx;
    ctx.features = &a;
    ctx.omega = omega;
    ctx.budget = 12;
    ctx.b_max = 4;
    std::vector<int> seen;
    ctx.evaluate = [&seen](const std::vector<int>& b) {
        seen = b;
        return 1.0;
    };
    step_reward(ctx, {3});
    CHECK(seen == std::vector<int>{3, 1, 1});
    step_reward(ctx, {3, 2});
    CHECK(seen == std::vector<int>{3, 2, 1});
}

TEST_CASE("discounted returns hand cases") {
    CHECK(discounted_returns({1, 1, 1}, 1.0) == Vec{3, 2, 1});
    CHECK(discounted_returns({2, 5, 7}, 0.0) == Vec{2, 5, 7});
    auto r = discounted_returns({1, 1, 1}, 0.5);
    CHECK(r[0] == doctest::Approx(1.75));
    CHECK(r[1] == doctest::Approx(1.5));
    CHECK(r[2] == doctest::Approx(1.0));
    CHECK_THROWS(discounted_returns({}, 0.9));
}

TEST_CASE("advantages are elementwise and shift linearly") {
    CHECK(advantages({2.0}, {0.5}) == Vec{1.5});
    auto zero = advantages({1, 2, 3}, {1, 2, 3});
    for (double v : zero) CHECK(v == 0.0);
    auto base = advantages({1, 2}, {0.5, 0.25});
    auto shifted = advantages({1, 2}, {1.5, 1.25});
    CHECK(shifted[0] == doctest::Approx(base[0] - 1.0));
    CHECK(shifted[1] == doctest::Approx(base[1] - 1.0));
    CHECK_THROWS(advantages({1.0}, {1.0, 2.0}));
}

TEST_CASE("probability ratio basics and direct-division oracle") {
    CHECK(prob_ratio(-1.0, -1.0) == doctest::Approx(1.0));
    CHECK(prob_ratio(std::log(2.0) - 1.0, -1.0) == doctest::Approx(2.0));

    auto pa = PolicyParams::make(6, 8, 7);
    auto pb = PolicyParams::make(6, 8, 8);
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    auto state = encode_state(a, omega, 1, 0, 18);
    ActionSpace space{6, 5};
    auto qa = actor_forward(state, pa, space);
    auto qb = actor_forward(state, pb, space);
    for (int act = 0; act < 5; ++act) {
        double direct = qb[size_t(act)] / qa[size_t(act)];
        double via_log = prob_ratio(std::log(qb[size_t(act)]), std::log(qa[size_t(act)]));
        CHECK(std::abs(direct - via_log) < 1e-12 * (1.0 + direct));
    }
}

TEST_CASE("clipped surrogate hand cases") {
    CHECK(clipped_surrogate(1.1, 2.0, 0.25) == doctest::Approx(2.2)); // clip inactive
    CHECK(clipped_surrogate(2.0, 1.0, 0.25) == doctest::Approx(1.25));
    CHECK(clipped_surrogate(0.5, -1.0, 0.25) == doctest::Approx(-0.75));
}

TEST_CASE("total loss isolates the surrogate when c1 = c2 = 0") {
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    auto ctx = toy_context(&a, &omega, 12, 4);
    DppoHyper hyper;
    hyper.c1 = 0.0;
    hyper.c2 = 0.0;
    auto params = PolicyParams::make(4, 8, 11);
    Rng rng(12);
    auto traj = collect_trajectory(ctx, params, hyper, rng);

    double expected = 0.0;
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        // Same policy, so the ratio is exactly 1 and the surrogate reduces
        // to the advantage.
        expected += -traj.advantages[t];
    }
    expected /= double(traj.steps.size());
    CHECK(total_loss(traj, params, hyper) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("entropy term vanishes for a forced single action") {
    auto a = toy_features(2);
    Vec omega = {0.5, 0.5};
    EpisodeContext ctx;
    ctx.features = &a;
    ctx.omega = omega;
    ctx.budget = 2; // exactly one bit each: valid_upper is always 1
    ctx.b_max = 4;
    ctx.evaluate = [](const std::vector<int>&) { return 1.0; };
    DppoHyper hyper;
    hyper.c1 = 0.0;
    hyper.c2 = 100.0; // would dominate if entropy were nonzero
    auto params = PolicyParams::make(4, 8, 13);
    Rng rng(14);
    auto traj = collect_trajectory(ctx, params, hyper, rng);
    for (const auto& s : traj.steps) CHECK(s.valid_upper == 1);
    DppoHyper no_entropy = hyper;
    no_entropy.c2 = 0.0;
    CHECK(total_loss(traj, params, hyper) ==
          doctest::Approx(total_loss(traj, params, no_entropy)).epsilon(1e-12));
}

TEST_CASE("full loss gradient matches finite differences on a toy shape") {
    auto a = toy_features(3);
    auto omega = toy_omega(3);
    auto ctx = toy_context(&a, &omega, 9, 4);
    DppoHyper hyper;
    auto sampling = PolicyParams::make(4, 6, 17);
    Rng rng(18);
    auto traj = collect_trajectory(ctx, sampling, hyper, rng);

    // Evaluate the loss at slightly different parameters so the ratio terms
    // are informative but stay inside the clip band.
    auto params = sampling;
    Rng prng(19);
    for (double* p : params.actor.param_ptrs()) *p += 0.02 * prng.gaussian();
    for (double* p : params.critic.param_ptrs()) *p += 0.02 * prng.gaussian();

    auto grad = PolicyGrad::zeros_like(params);
    (void)total_loss(traj, params, hyper, &grad);

    std::vector<double> flat;
    for (const auto& w : grad.actor.w)
        for (double v : w.a) flat.push_back(v);
    for (const auto& b : grad.actor.b)
        for (double v : b) flat.push_back(v);
    for (const auto& w : grad.critic.w)
        for (double v : w.a) flat.push_back(v);
    for (const auto& b : grad.critic.b)
        for (double v : b) flat.push_back(v);

    std::vector<double*> ptrs;
    for (double* p : params.actor.param_ptrs()) ptrs.push_back(p);
    for (double* p : params.critic.param_ptrs()) ptrs.push_back(p);
    REQUIRE(ptrs.size() == flat.size());

    const double h = 1e-5;
    double max_rel = 0.0;
    for (size_t p = 0; p < ptrs.size(); ++p) {
        double orig = *ptrs[p];
        *ptrs[p] = orig + h;
        double up = loss_at(traj, params, hyper);
        *ptrs[p] = orig - h;
        double down = loss_at(traj, params, hyper);
        *ptrs[p] = orig;
        double fd = (up - down) / (2.0 * h);
        max_rel = std::max(max_rel, std::abs(fd - flat[p]) / (std::abs(fd) + 1e-6));
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("parameter updates: plain step, zero lr, adam at zero gradient") {
    auto params = PolicyParams::make(4, 6, 23);
    auto grad = PolicyGrad::zeros_like(params);
    for (auto& w : grad.actor.w)
        for (auto& v : w.a) v = 0.5;

    auto before = params;
    sgd_update(params, grad, 0.0);
    for (size_t l = 0; l < params.actor.w.size(); ++l)
        for (size_t i = 0; i < params.actor.w[l].a.size(); ++i)
            CHECK(params.actor.w[l].a[i] == before.actor.w[l].a[i]);

    sgd_update(params, grad, 0.1);
    for (size_t l = 0; l < params.actor.w.size(); ++l)
        for (size_t i = 0; i < params.actor.w[l].a.size(); ++i)
            CHECK(params.actor.w[l].a[i] ==
                  doctest::Approx(before.actor.w[l].a[i] - 0.1 * grad.actor.w[l].a[i]));

    auto zero_grad = PolicyGrad::zeros_like(params);
    auto adam = PolicyAdamState::zeros_like(params);
    auto pre_adam = params;
    adam_update(params, zero_grad, adam, 1e-3);
    for (size_t l = 0; l < params.actor.w.size(); ++l)
        for (size_t i = 0; i < params.actor.w[l].a.size(); ++i)
            CHECK(params.actor.w[l].a[i] == pre_adam.actor.w[l].a[i]);
}

TEST_CASE("trajectories are feasible by construction and reproducible") {
    auto a = toy_features(6);
    auto omega = toy_omega(6);
    auto ctx = toy_context(&a, &omega, 20, 8);
    DppoHyper hyper;
    auto params = PolicyParams::make(8, 16, 29);
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto traj = collect_trajectory(ctx, params, hyper, rng);
        int total = 0;
        for (const auto& s : traj.steps) {
            CHECK(s.action >= 1);
            total += s.action;
            CHECK(std::isfinite(s.logp_old));
        }
        CHECK(total <= 20);
        CHECK(traj.steps.size() == 6);

        Rng rng2(seed);
        auto traj2 = collect_trajectory(ctx, params, hyper, rng2);
        for (size_t t = 0; t < traj.steps.size(); ++t) {
            CHECK(traj.steps[t].action == traj2.steps[t].action);
            CHECK(traj.steps[t].reward == traj2.steps[t].reward);
        }
    }
}

TEST_CASE("greedy inference is feasible and breaks ties toward fewer bits") {
    auto a = toy_features(5);
    auto omega = toy_omega(5);
    auto params = PolicyParams::make(6, 8, 31);
    auto bits = infer_allocation(params, a, omega, 15);
    REQUIRE(bits.size() == 5);
    int total = 0;
    for (int b : bits) {
        CHECK(b >= 1);
        total += b;
    }
    CHECK(total <= 15);

    for (auto& w : params.actor.w)
        for (auto& v : w.a) v = 0.0;
    for (auto& b : params.actor.b)
        for (auto& v : b) v = 0.0;
    auto uniform_bits = infer_allocation(params, a, omega, 15);
    for (int b : uniform_bits) CHECK(b == 1); // argmax tie -> lowest action
}

TEST_CASE("training loop runs deterministically on a toy environment") {
    auto a = toy_features(4);
    auto omega = toy_omega(4);
    DppoHyper hyper;
    hyper.iterations = 12;
    hyper.batch_episodes = 2;
    hyper.hidden = 8;
    hyper.seed = 5;

    auto factory = [&](int, int) { return toy_context(&a, &omega, 12, 4); };
    auto res1 = train_dppo(factory, hyper);
    auto res2 = train_dppo(factory, hyper);
    REQUIRE(res1.curve.size() == 12);
    for (size_t i = 0; i < res1.curve.size(); ++i) {
        CHECK(res1.curve[i].mean_reward == res2.curve[i].mean_reward);
        CHECK(res1.curve[i].loss == res2.curve[i].loss);
        CHECK(std::isfinite(res1.curve[i].loss));
    }
}
