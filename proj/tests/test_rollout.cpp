#include <catch2/catch_amalgamated.hpp>

#include "adprog/rollout.hpp"

using namespace adprog;

namespace {

SimState healthy_state(const ModelParams& p) {
    return make_initial_state((Vec(2) << 3.5, 3.4).finished(), (Vec(2) << 0.1, 0.05).finished(),
                              (Vec(2) << 1.0, 0.9).finished(), (Vec(2) << 7.0, 3.0).finished(), p);
}

}  // namespace

TEST_CASE("frozen dynamics are a fixed point under zero actions") {
    const BrainGraph g = make_two_region_graph();
    ModelParams p;  // all rates zero
    SimConfig cfg;
    const SimState s0 = healthy_state(p);
    const ActionSource zero = [](const StepContext& ctx) { return Vec(Vec::Zero(ctx.X.size())); };
    const RolloutResult r = rollout(s0, zero, g, p, cfg, make_training_reward(1.0, cfg));
    REQUIRE(r.states.size() == 11);
    REQUIRE(r.rewards.size() == 10);
    CHECK_FALSE(r.truncated);
    for (const auto& s : r.states) {
        CHECK(s.X == s0.X);
        CHECK(s.D == s0.D);
        CHECK(s.I == s0.I);
        CHECK(s.C == s0.C);
    }
}

TEST_CASE("actions are clipped and the allocation floors at zero") {
    const BrainGraph g = make_two_region_graph();
    ModelParams p;
    SimConfig cfg;
    SimState s0 = make_initial_state((Vec(2) << 3.0, 3.0).finished(), Vec::Zero(2), Vec::Zero(2),
                                     (Vec(2) << 3.0, 1.0).finished(), p);
    const ActionSource plunge = [](const StepContext&) {
        return Vec((Vec(2) << -10.0, -10.0).finished());
    };
    const RolloutResult r = rollout(s0, plunge, g, p, cfg, make_training_reward(1.0, cfg));
    CHECK(r.states[1].I[0] == 1.0);
    CHECK(r.states[1].I[1] == 0.0);
    CHECK(r.states[2].I[0] == 0.0);
    CHECK(r.states[2].I[1] == 0.0);
    for (size_t t = 2; t < r.states.size(); ++t) CHECK(r.states[t].I.isZero());
}

TEST_CASE("state consistency holds at every step") {
    const BrainGraph g = make_two_region_graph();
    ModelParams p;
    p.alpha1 = 0.2;
    p.alpha2_gamma = 0.02;
    p.beta = 0.05;
    SimConfig cfg;
    const SimState s0 = healthy_state(p);
    int tick = 0;
    const ActionSource wobble = [&tick](const StepContext& ctx) {
        ++tick;
        Vec delta(ctx.X.size());
        for (Eigen::Index i = 0; i < delta.size(); ++i)
            delta[i] = (tick % 3 == 0 ? -0.5 : 0.25) * static_cast<double>(i + 1);
        return delta;
    };
    const RolloutResult r = rollout(s0, wobble, g, p, cfg, make_training_reward(2.0, cfg));
    for (const auto& s : r.states) {
        CHECK(s.C == s.I.sum());
        CHECK(s.M == s.Y.sum());
        const Vec y = compute_activity(s.I, s.X, p.gamma, p.activity_exponent);
        CHECK(s.Y == y);
        CHECK((s.I.array() >= 0.0).all());
        CHECK((s.X.array() > 0.0).all());
    }
    // monotone atrophy under nonnegative amyloid and activity
    for (size_t t = 1; t < r.states.size(); ++t)
        for (Eigen::Index v = 0; v < 2; ++v) CHECK(r.states[t].X[v] <= r.states[t - 1].X[v]);
    // every training reward respects the clamp
    for (double rew : r.rewards) {
        CHECK(rew >= cfg.reward_floor);
        CHECK(rew <= cfg.reward_ceiling);
    }
}

TEST_CASE("region collapse truncates and freezes the trajectory") {
    const BrainGraph g = make_two_region_graph();
    ModelParams p;
    p.alpha1 = 50.0;  // collapses immediately
    SimConfig cfg;
    const SimState s0 = healthy_state(p);
    const ActionSource zero = [](const StepContext& ctx) { return Vec(Vec::Zero(ctx.X.size())); };
    const RolloutResult r = rollout(s0, zero, g, p, cfg, make_training_reward(1.0, cfg));
    CHECK(r.truncated);
    CHECK(r.truncated_at == 1);
    CHECK(r.states.size() == 1);
    CHECK(r.rewards.empty());
    CHECK(r.truncation_reason == "region collapse");
}

TEST_CASE("rollout is deterministic for a deterministic source") {
    const BrainGraph g = make_two_region_graph();
    ModelParams p;
    p.alpha1 = 0.3;
    p.alpha2_gamma = 0.03;
    p.beta = 0.08;
    SimConfig cfg;
    const SimState s0 = healthy_state(p);
    const ActionSource drift = [](const StepContext& ctx) {
        return Vec((0.05 * ctx.X).cwiseMin(1.0));
    };
    const RolloutResult a = rollout(s0, drift, g, p, cfg, make_training_reward(1.0, cfg));
    const RolloutResult b = rollout(s0, drift, g, p, cfg, make_training_reward(1.0, cfg));
    REQUIRE(a.states.size() == b.states.size());
    for (size_t t = 0; t < a.states.size(); ++t) {
        CHECK(a.states[t].X == b.states[t].X);
        CHECK(a.states[t].I == b.states[t].I);
    }
    for (size_t k = 0; k < a.rewards.size(); ++k) CHECK(a.rewards[k] == b.rewards[k]);
}
