#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "adprog/dynamics.hpp"
#include "adprog/graph.hpp"
#include "adprog/params.hpp"

namespace adprog {

/// One individual's instantaneous state. All derived quantities (Y, C, M)
/// are kept consistent with X and I at the same timestep.
struct SimState {
    int t = 0;
    Vec X;     // region sizes
    Vec D;     // instantaneous amyloid
    Vec phi;   // accumulated amyloid
    Vec I;     // information processing per region
    Vec Y;     // activity per region
    double C = 0.0;  // total cognition = sum(I)
    double M = 0.0;  // energetic cost = sum(Y)
};

inline SimState make_initial_state(const Vec& X0, const Vec& D0, const Vec& phi0,
                                   const Vec& I0, const ModelParams& params) {
    if ((X0.array() <= 0.0).any())
        throw std::invalid_argument("make_initial_state: region sizes must be positive");
    if ((I0.array() < 0.0).any())
        throw std::invalid_argument("make_initial_state: information must be nonnegative");
    SimState s;
    s.t = 0;
    s.X = X0;
    s.D = D0;
    s.phi = phi0;
    s.I = I0;
    s.Y = compute_activity(I0, X0, params.gamma, params.activity_exponent);
    s.C = compute_cognition(s.I);
    s.M = compute_cost(s.Y);
    return s;
}

/// What an action source observes when asked for a step-t action:
/// the just-advanced region sizes and the previous allocation.
struct StepContext {
    const Vec& X;
    const Vec& I_prev;
    int t;
};

/// Returns the per-region change of information processing.
using ActionSource = std::function<Vec(const StepContext&)>;

/// Maps (C, M) to a scalar reward.
using RewardFn = std::function<double(double C, double M)>;

inline RewardFn make_training_reward(double lambda, const SimConfig& cfg) {
    return [lambda, c = cfg.c_task, lo = cfg.reward_floor, hi = cfg.reward_ceiling](
               double C, double M) { return reward_training(C, M, c, lambda, lo, hi); };
}

inline RewardFn make_plain_reward(double lambda, const SimConfig& cfg) {
    return [lambda, c = cfg.c_task](double C, double M) { return reward_plain(C, M, c, lambda); };
}

struct RolloutResult {
    std::vector<SimState> states;   // states[0] is the initial state
    std::vector<double> rewards;    // rewards[k] belongs to states[k+1]
    bool truncated = false;
    int truncated_at = -1;          // step at which a region collapsed
    std::string truncation_reason;

    int steps() const { return static_cast<int>(rewards.size()); }
};

struct RolloutOptions {
    bool clip_actions = true;  // the greedy baseline picks absolute targets and opts out
};

/// Runs the coupled difference equations for cfg.horizon steps.
/// Per step: advance D, phi, X from the previous step's values, stop and
/// freeze if any region collapsed, otherwise let the action source adjust I
/// and derive Y, C, M and the reward from the new contemporaneous values.
/// Deterministic given a deterministic action source.
inline RolloutResult rollout(const SimState& initial, const ActionSource& source,
                             const BrainGraph& graph, const ModelParams& params,
                             const SimConfig& cfg, const RewardFn& reward,
                             const RolloutOptions& opts = {}) {
    RolloutResult out;
    out.states.reserve(static_cast<size_t>(cfg.horizon) + 1);
    out.states.push_back(initial);
    for (int t = 1; t <= cfg.horizon; ++t) {
        const SimState& prev = out.states.back();
        SimState next;
        next.t = prev.t + 1;
        next.D = step_amyloid(prev.D, graph, params.beta, cfg.dt);
        next.phi = accumulate_amyloid(prev.phi, prev.D, cfg.dt);
        next.X = step_atrophy(prev.X, prev.D, prev.Y, params.alpha1, params.alpha2_gamma / params.gamma,
                              cfg.dt);
        if (has_collapsed(next.X)) {
            out.truncated = true;
            out.truncated_at = t;
            out.truncation_reason = "region collapse";
            break;
        }
        Vec delta = source(StepContext{next.X, prev.I, t});
        if (opts.clip_actions)
            delta = delta.cwiseMax(-cfg.action_clip).cwiseMin(cfg.action_clip);
        next.I = (prev.I + delta).cwiseMax(0.0);
        next.Y = compute_activity(next.I, next.X, params.gamma, params.activity_exponent);
        next.C = compute_cognition(next.I);
        next.M = compute_cost(next.Y);
        out.rewards.push_back(reward(next.C, next.M));
        out.states.push_back(std::move(next));
    }
    return out;
}

}  // namespace adprog
