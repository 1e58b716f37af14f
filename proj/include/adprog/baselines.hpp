#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "adprog/rollout.hpp"

namespace adprog {

struct GreedyGridConfig {
    double grid_step = 0.1;
    double grid_max = 10.4;
};

/// Exhaustive per-step maximization of the training reward over the product
/// grid {0, step, ..., max}^|V| of absolute allocations. Cost grows
/// exponentially with |V|; intended for the two-region setup. Ties are
/// broken toward the lexicographically largest allocation so lower-indexed
/// regions carry the load, making the baseline deterministic.
inline Vec greedy_grid_allocation(const Vec& X, const ModelParams& params, const SimConfig& cfg,
                                  const GreedyGridConfig& grid = {}) {
    const auto n = X.size();
    const int levels = static_cast<int>(std::floor(grid.grid_max / grid.grid_step + 0.5)) + 1;
    Vec best = Vec::Zero(n);
    double best_reward = -std::numeric_limits<double>::infinity();
    Vec candidate(n);
    std::vector<int> idx(static_cast<size_t>(n), 0);
    // Descending enumeration keeps the first (lexicographically largest) maximum.
    const auto value_of = [&](int level) { return (levels - 1 - level) * grid.grid_step; };
    while (true) {
        for (Eigen::Index v = 0; v < n; ++v) candidate[v] = value_of(idx[static_cast<size_t>(v)]);
        const Vec Y = compute_activity(candidate, X, params.gamma, params.activity_exponent);
        const double reward = reward_training(compute_cognition(candidate), compute_cost(Y),
                                              cfg.c_task, params.lambda, cfg.reward_floor,
                                              cfg.reward_ceiling);
        if (reward > best_reward) {
            best_reward = reward;
            best = candidate;
        }
        Eigen::Index pos = n - 1;
        while (pos >= 0) {
            if (++idx[static_cast<size_t>(pos)] < levels) break;
            idx[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return best;
}

/// The action source formed from the greedy allocation: the step change is
/// whatever reaches the grid argmax. Used with clipping disabled, since the
/// grid picks absolute allocations rather than bounded adjustments.
inline ActionSource greedy_grid_policy(const ModelParams& params, const SimConfig& cfg,
                                       const GreedyGridConfig& grid = {}) {
    return [params, cfg, grid](const StepContext& ctx) {
        return Vec(greedy_grid_allocation(ctx.X, params, cfg, grid) - ctx.I_prev);
    };
}

/// Trajectory driven by per-step greedy maximization instead of a learned
/// policy.
inline RolloutResult rollout_without_rl(const SimState& initial, const BrainGraph& graph,
                                        const ModelParams& params, const SimConfig& cfg,
                                        const GreedyGridConfig& grid = {}) {
    RolloutOptions opts;
    opts.clip_actions = false;
    return rollout(initial, greedy_grid_policy(params, cfg, grid), graph, params, cfg,
                   make_training_reward(params.lambda, cfg), opts);
}

enum class ControlRewardKind { mismatch_only, cost_only };

/// Single-term probe rewards. The mismatch-only variant keeps the overshoot
/// penalty factor; the cost-only variant rewards nothing but low activity
/// (maximal at zero allocation). Neither takes a trade-off weight.
inline RewardFn make_control_reward(ControlRewardKind kind, const SimConfig& cfg) {
    if (kind == ControlRewardKind::mismatch_only) {
        return [c = cfg.c_task, lo = cfg.reward_floor, hi = cfg.reward_ceiling](double C, double) {
            const double overshoot = std::max(C - c, 0.0);
            return std::clamp(-(std::abs(c - C) * std::pow(100.0, overshoot)), lo, hi);
        };
    }
    return [lo = cfg.reward_floor, hi = cfg.reward_ceiling](double, double M) {
        return std::clamp(-M, lo, hi);
    };
}

}  // namespace adprog
