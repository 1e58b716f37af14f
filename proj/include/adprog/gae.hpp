#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "adprog/graph.hpp"

namespace adprog {

struct GaeResult {
    Vec advantages;
    Vec value_targets;  // advantages + values
};

/// Generalized advantage estimation over a single trajectory.
/// values[k] is the baseline at the state where reward[k] was earned;
/// terminal_value bootstraps past the last step (zero at a true episode end).
inline GaeResult compute_gae(const Vec& rewards, const Vec& values, double terminal_value,
                             double return_discount, double gae_lambda) {
    if (rewards.size() != values.size())
        throw std::invalid_argument("compute_gae: rewards/values length mismatch");
    if (gae_lambda <= 0.0 || gae_lambda > 1.0)
        throw std::invalid_argument("compute_gae: gae_lambda must be in (0, 1]");
    GaeResult out;
    const Eigen::Index n = rewards.size();
    out.advantages = Vec::Zero(n);
    double running = 0.0;
    for (Eigen::Index k = n; k-- > 0;) {
        const double next_value = (k + 1 < n) ? values[k + 1] : terminal_value;
        const double delta = rewards[k] + return_discount * next_value - values[k];
        running = delta + return_discount * gae_lambda * running;
        out.advantages[k] = running;
    }
    out.value_targets = out.advantages + values;
    return out;
}

/// Batch-level normalization to zero mean, unit variance. A degenerate
/// all-equal batch maps to zeros.
inline Vec normalize_advantages(const Vec& adv) {
    if (adv.size() == 0) return adv;
    const double mean = adv.mean();
    const double var = (adv.array() - mean).square().sum() / static_cast<double>(adv.size());
    return (adv.array() - mean) / (std::sqrt(var) + 1e-8);
}

}  // namespace adprog
