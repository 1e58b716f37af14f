#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "adprog/policy.hpp"

namespace adprog {

struct TrpoConfig {
    double kl_limit = 0.01;
    int cg_iterations = 10;
    double cg_damping = 0.1;
    double cg_tolerance = 1e-10;
    int line_search_backtracks = 10;
    double line_search_shrink = 0.5;
};

/// Everything the update needs from a collected batch. Actions and
/// log-densities are pre-clip, recorded under the sampling policy.
struct PolicyBatch {
    Mat obs;        // N x obs_dim
    Mat actions;    // N x act_dim
    Vec logp_old;   // N
    Mat mean_old;   // N x act_dim
    Vec log_std_old;
    Vec advantages;  // normalized
};

/// Importance-weighted surrogate objective (to be maximized):
/// mean_k exp(logp(a_k) - logp_old(a_k)) * advantage_k.
inline double surrogate_objective(const GaussianPolicy& policy, const PolicyBatch& batch) {
    const Vec logp = policy.log_prob(batch.obs, batch.actions);
    return ((logp - batch.logp_old).array().exp() * batch.advantages.array()).mean();
}

/// Analytic gradient of the surrogate with respect to the flat parameters.
/// d surrogate / d mean_kd = ratio_k * adv_k * (a_kd - mu_kd) / sigma_d^2,
/// pushed through the network by backprop; the log-std component is
/// ratio_k * adv_k * (z_kd^2 - 1) with z the standardized residual.
inline Vec surrogate_gradient(const GaussianPolicy& policy, const PolicyBatch& batch) {
    const auto n = batch.obs.rows();
    const Mlp::Cache cache = policy.net().forward(policy.scaled(batch.obs));
    const Mat& mu = cache.output;
    const Vec sigma = policy.std_dev();

    Vec ratio_adv(n);
    {
        Vec logp(n);
        for (Eigen::Index k = 0; k < n; ++k)
            logp[k] = policy.log_prob_single(mu.row(k).transpose(), batch.actions.row(k).transpose());
        ratio_adv = ((logp - batch.logp_old).array().exp() * batch.advantages.array()) /
                    static_cast<double>(n);
    }

    Mat grad_mean(n, mu.cols());
    Vec grad_log_std = Vec::Zero(sigma.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index d = 0; d < mu.cols(); ++d) {
            const double z = (batch.actions(k, d) - mu(k, d)) / sigma[d];
            grad_mean(k, d) = ratio_adv[k] * z / sigma[d];
            grad_log_std[d] += ratio_adv[k] * (z * z - 1.0);
        }
    }

    Vec grad(policy.param_count());
    grad.head(policy.net().param_count()) = policy.net().vjp(cache, grad_mean);
    grad.tail(sigma.size()) = grad_log_std;
    return grad;
}

/// Fisher-vector product of the policy's KL Hessian at the current
/// parameters, Gauss-Newton form: the mean block is J' diag(1/sigma^2) J
/// averaged over states, the log-std block is the constant 2 per dimension.
/// Exactly symmetric, which conjugate gradient relies on.
inline Vec fisher_vector_product(const GaussianPolicy& policy, const Mat& obs, const Vec& v,
                                 double damping) {
    const auto n = obs.rows();
    const auto net_count = policy.net().param_count();
    const Mlp::Cache cache = policy.net().forward(policy.scaled(obs));
    const Mat jv = policy.net().jvp(cache, v.head(net_count));
    const Vec inv_var = policy.std_dev().array().square().inverse();
    Mat weighted = jv;
    weighted.array().rowwise() *= inv_var.transpose().array();
    Vec out(v.size());
    out.head(net_count) = policy.net().vjp(cache, weighted) / static_cast<double>(n);
    out.tail(inv_var.size()) = 2.0 * v.tail(inv_var.size());
    return out + damping * v;
}

/// Conjugate gradient for F x = g with a caller-supplied symmetric
/// positive-definite product.
inline Vec conjugate_gradient(const std::function<Vec(const Vec&)>& matvec, const Vec& g,
                              int iterations, double tolerance) {
    Vec x = Vec::Zero(g.size());
    Vec r = g;
    Vec p = g;
    double rs = r.squaredNorm();
    const double threshold = tolerance * tolerance * std::max(g.squaredNorm(), 1e-300);
    for (int it = 0; it < iterations && rs > threshold; ++it) {
        const Vec fp = matvec(p);
        const double alpha = rs / p.dot(fp);
        x += alpha * p;
        r -= alpha * fp;
        const double rs_next = r.squaredNorm();
        p = r + (rs_next / rs) * p;
        rs = rs_next;
    }
    return x;
}

struct TrpoDiagnostics {
    bool accepted = false;
    double mean_kl = 0.0;
    double surrogate_before = 0.0;
    double surrogate_delta = 0.0;
    double step_scale = 0.0;
    int backtracks_used = 0;
};

/// One KL-constrained natural-gradient step. Solves F x = g by conjugate
/// gradient, scales the step to the KL limit, then backtracks until a
/// candidate both improves the surrogate and respects mean KL <= limit.
/// Exhausting the backtracks leaves the policy unchanged (flagged, not an
/// error).
inline TrpoDiagnostics trpo_update(GaussianPolicy& policy, const PolicyBatch& batch,
                                   const TrpoConfig& cfg) {
    TrpoDiagnostics diag;
    diag.surrogate_before = surrogate_objective(policy, batch);

    const Vec g = surrogate_gradient(policy, batch);
    if (g.norm() < 1e-12) return diag;  // nothing to do, e.g. all-zero advantages

    const auto fvp = [&](const Vec& v) {
        return fisher_vector_product(policy, batch.obs, v, cfg.cg_damping);
    };
    const Vec x = conjugate_gradient(fvp, g, cfg.cg_iterations, cfg.cg_tolerance);
    const double xfx = x.dot(fvp(x));
    if (xfx <= 0.0) return diag;
    const Vec full_step = std::sqrt(2.0 * cfg.kl_limit / xfx) * x;

    const Vec params_old = policy.flat_params();
    double scale = 1.0;
    for (int j = 0; j < cfg.line_search_backtracks; ++j, scale *= cfg.line_search_shrink) {
        policy.set_flat_params(params_old + scale * full_step);
        const double surrogate = surrogate_objective(policy, batch);
        const double kl = policy.mean_kl(batch.obs, batch.mean_old, batch.log_std_old);
        if (surrogate > diag.surrogate_before && kl <= cfg.kl_limit) {
            diag.accepted = true;
            diag.mean_kl = kl;
            diag.surrogate_delta = surrogate - diag.surrogate_before;
            diag.step_scale = scale;
            diag.backtracks_used = j;
            return diag;
        }
    }
    policy.set_flat_params(params_old);
    diag.backtracks_used = cfg.line_search_backtracks;
    return diag;
}

}  // namespace adprog
