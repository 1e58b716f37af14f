#pragma once

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "adprog/graph.hpp"
#include "adprog/params.hpp"
#include "adprog/rng.hpp"
#include "adprog/rollout.hpp"

namespace adprog {

/// One longitudinal observation. Values are always stored; the availability
/// flags say which of them count as observed. Instantaneous amyloid and
/// activity are only ever observed in generated data.
struct Visit {
    int year = 0;
    Vec X, phi, D, Y;
    double C = 0.0;
    bool x_ok = false, phi_ok = false, d_ok = false, y_ok = false, c_ok = false;
};

struct SubjectRecord {
    std::string id;
    Demographics demographics;
    std::vector<Visit> visits;
    std::string diagnosis;  // optional label for group plots

    const Visit* visit_at(int year) const {
        for (const auto& v : visits)
            if (v.year == year) return &v;
        return nullptr;
    }

    void validate() const {
        demographics.validate();
        if (visits.empty()) throw std::invalid_argument("SubjectRecord: no visits");
        for (size_t i = 1; i < visits.size(); ++i)
            if (visits[i].year <= visits[i - 1].year)
                throw std::invalid_argument("SubjectRecord: years must be strictly increasing");
        const Visit& base = visits.front();
        if (base.year != 0 || !base.x_ok || !base.phi_ok || !base.c_ok)
            throw std::invalid_argument(
                "SubjectRecord: baseline visit with sizes, amyloid and cognition required");
    }
};

using Cohort = std::vector<SubjectRecord>;

/// Linear map from the two discrete demographic features to the dynamics
/// constants. Defaults keep every parameter in the 1e-2..1e0 range, strong
/// enough that sustained maximal activity erodes a region within the
/// horizon while capacity-capped trajectories usually survive the burn-in.
struct LinearParamMap {
    double alpha1_base = 0.08, alpha1_f1 = 0.04, alpha1_f2 = 0.02;
    double alpha2_base = 0.040, alpha2_f1 = 0.008, alpha2_f2 = 0.005;
    double beta_base = 0.03, beta_f1 = 0.015, beta_f2 = 0.01;

    ModelParams eval(int f1, int f2, int activity_exponent = 1) const {
        ModelParams p;
        p.alpha1 = alpha1_base + alpha1_f1 * f1 + alpha1_f2 * f2;
        p.alpha2_gamma = alpha2_base + alpha2_f1 * f1 + alpha2_f2 * f2;
        p.beta = beta_base + beta_f1 * f1 + beta_f2 * f2;
        p.gamma = 1.0;
        p.activity_exponent = activity_exponent;
        return p;
    }
};

struct CohortConfig {
    int n_subjects = 200;
    Vec x0_mean = (Vec(2) << 3.5, 3.4).finished();
    Mat x0_cov = (Mat(2, 2) << 0.49, 0.20, 0.20, 0.64).finished();
    double d0_min = 0.0, d0_max = 0.2;
    double y_max = 2.5;
    double c_task = 10.0;
    int feature_a_cardinality = 4;
    int feature_b_cardinality = 2;
    LinearParamMap param_map;
    int burn_in_steps = 15;  // total generated steps; the last horizon+1 points are kept
    int horizon = 10;
    int activity_exponent = 1;
    int max_retries = 50;  // resamples allowed when a draw collapses during burn-in
    std::uint64_t seed = 0;

    void validate() const {
        if (n_subjects < 1) throw std::invalid_argument("CohortConfig: n_subjects must be >= 1");
        if (x0_mean.size() != x0_cov.rows() || x0_cov.rows() != x0_cov.cols())
            throw std::invalid_argument("CohortConfig: mean/covariance shape mismatch");
        if (!x0_cov.isApprox(x0_cov.transpose()))
            throw std::invalid_argument("CohortConfig: covariance must be symmetric");
        Eigen::LLT<Mat> llt(x0_cov);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("CohortConfig: covariance must be positive definite");
        if (burn_in_steps < horizon)
            throw std::invalid_argument("CohortConfig: burn_in_steps must cover the horizon");
        if (d0_min < 0.0 || d0_max <= d0_min)
            throw std::invalid_argument("CohortConfig: bad amyloid range");
        if (y_max <= 0.0) throw std::invalid_argument("CohortConfig: y_max must be positive");
    }
};

/// The generating allocation rule: each region takes as much of the
/// remaining demand as its activity cap y_max allows, in region order.
inline Vec capacity_cap_allocation(const Vec& X, double y_max, double c_task, double gamma) {
    Vec I(X.size());
    double remaining = c_task;
    for (Eigen::Index v = 0; v < X.size(); ++v) {
        I[v] = std::min(y_max * X[v] / gamma, remaining);
        remaining -= I[v];
    }
    return I;
}

/// Action source wrapping the generating rule, usable by rollout().
inline ActionSource capacity_cap_policy(double y_max, double c_task, double gamma) {
    return [y_max, c_task, gamma](const StepContext& ctx) {
        return Vec(capacity_cap_allocation(ctx.X, y_max, c_task, gamma) - ctx.I_prev);
    };
}

namespace detail {

inline Vec sample_mvn(const Vec& mean, const Mat& chol_lower, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return mean + chol_lower * z;
}

}  // namespace detail

/// Simulates the configured population, discards the early burn-in portion
/// of every trajectory, and re-indexes the retained tail to years 0..horizon.
/// Subjects whose draw collapses during burn-in are resampled.
inline Cohort generate_cohort(const CohortConfig& cfg, const BrainGraph& graph) {
    cfg.validate();
    if (graph.size() != cfg.x0_mean.size())
        throw std::invalid_argument("generate_cohort: graph/config dimension mismatch");
    const Mat chol_lower = Eigen::LLT<Mat>(cfg.x0_cov).matrixL();
    SimConfig sim;
    sim.c_task = cfg.c_task;
    sim.horizon = cfg.burn_in_steps;
    const ActionSource policy = capacity_cap_policy(cfg.y_max, cfg.c_task, 1.0);
    const RewardFn reward = make_training_reward(1.0, sim);

    Cohort cohort;
    cohort.reserve(static_cast<size_t>(cfg.n_subjects));
    for (int i = 0; i < cfg.n_subjects; ++i) {
        SubjectRecord rec;
        rec.id = "s" + std::to_string(i);
        RolloutResult traj;
        ModelParams params;
        bool ok = false;
        for (int attempt = 0; attempt <= cfg.max_retries && !ok; ++attempt) {
            Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(attempt)});
            std::uniform_int_distribution<int> fa(0, cfg.feature_a_cardinality - 1);
            std::uniform_int_distribution<int> fb(0, cfg.feature_b_cardinality - 1);
            std::uniform_real_distribution<double> d0(cfg.d0_min, cfg.d0_max);
            std::uniform_real_distribution<double> age(60.0, 85.0);
            rec.demographics = Demographics{};
            rec.demographics.extra["feature_a"] = fa(rng);
            rec.demographics.extra["feature_b"] = fb(rng);
            rec.demographics.age_baseline = age(rng);
            params = cfg.param_map.eval(rec.demographics.extra["feature_a"],
                                        rec.demographics.extra["feature_b"],
                                        cfg.activity_exponent);
            Vec X0 = detail::sample_mvn(cfg.x0_mean, chol_lower, rng);
            if ((X0.array() <= 0.0).any()) continue;
            Vec D0(graph.size());
            for (Eigen::Index v = 0; v < D0.size(); ++v) D0[v] = d0(rng);
            const Vec I0 = capacity_cap_allocation(X0, cfg.y_max, cfg.c_task, 1.0);
            const SimState s0 = make_initial_state(X0, D0, Vec::Zero(graph.size()), I0, params);
            traj = rollout(s0, policy, graph, params, sim, reward);
            ok = !traj.truncated;
        }
        if (!ok)
            throw std::runtime_error("generate_cohort: subject " + rec.id +
                                     " kept collapsing during burn-in");
        const int first = cfg.burn_in_steps - cfg.horizon;
        rec.visits.clear();
        for (int t = first; t <= cfg.burn_in_steps; ++t) {
            const SimState& s = traj.states[static_cast<size_t>(t)];
            Visit v;
            v.year = t - first;
            v.X = s.X;
            v.phi = s.phi;
            v.D = s.D;
            v.Y = s.Y;
            v.C = s.C;
            v.x_ok = v.phi_ok = v.d_ok = v.y_ok = v.c_ok = true;
            rec.visits.push_back(std::move(v));
        }
        rec.validate();
        cohort.push_back(std::move(rec));
    }
    return cohort;
}

}  // namespace adprog
