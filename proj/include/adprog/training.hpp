#pragma once

#include <algorithm>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "adprog/cohort.hpp"
#include "adprog/gae.hpp"
#include "adprog/param_table.hpp"
#include "adprog/policy.hpp"
#include "adprog/rollout.hpp"
#include "adprog/trpo.hpp"
#include "adprog/value_baseline.hpp"

namespace adprog {

enum class RewardKind { training, mismatch_only, cost_only };

struct TrainConfig {
    long episodes_total = 1'000'000;
    int batch_trajectories = 1000;
    double kl_limit = 0.01;
    double gae_lambda = 0.97;
    double return_discount = 1.0;
    int cg_iterations = 10;
    double cg_damping = 0.1;
    int line_search_backtracks = 10;
    std::string baseline = "mlp";  // or "linear"
    double init_std = 1.0;
    double obs_scale = 0.2;
    std::vector<int> hidden = {32, 32};
    std::uint64_t seed = 0;
    int jobs = 1;

    int epochs() const {
        return std::max(1, static_cast<int>(episodes_total / batch_trajectories));
    }

    static TrainConfig desk_preset() {
        TrainConfig c;
        c.episodes_total = 10'000;
        c.batch_trajectories = 250;
        return c;
    }
    static TrainConfig paper_preset() { return TrainConfig{}; }
};

/// What a sampled subject contributes to an episode: baseline sizes, the
/// baseline instantaneous amyloid rate, an initial allocation, and the
/// subject's dynamics constants.
struct SubjectInit {
    std::string subject_id;
    Vec X0;
    Vec D1;
    Vec phi0;
    Vec I0;
    ModelParams params;
};

struct InitOptions {
    bool use_observed_rate = true;  // take the recorded baseline D when present
    double lambda = 1.0;            // reward trade-off applied during rollouts
};

/// Builds an episode initializer from a record. The amyloid rate comes from
/// the record when it carries one (generated data), otherwise it is
/// recovered from accumulated amyloid via the diffusion spectrum.
inline SubjectInit make_subject_init(const SubjectRecord& rec, const ParamTable& table,
                                     const BrainGraph& graph, const Vec& population_I0,
                                     const InitOptions& opts = {}, int anchor_year = 0) {
    const Visit* base = rec.visit_at(anchor_year);
    if (base == nullptr || !base->x_ok || !base->phi_ok)
        throw std::invalid_argument("make_subject_init: subject " + rec.id +
                                    " lacks usable data at year " + std::to_string(anchor_year));
    SubjectInit init;
    init.subject_id = rec.id;
    init.params = table.lookup(rec.demographics).params;
    init.params.lambda = opts.lambda;
    init.X0 = base->X;
    init.phi0 = base->phi;
    if (opts.use_observed_rate && base->d_ok) {
        init.D1 = base->D;
    } else {
        init.D1 = init_amyloid_rate(base->phi, graph, init.params.beta,
                                    rec.demographics.age_baseline + anchor_year);
    }
    init.I0 = population_I0;
    return init;
}

inline RewardFn make_reward(RewardKind kind, double lambda, const SimConfig& cfg);

struct Trajectory {
    int subject_index = 0;
    Mat obs;      // L x 2|V|
    Mat actions;  // L x |V| (pre-clip)
    Mat means;    // L x |V|
    Vec logp;     // L
    Vec rewards;  // L
    bool truncated = false;
};

/// Samples one stochastic episode; every step records what the update
/// needs. The per-trajectory RNG both picks the subject and drives the
/// action noise, so batches are reproducible independent of thread count.
inline Trajectory sample_trajectory(const GaussianPolicy& policy,
                                    const std::vector<SubjectInit>& pool, const BrainGraph& graph,
                                    const SimConfig& sim, const RewardFn& reward, Rng& rng) {
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    const size_t j = pick(rng);
    const SubjectInit& init = pool[j];

    Trajectory traj;
    traj.subject_index = static_cast<int>(j);
    const int horizon = sim.horizon;
    const auto obs_dim = static_cast<Eigen::Index>(2 * graph.size());
    traj.obs.resize(horizon, obs_dim);
    traj.actions.resize(horizon, graph.size());
    traj.means.resize(horizon, graph.size());
    traj.logp.resize(horizon);

    int steps = 0;
    const ActionSource source = [&](const StepContext& ctx) {
        Vec obs(obs_dim);
        obs << ctx.X, ctx.I_prev;
        const GaussianPolicy::Sample s = policy.sample(obs, rng);
        traj.obs.row(steps) = obs.transpose();
        traj.actions.row(steps) = s.action.transpose();
        traj.means.row(steps) = s.mean.transpose();
        traj.logp[steps] = s.log_prob;
        ++steps;
        return s.action;
    };

    const SimState s0 = make_initial_state(init.X0, init.D1, init.phi0, init.I0, init.params);
    const RolloutResult rollout_result = rollout(s0, source, graph, init.params, sim, reward);
    traj.truncated = rollout_result.truncated;
    const int len = rollout_result.steps();
    traj.obs.conservativeResize(len, Eigen::NoChange);
    traj.actions.conservativeResize(len, Eigen::NoChange);
    traj.means.conservativeResize(len, Eigen::NoChange);
    traj.logp.conservativeResize(len);
    traj.rewards = Eigen::Map<const Vec>(rollout_result.rewards.data(), len);
    return traj;
}

/// Collects n trajectories into preassigned slots; identical output for any
/// job count because each slot owns its derived RNG stream.
inline std::vector<Trajectory> collect_batch(const GaussianPolicy& policy,
                                             const std::vector<SubjectInit>& pool,
                                             const BrainGraph& graph, const SimConfig& sim,
                                             const RewardFn& reward, int n_trajectories,
                                             std::uint64_t seed, std::uint64_t epoch,
                                             int jobs = 1) {
    if (pool.empty()) throw std::invalid_argument("collect_batch: empty subject pool");
    std::vector<Trajectory> batch(static_cast<size_t>(n_trajectories));
    const auto worker = [&](int tid, int stride) {
        for (int k = tid; k < n_trajectories; k += stride) {
            Rng rng = make_rng(seed, {0x7261'6a00ULL, epoch, static_cast<std::uint64_t>(k)});
            batch[static_cast<size_t>(k)] =
                sample_trajectory(policy, pool, graph, sim, reward, rng);
        }
    };
    if (jobs <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker, t, jobs);
        for (auto& t : threads) t.join();
    }
    return batch;
}

struct EpochStats {
    int epoch = 0;
    double mean_reward = 0.0;  // mean trajectory return
    double mean_kl = 0.0;
    double surrogate_delta = 0.0;
    bool accepted = false;
};

struct PolicyCheckpoint {
    GaussianPolicy policy;
    nlohmann::json config_snapshot;
    std::vector<EpochStats> curve;
};

namespace detail {

inline Mat value_features(const Mat& obs, int first_step, int horizon) {
    Mat f(obs.rows(), obs.cols() + 1);
    f.leftCols(obs.cols()) = obs;
    for (Eigen::Index k = 0; k < obs.rows(); ++k)
        f(k, obs.cols()) = static_cast<double>(first_step + static_cast<int>(k)) /
                           static_cast<double>(horizon);
    return f;
}

}  // namespace detail

/// On-policy training loop: collect, estimate advantages, take one
/// KL-constrained step, refit the value baseline. Aborts on non-finite
/// parameters.
inline PolicyCheckpoint train_policy(GaussianPolicy policy, const std::vector<SubjectInit>& pool,
                                     const BrainGraph& graph, const SimConfig& sim,
                                     RewardKind reward_kind, double lambda,
                                     const TrainConfig& cfg,
                                     std::ostream* progress = nullptr) {
    const RewardFn reward = make_reward(reward_kind, lambda, sim);
    const int obs_dim = static_cast<int>(2 * graph.size());
    auto baseline = make_value_baseline(cfg.baseline, obs_dim + 1, cfg.seed);
    TrpoConfig trpo;
    trpo.kl_limit = cfg.kl_limit;
    trpo.cg_iterations = cfg.cg_iterations;
    trpo.cg_damping = cfg.cg_damping;
    trpo.line_search_backtracks = cfg.line_search_backtracks;

    PolicyCheckpoint out;
    const int n_epochs = cfg.epochs();
    for (int epoch = 0; epoch < n_epochs; ++epoch) {
        const auto batch = collect_batch(policy, pool, graph, sim, reward, cfg.batch_trajectories,
                                         cfg.seed, static_cast<std::uint64_t>(epoch), cfg.jobs);
        Eigen::Index total = 0;
        double return_sum = 0.0;
        for (const auto& t : batch) {
            total += t.rewards.size();
            return_sum += t.rewards.sum();
        }
        Mat obs(total, obs_dim), actions(total, graph.size()), means(total, graph.size());
        Mat features(total, obs_dim + 1);
        Vec logp(total), advantages(total), targets(total);
        Eigen::Index cursor = 0;
        for (const auto& t : batch) {
            const Eigen::Index len = t.rewards.size();
            if (len == 0) continue;
            const Mat feats = detail::value_features(t.obs, 1, sim.horizon);
            const Vec values = baseline->predict(feats);
            const GaeResult gae =
                compute_gae(t.rewards, values, 0.0, cfg.return_discount, cfg.gae_lambda);
            obs.middleRows(cursor, len) = t.obs;
            actions.middleRows(cursor, len) = t.actions;
            means.middleRows(cursor, len) = t.means;
            features.middleRows(cursor, len) = feats;
            logp.segment(cursor, len) = t.logp;
            advantages.segment(cursor, len) = gae.advantages;
            targets.segment(cursor, len) = gae.value_targets;
            cursor += len;
        }

        PolicyBatch pb;
        pb.obs = obs.topRows(cursor);
        pb.actions = actions.topRows(cursor);
        pb.mean_old = means.topRows(cursor);
        pb.logp_old = logp.head(cursor);
        pb.log_std_old = policy.log_std();
        pb.advantages = normalize_advantages(advantages.head(cursor));

        const TrpoDiagnostics diag = trpo_update(policy, pb, trpo);
        if (!policy.flat_params().allFinite())
            throw std::runtime_error("train_policy: non-finite policy parameters at epoch " +
                                     std::to_string(epoch));
        baseline->fit(features.topRows(cursor), targets.head(cursor));

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_reward = return_sum / static_cast<double>(batch.size());
        stats.mean_kl = diag.mean_kl;
        stats.surrogate_delta = diag.surrogate_delta;
        stats.accepted = diag.accepted;
        out.curve.push_back(stats);
        if (progress)
            (*progress) << "epoch " << epoch << " mean_reward " << stats.mean_reward << " kl "
                        << stats.mean_kl << (diag.accepted ? "" : " (no-op)") << "\n";
    }
    out.policy = policy;
    return out;
}

inline RewardFn make_reward(RewardKind kind, double lambda, const SimConfig& cfg) {
    switch (kind) {
        case RewardKind::training:
            return make_training_reward(lambda, cfg);
        case RewardKind::mismatch_only:
            return [c = cfg.c_task, lo = cfg.reward_floor, hi = cfg.reward_ceiling](double C,
                                                                                    double M) {
                (void)M;
                const double overshoot = std::max(C - c, 0.0);
                return std::clamp(-(std::abs(c - C) * std::pow(100.0, overshoot)), lo, hi);
            };
        case RewardKind::cost_only:
            return [lo = cfg.reward_floor, hi = cfg.reward_ceiling](double C, double M) {
                (void)C;
                return std::clamp(-M, lo, hi);
            };
    }
    throw std::logic_error("make_reward: unknown kind");
}

/// Two-step allocation initialization: the deterministic policy mean at the
/// pseudo-state (baseline sizes, population allocation), clipped and
/// floored exactly like an environment step.
inline Vec init_information(const GaussianPolicy& policy, const Vec& X0, const Vec& population_I0,
                            const SimConfig& sim) {
    Vec obs(X0.size() + population_I0.size());
    obs << X0, population_I0;
    const Vec delta =
        policy.mean_single(obs).cwiseMax(-sim.action_clip).cwiseMin(sim.action_clip);
    return (population_I0 + delta).cwiseMax(0.0);
}

inline nlohmann::json checkpoint_to_json(const PolicyCheckpoint& ckpt) {
    nlohmann::json j;
    j["format"] = "adprog-policy-checkpoint";
    j["version"] = 1;
    j["policy"] = policy_to_json(ckpt.policy);
    j["config"] = ckpt.config_snapshot;
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& s : ckpt.curve)
        curve.push_back({{"epoch", s.epoch},
                         {"mean_reward", s.mean_reward},
                         {"mean_kl", s.mean_kl},
                         {"surrogate_delta", s.surrogate_delta},
                         {"accepted", s.accepted}});
    j["curve"] = curve;
    return j;
}

inline PolicyCheckpoint checkpoint_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "adprog-policy-checkpoint")
        throw std::runtime_error("checkpoint_from_json: unrecognized format");
    PolicyCheckpoint ckpt;
    ckpt.policy = policy_from_json(j.at("policy"));
    ckpt.config_snapshot = j.value("config", nlohmann::json::object());
    for (const auto& s : j.value("curve", nlohmann::json::array())) {
        EpochStats st;
        st.epoch = s.value("epoch", 0);
        st.mean_reward = s.value("mean_reward", 0.0);
        st.mean_kl = s.value("mean_kl", 0.0);
        st.surrogate_delta = s.value("surrogate_delta", 0.0);
        st.accepted = s.value("accepted", false);
        ckpt.curve.push_back(st);
    }
    return ckpt;
}

inline void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
    out << checkpoint_to_json(ckpt).dump(2) << "\n";
}

inline PolicyCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return checkpoint_from_json(j);
}

}  // namespace adprog
