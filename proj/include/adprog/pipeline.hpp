#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "adprog/analysis.hpp"
#include "adprog/baselines.hpp"
#include "adprog/csv.hpp"
#include "adprog/folds.hpp"
#include "adprog/masking.hpp"
#include "adprog/metrics.hpp"
#include "adprog/training.hpp"

namespace adprog {

struct PipelineConfig {
    SimConfig sim;
    TrainConfig train;
    DemographicKeySpec keying{{"feature_a", "feature_b"}};
    std::vector<double> lambda_grid = {1.0, 2.0};
    std::vector<Vec> i0_grid = {(Vec(2) << 9.0, 1.0).finished(), (Vec(2) << 7.0, 3.0).finished()};
    int folds = 5;
    int activity_exponent = 1;
    bool use_observed_rate = true;
    std::vector<std::string> methods = {"rl", "without_rl"};
    std::uint64_t seed = 0;
    int jobs = 1;

    static PipelineConfig desk_preset() {
        PipelineConfig c;
        c.train = TrainConfig::desk_preset();
        return c;
    }

    /// Full-scale setup: million-episode training and the complete
    /// hyperparameter grid.
    static PipelineConfig paper_preset() {
        PipelineConfig c;
        c.train = TrainConfig::paper_preset();
        c.lambda_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
        c.i0_grid.clear();
        for (double first : {10.0, 9.0, 8.0, 7.0, 6.0})
            c.i0_grid.push_back((Vec(2) << first, 10.0 - first).finished());
        return c;
    }
};

struct SubjectPrediction {
    PredictedTrajectory trajectory;
    Mat information;  // (horizon+1) x |V|, frozen-extended on truncation
    Mat activity;
    Mat sizes;
    bool truncated = false;
};

namespace detail {

/// Expands a rollout into fixed-length per-year curves, carrying the last
/// state forward where the trajectory was frozen by a region collapse.
inline SubjectPrediction expand_rollout(const RolloutResult& r, const std::string& id,
                                        int anchor_year, int horizon) {
    SubjectPrediction p;
    p.truncated = r.truncated;
    p.trajectory.subject_id = id;
    p.trajectory.anchor_year = anchor_year;
    const auto n = r.states.front().X.size();
    p.information.resize(horizon + 1, n);
    p.activity.resize(horizon + 1, n);
    p.sizes.resize(horizon + 1, n);
    for (int t = 0; t <= horizon; ++t) {
        const SimState& s = r.states[std::min(static_cast<size_t>(t), r.states.size() - 1)];
        p.trajectory.cognition.push_back(s.C);
        p.information.row(t) = s.I.transpose();
        p.activity.row(t) = s.Y.transpose();
        p.sizes.row(t) = s.X.transpose();
    }
    return p;
}

inline std::vector<SubjectInit> build_pool(const Cohort& subjects, const ParamTable& table,
                                           const BrainGraph& graph, const Vec& population_I0,
                                           const InitOptions& opts) {
    std::vector<SubjectInit> pool;
    pool.reserve(subjects.size());
    for (const auto& rec : subjects)
        pool.push_back(make_subject_init(rec, table, graph, population_I0, opts));
    return pool;
}

inline GaussianPolicy fresh_policy(const BrainGraph& graph, const TrainConfig& cfg,
                                   std::uint64_t seed) {
    GaussianPolicy policy(static_cast<int>(2 * graph.size()), static_cast<int>(graph.size()),
                          cfg.hidden, cfg.init_std, cfg.obs_scale);
    Rng rng = make_rng(seed, {0x9011cfULL});
    policy.init_weights(rng);
    return policy;
}

}  // namespace detail

/// Deterministic baseline-only prediction: initialize from the anchor
/// visit, fine-tune the allocation with the policy mean, then roll the
/// dynamics forward under mean actions.
inline SubjectPrediction predict_subject(const GaussianPolicy& policy, const SubjectRecord& rec,
                                         const ParamTable& table, const BrainGraph& graph,
                                         const SimConfig& sim, const Vec& population_I0,
                                         const InitOptions& opts, int anchor_year = 0) {
    SubjectInit init = make_subject_init(rec, table, graph, population_I0, opts, anchor_year);
    init.I0 = init_information(policy, init.X0, population_I0, sim);
    const SimState s0 = make_initial_state(init.X0, init.D1, init.phi0, init.I0, init.params);
    const ActionSource source = [&policy](const StepContext& ctx) {
        Vec obs(ctx.X.size() + ctx.I_prev.size());
        obs << ctx.X, ctx.I_prev;
        return policy.mean_single(obs);
    };
    const RolloutResult r = rollout(s0, source, graph, init.params, sim,
                                    make_training_reward(init.params.lambda, sim));
    return detail::expand_rollout(r, rec.id, anchor_year, sim.horizon);
}

/// Prediction under the per-step greedy optimizer instead of a policy.
inline SubjectPrediction predict_subject_without_rl(const SubjectRecord& rec,
                                                    const ParamTable& table,
                                                    const BrainGraph& graph, const SimConfig& sim,
                                                    const Vec& population_I0,
                                                    const InitOptions& opts,
                                                    int anchor_year = 0) {
    const SubjectInit init = make_subject_init(rec, table, graph, population_I0, opts, anchor_year);
    const SimState s0 = make_initial_state(init.X0, init.D1, init.phi0, init.I0, init.params);
    const RolloutResult r = rollout_without_rl(s0, graph, init.params, sim);
    return detail::expand_rollout(r, rec.id, anchor_year, sim.horizon);
}

struct GridCell {
    double lambda = 0.0;
    Vec population_I0;
    double val_mae = std::nan("");
};

struct GridSearchResult {
    double best_lambda = 0.0;
    Vec best_I0;
    GaussianPolicy best_policy;
    std::vector<GridCell> cells;
};

/// Trains one policy per (lambda, initial allocation) cell on the training
/// subjects, scores each on validation MAE, and keeps the argmin cell's
/// policy for downstream prediction. Deterministic tie-breaking: first cell
/// in grid order wins.
inline GridSearchResult grid_search_hyperparams(const Cohort& train, const Cohort& val,
                                                const ParamTable& table, const BrainGraph& graph,
                                                const PipelineConfig& cfg, std::uint64_t seed) {
    GridSearchResult result;
    double best_mae = std::numeric_limits<double>::infinity();
    int cell_index = 0;
    for (double lambda : cfg.lambda_grid) {
        for (const Vec& i0 : cfg.i0_grid) {
            const InitOptions opts{cfg.use_observed_rate, lambda};
            const auto pool = detail::build_pool(train, table, graph, i0, opts);
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(seed, {0x9d1dULL, static_cast<std::uint64_t>(cell_index)});
            tc.jobs = cfg.jobs;
            GaussianPolicy policy = detail::fresh_policy(graph, tc, tc.seed);
            PolicyCheckpoint ckpt = train_policy(std::move(policy), pool, graph, cfg.sim,
                                                 RewardKind::training, lambda, tc);
            std::vector<PredictedTrajectory> predictions;
            predictions.reserve(val.size());
            for (const auto& rec : val)
                predictions.push_back(
                    predict_subject(ckpt.policy, rec, table, graph, cfg.sim, i0, opts).trajectory);
            const ErrorStats err = cognition_error(predictions, val, cfg.sim.horizon);
            result.cells.push_back(GridCell{lambda, i0, err.mae});
            if (std::isfinite(err.mae) && err.mae < best_mae) {
                best_mae = err.mae;
                result.best_lambda = lambda;
                result.best_I0 = i0;
                result.best_policy = ckpt.policy;
            }
            ++cell_index;
        }
    }
    if (!std::isfinite(best_mae))
        throw std::runtime_error("grid_search_hyperparams: no cell produced a finite score");
    return result;
}

struct MethodFoldRow {
    std::string method;
    int fold = 0;
    double mae = std::nan("");
    double mse = std::nan("");
    long n_visits = 0;
};

struct GridRow {
    int fold = 0;
    double lambda = 0.0;
    std::string i0;
    double val_mae = std::nan("");
};

struct MethodSummary {
    double mae_mean = std::nan("");
    double mae_std_across_folds = std::nan("");
    double mae_std_across_subjects = std::nan("");
    double mse_mean = std::nan("");
    double mse_std_across_folds = std::nan("");
};

struct EvalReport {
    std::vector<MethodFoldRow> rows;
    std::map<std::string, MethodSummary> summary;  // by method
    std::vector<GridRow> grid;
    std::vector<double> chosen_lambda;  // per fold
    std::vector<std::string> chosen_i0;
    std::map<std::string, std::vector<SubjectPrediction>> test_predictions;  // by method
    RecoveryReport recovery;
    ConsistencyResult consistency;
};

namespace detail {

inline Cohort select_subjects(const Cohort& cohort, const std::vector<std::string>& ids) {
    std::map<std::string, const SubjectRecord*> by_id;
    for (const auto& rec : cohort) by_id[rec.id] = &rec;
    Cohort out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw std::runtime_error("select_subjects: unknown id " + id);
        out.push_back(*it->second);
    }
    return out;
}

inline std::string i0_string(const Vec& i0) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < i0.size(); ++i)
        s += (i ? " " : "") + fmt_fixed(i0[i], 1);
    return s + "]";
}

}  // namespace detail

/// Cross-validated evaluation harness: per fold, estimate the parameter
/// table on train, grid-search hyperparameters on validation, reuse the
/// winning policy for test prediction, and score each requested method on
/// the same test subjects.
inline EvalReport run_cv(const Cohort& cohort, const BrainGraph& graph, const PipelineConfig& cfg) {
    std::vector<std::string> ids;
    ids.reserve(cohort.size());
    for (const auto& rec : cohort) ids.push_back(rec.id);
    const FoldPlan plan = make_fold_plan(ids, cfg.folds, cfg.seed);

    const bool want_rl =
        std::find(cfg.methods.begin(), cfg.methods.end(), "rl") != cfg.methods.end();
    const bool want_greedy =
        std::find(cfg.methods.begin(), cfg.methods.end(), "without_rl") != cfg.methods.end();

    EvalReport report;
    std::map<std::string, std::vector<double>> fold_mae, fold_mse;
    std::map<std::string, std::vector<double>> subject_abs;
    std::vector<Mat> info_curves, activity_curves;
    std::vector<double> consistency_means;

    for (int f = 0; f < cfg.folds; ++f) {
        const Fold& fold = plan.folds[static_cast<size_t>(f)];
        const Cohort train = detail::select_subjects(cohort, fold.train);
        const Cohort val = detail::select_subjects(cohort, fold.val);
        const Cohort test = detail::select_subjects(cohort, fold.test);
        const ParamTable table = fit_param_table(train, cfg.keying, graph, cfg.activity_exponent,
                                                 "fold:" + std::to_string(f));

        double lambda = cfg.lambda_grid.front();
        Vec population_I0 = cfg.i0_grid.front();
        GaussianPolicy policy;
        if (want_rl) {
            const GridSearchResult grid = grid_search_hyperparams(
                train, val, table, graph, cfg, derive_seed(cfg.seed, {static_cast<std::uint64_t>(f)}));
            lambda = grid.best_lambda;
            population_I0 = grid.best_I0;
            policy = grid.best_policy;
            for (const auto& cell : grid.cells)
                report.grid.push_back(
                    GridRow{f, cell.lambda, detail::i0_string(cell.population_I0), cell.val_mae});
        }
        report.chosen_lambda.push_back(lambda);
        report.chosen_i0.push_back(detail::i0_string(population_I0));
        const InitOptions opts{cfg.use_observed_rate, lambda};

        if (want_rl) {
            std::vector<PredictedTrajectory> predictions;
            for (const auto& rec : test) {
                SubjectPrediction p =
                    predict_subject(policy, rec, table, graph, cfg.sim, population_I0, opts);
                predictions.push_back(p.trajectory);
                info_curves.push_back(p.information);
                activity_curves.push_back(p.activity);
                report.test_predictions["rl"].push_back(std::move(p));
            }
            const ErrorStats err = cognition_error(predictions, test, cfg.sim.horizon);
            report.rows.push_back(MethodFoldRow{"rl", f, err.mae, err.mse, err.n_visits});
            fold_mae["rl"].push_back(err.mae);
            fold_mse["rl"].push_back(err.mse);
            for (double e : err.abs_errors_per_subject) subject_abs["rl"].push_back(e);

            // Year-2-anchored consistency on test subjects with usable data.
            std::vector<PredictedTrajectory> anchored_0, anchored_2;
            for (const auto& rec : test) {
                const Visit* v2 = rec.visit_at(2);
                if (v2 == nullptr || !v2->x_ok || !v2->phi_ok) continue;
                anchored_0.push_back(
                    predict_subject(policy, rec, table, graph, cfg.sim, population_I0, opts, 0)
                        .trajectory);
                anchored_2.push_back(
                    predict_subject(policy, rec, table, graph, cfg.sim, population_I0, opts, 2)
                        .trajectory);
            }
            const ConsistencyResult consistency = trajectory_consistency(anchored_0, anchored_2);
            if (consistency.n_subjects > 0) {
                consistency_means.push_back(consistency.mean_correlation);
                report.consistency.n_subjects += consistency.n_subjects;
                report.consistency.n_excluded += consistency.n_excluded;
            }
        }

        if (want_greedy) {
            std::vector<PredictedTrajectory> predictions;
            for (const auto& rec : test) {
                SubjectPrediction p = predict_subject_without_rl(rec, table, graph, cfg.sim,
                                                                 population_I0, opts);
                predictions.push_back(p.trajectory);
                report.test_predictions["without_rl"].push_back(std::move(p));
            }
            const ErrorStats err = cognition_error(predictions, test, cfg.sim.horizon);
            report.rows.push_back(MethodFoldRow{"without_rl", f, err.mae, err.mse, err.n_visits});
            fold_mae["without_rl"].push_back(err.mae);
            fold_mse["without_rl"].push_back(err.mse);
            for (double e : err.abs_errors_per_subject) subject_abs["without_rl"].push_back(e);
        }
    }

    for (const auto& [method, maes] : fold_mae) {
        MethodSummary s;
        s.mae_mean = mean_of(maes);
        s.mae_std_across_folds = stddev_of(maes);
        s.mae_std_across_subjects = stddev_of(subject_abs[method]);
        s.mse_mean = mean_of(fold_mse[method]);
        s.mse_std_across_folds = stddev_of(fold_mse[method]);
        report.summary[method] = s;
    }
    if (!info_curves.empty()) report.recovery = recovery_analysis(info_curves, activity_curves);
    report.consistency.mean_correlation = mean_of(consistency_means);
    return report;
}

// --- report writers ---------------------------------------------------

inline void write_metrics_csv(const EvalReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows)
        rows.push_back({r.method, std::to_string(r.fold), fmt_double(r.mae), fmt_double(r.mse),
                        std::to_string(r.n_visits)});
    for (const auto& [method, s] : report.summary) {
        rows.push_back({method + "/mean", "-", fmt_double(s.mae_mean), fmt_double(s.mse_mean), "-"});
        rows.push_back({method + "/std_folds", "-", fmt_double(s.mae_std_across_folds),
                        fmt_double(s.mse_std_across_folds), "-"});
        rows.push_back(
            {method + "/std_subjects", "-", fmt_double(s.mae_std_across_subjects), "-", "-"});
    }
    write_csv(path, {"method", "fold", "mae", "mse", "n_visits"}, rows);
}

inline void write_grid_csv(const EvalReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : report.grid)
        rows.push_back({std::to_string(g.fold), fmt_double(g.lambda), g.i0, fmt_double(g.val_mae)});
    write_csv(path, {"fold", "lambda", "i0", "val_mae"}, rows);
}

inline void write_trajectories_csv(const std::vector<SubjectPrediction>& predictions,
                                   const Cohort& cohort, const std::string& path) {
    std::map<std::string, const SubjectRecord*> by_id;
    for (const auto& rec : cohort) by_id[rec.id] = &rec;
    Eigen::Index n_regions = 0;
    for (const auto& p : predictions) n_regions = std::max(n_regions, p.information.cols());
    std::vector<std::string> header = {"subject", "t", "C_pred", "C_true"};
    for (const char* g : {"I", "Y", "X"})
        for (Eigen::Index v = 1; v <= n_regions; ++v)
            header.push_back(std::string(g) + "_" + std::to_string(v));
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : predictions) {
        const SubjectRecord* rec =
            by_id.count(p.trajectory.subject_id) ? by_id[p.trajectory.subject_id] : nullptr;
        for (int t = 0; t < static_cast<int>(p.trajectory.cognition.size()); ++t) {
            std::vector<std::string> row = {p.trajectory.subject_id,
                                            std::to_string(p.trajectory.anchor_year + t),
                                            fmt_double(p.trajectory.cognition[static_cast<size_t>(t)])};
            std::string c_true;
            if (rec != nullptr) {
                const Visit* v = rec->visit_at(p.trajectory.anchor_year + t);
                if (v != nullptr && v->c_ok) c_true = fmt_double(v->C);
            }
            row.push_back(c_true);
            for (Eigen::Index v = 0; v < n_regions; ++v)
                row.push_back(fmt_double(p.information(t, v)));
            for (Eigen::Index v = 0; v < n_regions; ++v) row.push_back(fmt_double(p.activity(t, v)));
            for (Eigen::Index v = 0; v < n_regions; ++v) row.push_back(fmt_double(p.sizes(t, v)));
            rows.push_back(std::move(row));
        }
    }
    write_csv(path, header, rows);
}

inline void write_flags_json(const EvalReport& report, const std::string& path) {
    nlohmann::json j;
    j["recovery"] = {{"compensation", report.recovery.compensation},
                     {"late_decline", report.recovery.late_decline},
                     {"hypermetabolism", report.recovery.hypermetabolism}};
    j["consistency"] = {{"mean_correlation", report.consistency.mean_correlation},
                        {"n_subjects", report.consistency.n_subjects},
                        {"n_excluded", report.consistency.n_excluded}};
    j["chosen_lambda"] = report.chosen_lambda;
    j["chosen_i0"] = report.chosen_i0;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [method, s] : report.summary)
        summary[method] = {{"mae_mean", s.mae_mean},
                           {"mae_std_across_folds", s.mae_std_across_folds},
                           {"mae_std_across_subjects", s.mae_std_across_subjects},
                           {"mse_mean", s.mse_mean},
                           {"mse_std_across_folds", s.mse_std_across_folds}};
    j["summary"] = summary;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_flags_json: cannot write " + path);
    out << j.dump(2) << "\n";
}

inline void write_eval_report(const EvalReport& report, const Cohort& cohort,
                              const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_metrics_csv(report, out_dir + "/metrics.csv");
    write_grid_csv(report, out_dir + "/grid.csv");
    auto rl = report.test_predictions.find("rl");
    if (rl != report.test_predictions.end())
        write_trajectories_csv(rl->second, cohort, out_dir + "/trajectories.csv");
    auto greedy = report.test_predictions.find("without_rl");
    if (greedy != report.test_predictions.end())
        write_trajectories_csv(greedy->second, cohort, out_dir + "/trajectories_without_rl.csv");
    write_flags_json(report, out_dir + "/flags.json");
}

}  // namespace adprog
