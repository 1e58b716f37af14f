// Command-line front end: generate / estimate / train / predict / evaluate /
// plot, glued together by a JSON config and a single --seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adprog/pipeline.hpp"
#include "adprog/plotting.hpp"
#include "adprog/tabular.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    in >> j;
    return j;
}

adprog::BrainGraph graph_from_config(const json& cfg) {
    if (cfg.contains("graph")) {
        const auto& g = cfg.at("graph");
        const auto names = g.at("names").get<std::vector<std::string>>();
        const auto adj = g.at("adjacency").get<std::vector<std::vector<double>>>();
        adprog::Mat m(adj.size(), adj.size());
        for (size_t i = 0; i < adj.size(); ++i)
            for (size_t j = 0; j < adj[i].size(); ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = adj[i][j];
        return adprog::build_graph(names, m);
    }
    return adprog::make_two_region_graph();
}

adprog::CohortConfig cohort_config_from(const json& cfg, std::uint64_t seed) {
    adprog::CohortConfig c;
    c.seed = seed;
    if (!cfg.contains("cohort")) return c;
    const auto& j = cfg.at("cohort");
    c.n_subjects = j.value("n_subjects", c.n_subjects);
    c.y_max = j.value("y_max", c.y_max);
    c.c_task = j.value("c_task", c.c_task);
    c.d0_min = j.value("d0_min", c.d0_min);
    c.d0_max = j.value("d0_max", c.d0_max);
    c.burn_in_steps = j.value("burn_in_steps", c.burn_in_steps);
    c.horizon = j.value("horizon", c.horizon);
    c.activity_exponent = j.value("activity_exponent", c.activity_exponent);
    c.feature_a_cardinality = j.value("feature_a_cardinality", c.feature_a_cardinality);
    c.feature_b_cardinality = j.value("feature_b_cardinality", c.feature_b_cardinality);
    if (j.contains("x0_mean")) {
        const auto m = j.at("x0_mean").get<std::vector<double>>();
        c.x0_mean = Eigen::Map<const adprog::Vec>(m.data(), static_cast<Eigen::Index>(m.size()));
    }
    if (j.contains("x0_cov")) {
        const auto m = j.at("x0_cov").get<std::vector<std::vector<double>>>();
        c.x0_cov.resize(m.size(), m.size());
        for (size_t a = 0; a < m.size(); ++a)
            for (size_t b = 0; b < m[a].size(); ++b)
                c.x0_cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m[a][b];
    }
    if (j.contains("param_map")) {
        const auto& p = j.at("param_map");
        auto& pm = c.param_map;
        pm.alpha1_base = p.value("alpha1_base", pm.alpha1_base);
        pm.alpha1_f1 = p.value("alpha1_f1", pm.alpha1_f1);
        pm.alpha1_f2 = p.value("alpha1_f2", pm.alpha1_f2);
        pm.alpha2_base = p.value("alpha2_base", pm.alpha2_base);
        pm.alpha2_f1 = p.value("alpha2_f1", pm.alpha2_f1);
        pm.alpha2_f2 = p.value("alpha2_f2", pm.alpha2_f2);
        pm.beta_base = p.value("beta_base", pm.beta_base);
        pm.beta_f1 = p.value("beta_f1", pm.beta_f1);
        pm.beta_f2 = p.value("beta_f2", pm.beta_f2);
    }
    return c;
}

adprog::SimConfig sim_config_from(const json& cfg) {
    adprog::SimConfig s;
    if (!cfg.contains("sim")) return s;
    const auto& j = cfg.at("sim");
    s.c_task = j.value("c_task", s.c_task);
    s.horizon = j.value("horizon", s.horizon);
    s.dt = j.value("dt", s.dt);
    s.action_clip = j.value("action_clip", s.action_clip);
    s.reward_floor = j.value("reward_floor", s.reward_floor);
    s.reward_ceiling = j.value("reward_ceiling", s.reward_ceiling);
    s.validate();
    return s;
}

void apply_train_config(const json& cfg, adprog::TrainConfig& t) {
    if (!cfg.contains("train")) return;
    const auto& j = cfg.at("train");
    t.episodes_total = j.value("episodes_total", t.episodes_total);
    t.batch_trajectories = j.value("batch_trajectories", t.batch_trajectories);
    t.kl_limit = j.value("kl_limit", t.kl_limit);
    t.gae_lambda = j.value("gae_lambda", t.gae_lambda);
    t.return_discount = j.value("return_discount", t.return_discount);
    t.cg_iterations = j.value("cg_iterations", t.cg_iterations);
    t.cg_damping = j.value("cg_damping", t.cg_damping);
    t.line_search_backtracks = j.value("line_search_backtracks", t.line_search_backtracks);
    t.baseline = j.value("baseline", t.baseline);
    t.init_std = j.value("init_std", t.init_std);
    t.obs_scale = j.value("obs_scale", t.obs_scale);
    if (j.contains("hidden")) t.hidden = j.at("hidden").get<std::vector<int>>();
}

adprog::PipelineConfig pipeline_config_from(const json& cfg, const std::string& preset,
                                            std::uint64_t seed, int jobs) {
    adprog::PipelineConfig p = preset == "paper" ? adprog::PipelineConfig::paper_preset()
                                                 : adprog::PipelineConfig::desk_preset();
    p.sim = sim_config_from(cfg);
    apply_train_config(cfg, p.train);
    p.seed = seed;
    p.jobs = jobs;
    if (cfg.contains("pipeline")) {
        const auto& j = cfg.at("pipeline");
        p.folds = j.value("folds", p.folds);
        p.activity_exponent = j.value("activity_exponent", p.activity_exponent);
        p.use_observed_rate = j.value("use_observed_rate", p.use_observed_rate);
        if (j.contains("methods")) p.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("keying"))
            p.keying.features = j.at("keying").get<std::vector<std::string>>();
        if (j.contains("lambda_grid"))
            p.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
        if (j.contains("i0_grid")) {
            p.i0_grid.clear();
            for (const auto& row : j.at("i0_grid")) {
                const auto v = row.get<std::vector<double>>();
                p.i0_grid.push_back(
                    Eigen::Map<const adprog::Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
            }
        }
    }
    return p;
}

adprog::MaskSchedule mask_schedule_from(const json& cfg) {
    adprog::MaskSchedule s = adprog::default_mask_schedule();
    if (cfg.contains("mask")) {
        const auto& j = cfg.at("mask");
        if (j.contains("imaging")) s.imaging = j.at("imaging").get<std::vector<double>>();
        if (j.contains("cognition")) s.cognition = j.at("cognition").get<std::vector<double>>();
    }
    return s;
}

adprog::Cohort load_cohort(const std::string& dir) {
    const auto report = adprog::ingest_tabular(dir + "/cohort.csv", dir + "/demographics.csv");
    for (const auto& [id, reason] : report.rejected)
        std::cerr << "rejected subject " << id << ": " << reason << "\n";
    if (report.records.empty()) throw std::runtime_error("no usable subjects in " + dir);
    return report.records;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

adprog::Vec parse_i0(const std::string& text) {
    std::vector<double> vals;
    for (const auto& item : split_list(text)) vals.push_back(std::stod(item));
    return Eigen::Map<const adprog::Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void save_param_table(const adprog::ParamTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << adprog::param_table_to_json(table).dump(2) << "\n";
}

adprog::ParamTable load_param_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open param table " + path);
    json j;
    in >> j;
    return adprog::param_table_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled difference-equation disease progression model with an RL allocation agent"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string preset = "desk";
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "master seed; all randomness derives from it");
    app.add_option("--jobs", jobs, "worker threads for batch collection");
    app.add_option("--preset", preset, "desk or paper scale")
        ->check(CLI::IsMember({"desk", "paper"}));

    auto* gen = app.add_subcommand("generate", "generate a synthetic cohort");
    std::string gen_out;
    bool gen_mask = false;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_flag("--mask", gen_mask, "apply the missing-visit schedule");

    auto* est = app.add_subcommand("estimate", "fit the demographic parameter table");
    std::string est_cohort, est_out, est_keys = "feature_a,feature_b";
    int est_exponent = 1;
    est->add_option("--cohort", est_cohort, "cohort directory")->required();
    est->add_option("--out", est_out, "output parameter table (json)")->required();
    est->add_option("--keys", est_keys, "comma-separated demographic key features");
    est->add_option("--exponent", est_exponent, "activity exponent (1 or 2)");

    auto* trn = app.add_subcommand("train", "train the allocation policy");
    std::string trn_cohort, trn_params, trn_out, trn_curve, trn_reward = "training",
                                                            trn_i0 = "9,1";
    double trn_lambda = 2.0;
    trn->add_option("--cohort", trn_cohort)->required();
    trn->add_option("--params", trn_params, "parameter table json")->required();
    trn->add_option("--out", trn_out, "checkpoint path")->required();
    trn->add_option("--curve", trn_curve, "training-curve csv path");
    trn->add_option("--lambda", trn_lambda, "reward trade-off weight");
    trn->add_option("--i0", trn_i0, "population initial allocation, comma separated");
    trn->add_option("--reward", trn_reward, "training | mismatch_only | cost_only")
        ->check(CLI::IsMember({"training", "mismatch_only", "cost_only"}));

    auto* prd = app.add_subcommand("predict", "predict trajectories from baseline visits");
    std::string prd_cohort, prd_params, prd_ckpt, prd_out, prd_i0 = "9,1";
    int prd_anchor = 0;
    prd->add_option("--cohort", prd_cohort)->required();
    prd->add_option("--params", prd_params)->required();
    prd->add_option("--checkpoint", prd_ckpt)->required();
    prd->add_option("--out", prd_out, "trajectories csv")->required();
    prd->add_option("--i0", prd_i0, "population initial allocation");
    prd->add_option("--anchor", prd_anchor, "anchor year");

    auto* evl = app.add_subcommand("evaluate", "cross-validated method comparison");
    std::string evl_cohort, evl_out, evl_methods = "rl,without_rl";
    evl->add_option("--cohort", evl_cohort)->required();
    evl->add_option("--out", evl_out, "report directory")->required();
    evl->add_option("--methods", evl_methods, "comma-separated: rl,without_rl");

    auto* plt = app.add_subcommand("plot", "render mean-trajectory charts");
    std::string plt_traj, plt_out;
    plt->add_option("--trajectories", plt_traj)->required();
    plt->add_option("--out", plt_out, "output directory for svg files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);
        const adprog::BrainGraph graph = graph_from_config(cfg);

        if (gen->parsed()) {
            adprog::CohortConfig cc = cohort_config_from(cfg, seed);
            adprog::Cohort cohort = adprog::generate_cohort(cc, graph);
            if (gen_mask)
                cohort = adprog::apply_missing_mask(std::move(cohort), mask_schedule_from(cfg),
                                                    adprog::derive_seed(seed, {0x3a5cULL}));
            fs::create_directories(gen_out);
            adprog::write_cohort(cohort, gen_out + "/cohort.csv", gen_out + "/demographics.csv");
            std::cout << "wrote " << cohort.size() << " subjects to " << gen_out << "\n";
        } else if (est->parsed()) {
            const adprog::Cohort cohort = load_cohort(est_cohort);
            adprog::DemographicKeySpec keys;
            keys.features = split_list(est_keys);
            const adprog::ParamTable table =
                adprog::fit_param_table(cohort, keys, graph, est_exponent);
            save_param_table(table, est_out);
            std::cout << "estimated " << table.entries.size() << " groups -> " << est_out << "\n";
        } else if (trn->parsed()) {
            const adprog::Cohort cohort = load_cohort(trn_cohort);
            const adprog::ParamTable table = load_param_table(trn_params);
            const adprog::SimConfig sim = sim_config_from(cfg);
            adprog::TrainConfig tc = preset == "paper" ? adprog::TrainConfig::paper_preset()
                                                       : adprog::TrainConfig::desk_preset();
            apply_train_config(cfg, tc);
            tc.seed = seed;
            tc.jobs = jobs;
            const adprog::Vec i0 = parse_i0(trn_i0);
            const adprog::InitOptions opts{true, trn_lambda};
            std::vector<adprog::SubjectInit> pool;
            for (const auto& rec : cohort)
                pool.push_back(adprog::make_subject_init(rec, table, graph, i0, opts));
            adprog::RewardKind kind = adprog::RewardKind::training;
            if (trn_reward == "mismatch_only") kind = adprog::RewardKind::mismatch_only;
            if (trn_reward == "cost_only") kind = adprog::RewardKind::cost_only;
            adprog::GaussianPolicy policy(static_cast<int>(2 * graph.size()),
                                          static_cast<int>(graph.size()), tc.hidden, tc.init_std,
                                          tc.obs_scale);
            adprog::Rng rng = adprog::make_rng(tc.seed, {0x9011cfULL});
            policy.init_weights(rng);
            adprog::PolicyCheckpoint ckpt = adprog::train_policy(
                std::move(policy), pool, graph, sim, kind, trn_lambda, tc, &std::cout);
            ckpt.config_snapshot = {{"lambda", trn_lambda},
                                    {"i0", std::vector<double>(i0.data(), i0.data() + i0.size())},
                                    {"reward", trn_reward},
                                    {"episodes_total", tc.episodes_total},
                                    {"batch_trajectories", tc.batch_trajectories},
                                    {"seed", tc.seed}};
            adprog::save_checkpoint(ckpt, trn_out);
            if (!trn_curve.empty()) {
                std::vector<std::vector<std::string>> rows;
                for (const auto& s : ckpt.curve)
                    rows.push_back({std::to_string(s.epoch), adprog::fmt_double(s.mean_reward),
                                    adprog::fmt_double(s.mean_kl),
                                    adprog::fmt_double(s.surrogate_delta)});
                adprog::write_csv(trn_curve, {"epoch", "mean_reward", "mean_kl", "surrogate_delta"},
                                  rows);
            }
            std::cout << "checkpoint -> " << trn_out << "\n";
        } else if (prd->parsed()) {
            const adprog::Cohort cohort = load_cohort(prd_cohort);
            const adprog::ParamTable table = load_param_table(prd_params);
            const adprog::PolicyCheckpoint ckpt = adprog::load_checkpoint(prd_ckpt);
            const adprog::SimConfig sim = sim_config_from(cfg);
            const adprog::Vec i0 = parse_i0(prd_i0);
            const double lambda = ckpt.config_snapshot.value("lambda", 2.0);
            const adprog::InitOptions opts{true, lambda};
            std::vector<adprog::SubjectPrediction> predictions;
            for (const auto& rec : cohort) {
                if (prd_anchor != 0) {
                    const adprog::Visit* v = rec.visit_at(prd_anchor);
                    if (v == nullptr || !v->x_ok || !v->phi_ok) continue;
                }
                predictions.push_back(adprog::predict_subject(ckpt.policy, rec, table, graph, sim,
                                                              i0, opts, prd_anchor));
            }
            adprog::write_trajectories_csv(predictions, cohort, prd_out);
            std::cout << "predicted " << predictions.size() << " subjects -> " << prd_out << "\n";
        } else if (evl->parsed()) {
            const adprog::Cohort cohort = load_cohort(evl_cohort);
            adprog::PipelineConfig pc = pipeline_config_from(cfg, preset, seed, jobs);
            pc.methods = split_list(evl_methods);
            const adprog::EvalReport report = adprog::run_cv(cohort, graph, pc);
            adprog::write_eval_report(report, cohort, evl_out);
            for (const auto& [method, s] : report.summary)
                std::cout << method << ": MAE " << s.mae_mean << " (" << s.mae_std_across_folds
                          << "), MSE " << s.mse_mean << " (" << s.mse_std_across_folds << ")\n";
            std::cout << "report -> " << evl_out << "\n";
        } else if (plt->parsed()) {
            adprog::plot_trajectories(plt_traj, plt_out);
            std::cout << "charts -> " << plt_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
