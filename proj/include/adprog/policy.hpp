#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "adprog/mlp.hpp"

namespace adprog {

/// Diagonal-Gaussian policy: an MLP maps the observation (region sizes
/// concatenated with the previous allocation) to the action mean; the log
/// standard deviations are free per-dimension parameters. The flat
/// parameter vector is [network params, log_std], which is what the
/// natural-gradient update manipulates. Log-densities are always evaluated
/// on pre-clip actions; clipping is the environment's business.
class GaussianPolicy {
public:
    GaussianPolicy() = default;
    GaussianPolicy(int obs_dim, int act_dim, std::vector<int> hidden = {32, 32},
                   double init_std = 1.0, double obs_scale = 0.2)
        : net_(obs_dim, std::move(hidden), act_dim),
          log_std_(Vec::Constant(act_dim, std::log(init_std))),
          obs_scale_(obs_scale) {
        if (init_std <= 0.0) throw std::invalid_argument("GaussianPolicy: init_std must be positive");
    }

    int obs_dim() const { return net_.input_dim(); }
    int act_dim() const { return net_.output_dim(); }
    double obs_scale() const { return obs_scale_; }
    const Mlp& net() const { return net_; }
    const Vec& log_std() const { return log_std_; }

    Eigen::Index param_count() const { return net_.param_count() + log_std_.size(); }

    Vec flat_params() const {
        Vec p(param_count());
        p.head(net_.param_count()) = net_.params();
        p.tail(log_std_.size()) = log_std_;
        return p;
    }

    void set_flat_params(const Vec& p) {
        if (p.size() != param_count())
            throw std::invalid_argument("GaussianPolicy: flat parameter size mismatch");
        net_.set_params(p.head(net_.param_count()));
        log_std_ = p.tail(log_std_.size());
    }

    void init_weights(Rng& rng) { net_.init_weights(rng); }

    Vec std_dev() const { return log_std_.array().exp(); }

    Mat scaled(const Mat& obs) const { return obs * obs_scale_; }

    /// Mean actions for a batch of raw observations (N x obs_dim).
    Mat mean(const Mat& obs) const { return net_.forward(scaled(obs)).output; }

    Vec mean_single(const Vec& obs) const {
        return mean(Mat(obs.transpose())).row(0).transpose();
    }

    struct Sample {
        Vec action;  // pre-clip
        Vec mean;
        double log_prob;
    };

    Sample sample(const Vec& obs, Rng& rng) const {
        Sample s;
        s.mean = mean_single(obs);
        const Vec sigma = std_dev();
        std::normal_distribution<double> normal(0.0, 1.0);
        s.action = s.mean;
        for (Eigen::Index d = 0; d < s.action.size(); ++d) s.action[d] += sigma[d] * normal(rng);
        s.log_prob = log_prob_single(s.mean, s.action);
        return s;
    }

    double log_prob_single(const Vec& mean, const Vec& action) const {
        double lp = 0.0;
        for (Eigen::Index d = 0; d < action.size(); ++d) {
            const double z = (action[d] - mean[d]) / std::exp(log_std_[d]);
            lp -= 0.5 * z * z + log_std_[d] + 0.5 * std::log(2.0 * std::numbers::pi);
        }
        return lp;
    }

    /// Log-densities of given actions under the current parameters.
    Vec log_prob(const Mat& obs, const Mat& actions) const {
        const Mat mu = mean(obs);
        Vec out(obs.rows());
        for (Eigen::Index k = 0; k < obs.rows(); ++k)
            out[k] = log_prob_single(mu.row(k).transpose(), actions.row(k).transpose());
        return out;
    }

    /// Mean KL(old || current) over a batch, where the old distribution is
    /// given by its recorded means and log stds.
    double mean_kl(const Mat& obs, const Mat& mean_old, const Vec& log_std_old) const {
        const Mat mu = mean(obs);
        double total = 0.0;
        for (Eigen::Index k = 0; k < obs.rows(); ++k) {
            for (Eigen::Index d = 0; d < mu.cols(); ++d) {
                const double so2 = std::exp(2.0 * log_std_old[d]);
                const double sn2 = std::exp(2.0 * log_std_[d]);
                const double dm = mean_old(k, d) - mu(k, d);
                total += log_std_[d] - log_std_old[d] + (so2 + dm * dm) / (2.0 * sn2) - 0.5;
            }
        }
        return total / static_cast<double>(obs.rows());
    }

private:
    Mlp net_;
    Vec log_std_;
    double obs_scale_ = 0.2;
};

inline nlohmann::json policy_to_json(const GaussianPolicy& p) {
    nlohmann::json j;
    j["obs_dim"] = p.obs_dim();
    j["act_dim"] = p.act_dim();
    j["hidden"] = p.net().hidden_sizes();
    j["obs_scale"] = p.obs_scale();
    const Vec net = p.net().params();
    j["weights"] = std::vector<double>(net.data(), net.data() + net.size());
    const Vec ls = p.log_std();
    j["log_std"] = std::vector<double>(ls.data(), ls.data() + ls.size());
    return j;
}

inline GaussianPolicy policy_from_json(const nlohmann::json& j) {
    GaussianPolicy p(j.at("obs_dim").get<int>(), j.at("act_dim").get<int>(),
                     j.at("hidden").get<std::vector<int>>(), 1.0,
                     j.value("obs_scale", 0.2));
    const auto weights = j.at("weights").get<std::vector<double>>();
    const auto log_std = j.at("log_std").get<std::vector<double>>();
    Vec flat(static_cast<Eigen::Index>(weights.size() + log_std.size()));
    for (size_t i = 0; i < weights.size(); ++i) flat[static_cast<Eigen::Index>(i)] = weights[i];
    for (size_t i = 0; i < log_std.size(); ++i)
        flat[static_cast<Eigen::Index>(weights.size() + i)] = log_std[i];
    p.set_flat_params(flat);
    return p;
}

}  // namespace adprog
