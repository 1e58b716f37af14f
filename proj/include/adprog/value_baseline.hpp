#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "adprog/mlp.hpp"

namespace adprog {

/// State-value baseline for advantage estimation. Implementations are fit
/// from scratch on each batch's (features, return target) pairs; features
/// are the raw observation plus normalized time.
class ValueBaseline {
public:
    virtual ~ValueBaseline() = default;
    virtual void fit(const Mat& features, const Vec& targets) = 0;
    virtual Vec predict(const Mat& features) const = 0;
};

/// Small tanh network trained by full-batch Adam on standardized inputs
/// and targets. Deterministic: fixed iteration count, no minibatching.
class MlpValueBaseline final : public ValueBaseline {
public:
    explicit MlpValueBaseline(int feature_dim, std::vector<int> hidden = {32, 32},
                              int fit_iterations = 60, double learning_rate = 0.01,
                              std::uint64_t seed = 0)
        : net_(feature_dim, std::move(hidden), 1),
          fit_iterations_(fit_iterations),
          learning_rate_(learning_rate) {
        Rng rng = make_rng(seed, {0xba5e11});
        net_.init_weights(rng);
        adam_m_ = Vec::Zero(net_.param_count());
        adam_v_ = Vec::Zero(net_.param_count());
    }

    void fit(const Mat& features, const Vec& targets) override {
        const auto n = features.rows();
        if (n == 0) return;
        feat_mean_ = features.colwise().mean().transpose();
        feat_std_.resize(features.cols());
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            const double var =
                (features.col(j).array() - feat_mean_[j]).square().sum() / static_cast<double>(n);
            feat_std_[j] = std::max(std::sqrt(var), 1e-8);
        }
        target_mean_ = targets.mean();
        target_std_ = std::sqrt((targets.array() - target_mean_).square().sum() /
                                static_cast<double>(n));
        if (target_std_ < 1e-8) target_std_ = 1.0;
        fitted_ = true;

        const Mat x = standardized(features);
        const Vec y = (targets.array() - target_mean_) / target_std_;
        adam_m_.setZero();
        adam_v_.setZero();
        for (int it = 1; it <= fit_iterations_; ++it) {
            const Mlp::Cache cache = net_.forward(x);
            const Mat residual = cache.output.col(0) - y;  // N x 1
            const Mat grad_out = residual * (2.0 / static_cast<double>(n));
            const Vec grad = net_.vjp(cache, grad_out);
            adam_m_ = 0.9 * adam_m_ + 0.1 * grad;
            adam_v_ = 0.999 * adam_v_ + 0.001 * grad.cwiseProduct(grad);
            const double mhat = 1.0 - std::pow(0.9, it);
            const double vhat = 1.0 - std::pow(0.999, it);
            Vec step(grad.size());
            for (Eigen::Index i = 0; i < grad.size(); ++i)
                step[i] = learning_rate_ * (adam_m_[i] / mhat) /
                          (std::sqrt(adam_v_[i] / vhat) + 1e-8);
            net_.set_params(net_.params() - step);
        }
    }

    Vec predict(const Mat& features) const override {
        if (!fitted_) return Vec::Zero(features.rows());
        const Mlp::Cache cache = net_.forward(standardized(features));
        return (cache.output.col(0).array() * target_std_ + target_mean_).matrix();
    }

private:
    Mat standardized(const Mat& features) const {
        Mat x = features.rowwise() - feat_mean_.transpose();
        x.array().rowwise() /= feat_std_.transpose().array();
        return x;
    }

    Mlp net_;
    int fit_iterations_;
    double learning_rate_;
    Vec adam_m_, adam_v_;
    Vec feat_mean_, feat_std_;
    double target_mean_ = 0.0, target_std_ = 1.0;
    bool fitted_ = false;
};

/// Ridge regression on [f, f^2, t, t^2, t^3, 1] features, closed form.
class LinearFeatureBaseline final : public ValueBaseline {
public:
    explicit LinearFeatureBaseline(double ridge = 1e-5) : ridge_(ridge) {}

    void fit(const Mat& features, const Vec& targets) override {
        const Mat phi = expand(features);
        Mat gram = phi.transpose() * phi;
        gram.diagonal().array() += ridge_;
        coef_ = gram.ldlt().solve(phi.transpose() * targets);
        fitted_ = true;
    }

    Vec predict(const Mat& features) const override {
        if (!fitted_) return Vec::Zero(features.rows());
        return expand(features) * coef_;
    }

private:
    static Mat expand(const Mat& features) {
        // The last input column is normalized time.
        const auto n = features.rows();
        const auto f = features.cols();
        Mat phi(n, 2 * f + 3);
        phi.leftCols(f) = features;
        phi.middleCols(f, f) = features.array().square().matrix();
        const auto t = features.col(f - 1).array();
        phi.col(2 * f) = (t * t).matrix();
        phi.col(2 * f + 1) = (t * t * t).matrix();
        phi.col(2 * f + 2).setOnes();
        return phi;
    }

    double ridge_;
    Vec coef_;
    bool fitted_ = false;
};

inline std::unique_ptr<ValueBaseline> make_value_baseline(const std::string& kind, int feature_dim,
                                                          std::uint64_t seed) {
    if (kind == "mlp") return std::make_unique<MlpValueBaseline>(feature_dim, std::vector<int>{32, 32}, 60, 0.01, seed);
    if (kind == "linear") return std::make_unique<LinearFeatureBaseline>();
    throw std::invalid_argument("make_value_baseline: unknown kind " + kind);
}

}  // namespace adprog
