#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "adprog/graph.hpp"
#include "adprog/rng.hpp"

namespace adprog {

/// Feedforward network with tanh hidden layers and a linear output head.
/// Parameters live in one flat vector (per layer: weight matrix row-major,
/// then bias) so optimizers can treat the network as a point in R^n.
/// Besides the forward pass it exposes the two directional products needed
/// by natural-gradient methods: vector-Jacobian (backprop) and
/// Jacobian-vector (forward mode).
class Mlp {
public:
    Mlp() = default;
    Mlp(int n_in, std::vector<int> hidden, int n_out)
        : n_in_(n_in), n_out_(n_out), hidden_(std::move(hidden)) {
        layer_in_.clear();
        layer_out_.clear();
        int prev = n_in_;
        for (int h : hidden_) {
            layer_in_.push_back(prev);
            layer_out_.push_back(h);
            prev = h;
        }
        layer_in_.push_back(prev);
        layer_out_.push_back(n_out_);
        int count = 0;
        offsets_.clear();
        for (size_t l = 0; l < layer_in_.size(); ++l) {
            offsets_.push_back(count);
            count += layer_out_[l] * layer_in_[l] + layer_out_[l];
        }
        params_ = Vec::Zero(count);
    }

    int input_dim() const { return n_in_; }
    int output_dim() const { return n_out_; }
    const std::vector<int>& hidden_sizes() const { return hidden_; }
    Eigen::Index param_count() const { return params_.size(); }
    const Vec& params() const { return params_; }
    void set_params(const Vec& p) {
        if (p.size() != params_.size()) throw std::invalid_argument("Mlp: parameter size mismatch");
        params_ = p;
    }

    /// Glorot-uniform weights, zero biases.
    void init_weights(Rng& rng) {
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (size_t l = 0; l < layer_in_.size(); ++l) {
            const double bound = std::sqrt(6.0 / (layer_in_[l] + layer_out_[l]));
            auto w = weight(l);
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = bound * unit(rng);
            bias(l).setZero();
        }
    }

    struct Cache {
        Mat input;                  // N x n_in
        std::vector<Mat> hidden;    // post-tanh activations per hidden layer
        Mat output;                 // N x n_out
    };

    Cache forward(const Mat& input) const {
        Cache c;
        c.input = input;
        Mat cur = input;
        for (size_t l = 0; l + 1 < layer_in_.size(); ++l) {
            Mat z = cur * weight_const(l).transpose();
            z.rowwise() += bias_const(l).transpose();
            c.hidden.push_back(z.array().tanh().matrix());
            cur = c.hidden.back();
        }
        const size_t last = layer_in_.size() - 1;
        c.output = cur * weight_const(last).transpose();
        c.output.rowwise() += bias_const(last).transpose();
        return c;
    }

    /// Backprop: given per-sample output gradients G (N x n_out), returns
    /// d(sum_k G_k . out_k)/d(params) as a flat vector.
    Vec vjp(const Cache& c, const Mat& grad_out) const {
        Vec grad = Vec::Zero(params_.size());
        Mat delta = grad_out;
        for (size_t li = layer_in_.size(); li-- > 0;) {
            const Mat& act_in = li == 0 ? c.input : c.hidden[li - 1];
            grad_weight(grad, li) = delta.transpose() * act_in;
            grad_bias(grad, li) = delta.colwise().sum().transpose();
            if (li == 0) break;
            Mat back = delta * weight_const(li);
            delta = back.cwiseProduct(Mat::Ones(back.rows(), back.cols()) -
                                      c.hidden[li - 1].cwiseProduct(c.hidden[li - 1]));
        }
        return grad;
    }

    /// Forward-mode directional derivative: d out / d params in direction v,
    /// evaluated per sample (N x n_out).
    Mat jvp(const Cache& c, const Vec& v) const {
        Mat r = Mat::Zero(c.input.rows(), layer_out_[0]);
        {
            Mat z = c.input * dir_weight(v, 0).transpose();
            z.rowwise() += dir_bias(v, 0).transpose();
            r = z;
        }
        for (size_t l = 0; l + 1 < layer_in_.size(); ++l) {
            // r currently holds d z_l; convert through tanh then push forward
            const Mat dact = r.cwiseProduct(Mat::Ones(r.rows(), r.cols()) -
                                            c.hidden[l].cwiseProduct(c.hidden[l]));
            const Mat& act = c.hidden[l];
            Mat z = dact * weight_const(l + 1).transpose() + act * dir_weight(v, l + 1).transpose();
            z.rowwise() += dir_bias(v, l + 1).transpose();
            r = z;
        }
        return r;
    }

private:
    using WMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using WMapC =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    WMap weight(size_t l) { return WMap(params_.data() + offsets_[l], layer_out_[l], layer_in_[l]); }
    WMapC weight_const(size_t l) const {
        return WMapC(params_.data() + offsets_[l], layer_out_[l], layer_in_[l]);
    }
    Eigen::Map<Vec> bias(size_t l) {
        return Eigen::Map<Vec>(params_.data() + offsets_[l] + layer_out_[l] * layer_in_[l],
                               layer_out_[l]);
    }
    Eigen::Map<const Vec> bias_const(size_t l) const {
        return Eigen::Map<const Vec>(params_.data() + offsets_[l] + layer_out_[l] * layer_in_[l],
                                     layer_out_[l]);
    }
    WMap grad_weight(Vec& g, size_t l) const {
        return WMap(g.data() + offsets_[l], layer_out_[l], layer_in_[l]);
    }
    Eigen::Map<Vec> grad_bias(Vec& g, size_t l) const {
        return Eigen::Map<Vec>(g.data() + offsets_[l] + layer_out_[l] * layer_in_[l],
                               layer_out_[l]);
    }
    WMapC dir_weight(const Vec& v, size_t l) const {
        return WMapC(v.data() + offsets_[l], layer_out_[l], layer_in_[l]);
    }
    Eigen::Map<const Vec> dir_bias(const Vec& v, size_t l) const {
        return Eigen::Map<const Vec>(v.data() + offsets_[l] + layer_out_[l] * layer_in_[l],
                                     layer_out_[l]);
    }

    int n_in_ = 0, n_out_ = 0;
    std::vector<int> hidden_;
    std::vector<int> layer_in_, layer_out_;
    std::vector<int> offsets_;
    Vec params_;
};

}  // namespace adprog
