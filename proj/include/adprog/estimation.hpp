#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "adprog/cohort.hpp"
#include "adprog/graph.hpp"

namespace adprog {

/// Thrown when an estimator's normal equations degenerate; the message
/// names the vanishing expression.
struct NonIdentifiable : std::runtime_error {
    explicit NonIdentifiable(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// Forward differences are only formed between consecutive visits at which
/// the needed variables are observed; dt is the actual gap in years.
struct DiffPair {
    const Visit* left;
    const Visit* right;
    double dt;
};

template <typename LeftOk, typename RightOk>
inline std::vector<DiffPair> observed_pairs(const SubjectRecord& rec, LeftOk left_ok,
                                            RightOk right_ok) {
    std::vector<const Visit*> obs;
    for (const auto& v : rec.visits)
        if (right_ok(v)) obs.push_back(&v);
    std::vector<DiffPair> pairs;
    for (size_t i = 0; i + 1 < obs.size(); ++i)
        if (left_ok(*obs[i]))
            pairs.push_back({obs[i], obs[i + 1],
                             static_cast<double>(obs[i + 1]->year - obs[i]->year)});
    return pairs;
}

inline Vec size_weight(const Vec& X, int exponent) {
    return exponent == 2 ? Vec(X.array().square()) : X;
}

}  // namespace detail

/// Least-squares estimate of the diffusion rate from longitudinal
/// instantaneous-amyloid observations:
///   beta = -sum(D' H' dD/dt) / sum(D' H' H D).
inline double estimate_beta(const Cohort& subjects, const BrainGraph& graph) {
    const Mat& H = graph.laplacian;
    double num = 0.0, den = 0.0, scale = 0.0;
    for (const auto& rec : subjects) {
        const auto pairs = detail::observed_pairs(
            rec, [](const Visit& v) { return v.d_ok; }, [](const Visit& v) { return v.d_ok; });
        for (const auto& p : pairs) {
            const Vec hd = H * p.left->D;
            const Vec dd = (p.right->D - p.left->D) / p.dt;
            num += hd.dot(dd);
            den += hd.squaredNorm();
            scale += p.left->D.squaredNorm();
        }
    }
    if (den <= 1e-14 * std::max(scale, 1e-300))
        throw NonIdentifiable("estimate_beta: sum(D' H' H D) vanishes");
    return -num / den;
}

/// Scalar summaries entering the estimators when activity is unobserved.
/// a1 = X^p . dX/dt and a2 = X^p . D per visit pair (p = activity exponent);
/// K1..K5 are their pooled second moments and cross moments with cognition.
struct KConstants {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0, k5 = 0.0;
    long n_pairs = 0;
};

inline KConstants accumulate_k_constants(const Cohort& subjects, int activity_exponent) {
    KConstants k;
    for (const auto& rec : subjects) {
        const auto pairs = detail::observed_pairs(
            rec, [](const Visit& v) { return v.x_ok && v.d_ok && v.c_ok; },
            [](const Visit& v) { return v.x_ok; });
        for (const auto& p : pairs) {
            const Vec w = detail::size_weight(p.left->X, activity_exponent);
            const double a1 = w.dot((p.right->X - p.left->X) / p.dt);
            const double a2 = w.dot(p.left->D);
            const double c = p.left->C;
            k.k1 += a1 * a1;
            k.k2 += a2 * a2;
            k.k3 += a1 * a2;
            k.k4 += a1 * c;
            k.k5 += a2 * c;
            ++k.n_pairs;
        }
    }
    return k;
}

struct AtrophyEstimate {
    double alpha1 = 0.0;
    double alpha2_gamma = 0.0;
};

/// Closed-form minimizer of
///   L(d1, d2) = sum (C + d1*a1 + d1*d2*a2)^2,   d1 = 1/(alpha2*gamma), d2 = alpha1,
/// the residual of the atrophy equation once activity has been eliminated
/// through the size-activity relation and the cognition sum.
inline AtrophyEstimate estimate_alpha1_alpha2gamma(const Cohort& subjects,
                                                   int activity_exponent = 1) {
    const KConstants k = accumulate_k_constants(subjects, activity_exponent);
    if (k.n_pairs < 2)
        throw NonIdentifiable("estimate_alpha1_alpha2gamma: fewer than two usable visit pairs");
    const double d2_den = k.k2 * k.k4 - k.k3 * k.k5;
    const double d1_den = k.k3 * k.k3 - k.k1 * k.k2;
    const double mag2 = std::abs(k.k2 * k.k4) + std::abs(k.k3 * k.k5);
    const double mag1 = std::abs(k.k3 * k.k3) + std::abs(k.k1 * k.k2);
    if (std::abs(d2_den) <= 1e-12 * std::max(mag2, 1e-300))
        throw NonIdentifiable("estimate_alpha1_alpha2gamma: K2*K4 - K3*K5 vanishes");
    if (std::abs(d1_den) <= 1e-12 * std::max(mag1, 1e-300))
        throw NonIdentifiable("estimate_alpha1_alpha2gamma: K3^2 - K1*K2 vanishes");
    AtrophyEstimate est;
    est.alpha1 = (k.k1 * k.k5 - k.k3 * k.k4) / d2_den;
    est.alpha2_gamma = d1_den / d2_den;  // reciprocal of d1
    return est;
}

/// Same estimator derived for the inverse-square size-activity variant.
inline AtrophyEstimate estimators_inverse_square(const Cohort& subjects) {
    return estimate_alpha1_alpha2gamma(subjects, 2);
}

/// Objective behind estimate_alpha1_alpha2gamma, exposed for verification
/// against grid minimization. delta1 = 1/(alpha2*gamma), delta2 = alpha1.
inline double atrophy_objective(const KConstants& k, double sum_c_sq, double delta1,
                                double delta2) {
    return sum_c_sq + delta1 * delta1 * k.k1 + delta1 * delta1 * delta2 * delta2 * k.k2 +
           2.0 * delta1 * delta1 * delta2 * k.k3 + 2.0 * delta1 * k.k4 +
           2.0 * delta1 * delta2 * k.k5;
}

inline double sum_cognition_squared(const Cohort& subjects) {
    double s = 0.0;
    for (const auto& rec : subjects) {
        const auto pairs = detail::observed_pairs(
            rec, [](const Visit& v) { return v.x_ok && v.d_ok && v.c_ok; },
            [](const Visit& v) { return v.x_ok; });
        for (const auto& p : pairs) s += p.left->C * p.left->C;
    }
    return s;
}

/// gamma estimate when activity is observed: 1/psi with
/// psi = sum(C * Y.X) / sum((Y.X)^2).
inline double estimate_gamma_withY(const Cohort& subjects) {
    double num = 0.0, den = 0.0;
    for (const auto& rec : subjects) {
        for (const auto& v : rec.visits) {
            if (!(v.x_ok && v.y_ok && v.c_ok)) continue;
            const double yx = v.Y.dot(v.X);
            num += v.C * yx;
            den += yx * yx;
        }
    }
    if (den <= 0.0) throw NonIdentifiable("estimate_gamma_withY: sum((Y.X)^2) vanishes");
    const double psi = num / den;
    if (psi == 0.0) throw NonIdentifiable("estimate_gamma_withY: psi vanishes");
    return 1.0 / psi;
}

struct AlphaWithY {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

/// Direct least squares on the atrophy equation when activity is observed:
/// alpha = -(sum Q'Q)^{-1} (sum Q' dX/dt) with Q = [D Y].
inline AlphaWithY estimate_alpha_withY(const Cohort& subjects) {
    Eigen::Matrix2d qtq = Eigen::Matrix2d::Zero();
    Eigen::Vector2d qtd = Eigen::Vector2d::Zero();
    for (const auto& rec : subjects) {
        const auto pairs = detail::observed_pairs(
            rec, [](const Visit& v) { return v.x_ok && v.d_ok && v.y_ok; },
            [](const Visit& v) { return v.x_ok; });
        for (const auto& p : pairs) {
            Mat q(p.left->D.size(), 2);
            q.col(0) = p.left->D;
            q.col(1) = p.left->Y;
            const Vec dx = (p.right->X - p.left->X) / p.dt;
            qtq += q.transpose() * q;
            qtd += q.transpose() * dx;
        }
    }
    const double det = qtq.determinant();
    if (std::abs(det) <= 1e-12 * std::max(qtq.norm() * qtq.norm(), 1e-300))
        throw NonIdentifiable("estimate_alpha_withY: sum(Q'Q) is singular");
    const Eigen::Vector2d alpha = -qtq.ldlt().solve(qtd);
    return {alpha[0], alpha[1]};
}

}  // namespace adprog
