#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "adprog/graph.hpp"
#include "adprog/params.hpp"

namespace adprog {

/// One explicit Euler step of the diffusion D' = -beta * H * D.
/// Row sums of H are zero, so total amyloid is conserved exactly.
inline Vec step_amyloid(const Vec& D, const BrainGraph& graph, double beta, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("step_amyloid: dt must be positive");
    return D - dt * beta * (graph.laplacian * D);
}

/// Left-rectangle accumulation of instantaneous amyloid into the total.
inline Vec accumulate_amyloid(const Vec& phi, const Vec& D, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("accumulate_amyloid: dt must be positive");
    return phi + dt * D;
}

/// Regional activity Y_v = gamma * I_v / X_v^p. A larger region needs less
/// activity for the same information throughput.
inline Vec compute_activity(const Vec& I, const Vec& X, double gamma, int activity_exponent) {
    Vec Y(I.size());
    for (Eigen::Index v = 0; v < I.size(); ++v) {
        if (X[v] <= 0.0)
            throw std::domain_error("compute_activity: degenerate region (size <= 0)");
        const double xp = activity_exponent == 2 ? X[v] * X[v] : X[v];
        Y[v] = gamma * I[v] / xp;
    }
    return Y;
}

inline double compute_cognition(const Vec& I) { return I.sum(); }

inline double compute_cost(const Vec& Y) { return Y.sum(); }

/// Region-size decline from amyloid load and activity wear.
/// Returns the stepped sizes without flooring; callers treat any
/// nonpositive component as region collapse.
inline Vec step_atrophy(const Vec& X, const Vec& D, const Vec& Y,
                        double alpha1, double alpha2, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("step_atrophy: dt must be positive");
    return X - dt * (alpha1 * D + alpha2 * Y);
}

inline bool has_collapsed(const Vec& X) { return (X.array() <= 0.0).any(); }

/// Plain trade-off reward: R = -[lambda * (c_task - C) + M].
inline double reward_plain(double C, double M, double c_task, double lambda) {
    return -(lambda * (c_task - C) + M);
}

/// Training reward: the mismatch term uses |c_task - C| scaled by a steep
/// 100^overshoot factor so allocations above the demand are never worth it,
/// then the value is clamped into [floor, ceiling]. Agrees with reward_plain
/// whenever C <= c_task and no clamp triggers.
inline double reward_training(double C, double M, double c_task, double lambda,
                              double floor, double ceiling) {
    const double overshoot = std::max(C - c_task, 0.0);
    const double r = -(lambda * std::abs(c_task - C) * std::pow(100.0, overshoot) + M);
    return std::clamp(r, floor, ceiling);
}

struct AmyloidInitOptions {
    double t_po_floor = 1.0;  // used when age_baseline <= 50
    bool warn_on_floor = true;
};

/// Recovers the instantaneous amyloid rate at baseline from the accumulated
/// amyloid, assuming diffusion has been running since age 50. On the
/// eigenbasis of H the map from accumulated to instantaneous amyloid is
/// diagonal: 1/(beta*t_po) on the kernel and nu*exp(-nu*beta*t_po) /
/// (1 - exp(-nu*beta*t_po)) elsewhere. The result is floored at zero.
inline Vec init_amyloid_rate(const Vec& phi0, const BrainGraph& graph, double beta,
                             double age_baseline, const AmyloidInitOptions& opts = {}) {
    if (beta <= 0.0) throw std::invalid_argument("init_amyloid_rate: beta must be positive");
    if ((phi0.array() < 0.0).any())
        throw std::invalid_argument("init_amyloid_rate: accumulated amyloid must be nonnegative");
    double t_po = age_baseline - 50.0;
    if (t_po <= 0.0) {
        if (opts.warn_on_floor)
            std::cerr << "init_amyloid_rate: age_baseline <= 50, flooring onset time at "
                      << opts.t_po_floor << "\n";
        t_po = opts.t_po_floor;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(graph.laplacian);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("init_amyloid_rate: eigendecomposition failed");
    const Vec& nu = eig.eigenvalues();
    const Mat& U = eig.eigenvectors();
    const double bt = beta * t_po;
    Vec diag(nu.size());
    for (Eigen::Index j = 0; j < nu.size(); ++j) {
        if (nu[j] < 1e-12) {
            diag[j] = 1.0 / bt;
        } else {
            const double e = std::exp(-nu[j] * bt);
            diag[j] = nu[j] * e / (1.0 - e);
        }
    }
    Vec d1 = beta * (U * diag.asDiagonal() * U.transpose() * phi0);
    return d1.cwiseMax(0.0);
}

}  // namespace adprog
