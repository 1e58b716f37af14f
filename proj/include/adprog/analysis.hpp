#pragma once

#include <cmath>
#include <vector>

#include "adprog/metrics.hpp"
#include "adprog/rollout.hpp"

namespace adprog {

/// Cohort-mean per-region curves of information processing and activity,
/// plus the qualitative pattern flags read off them.
struct RecoveryReport {
    Mat mean_information;  // (horizon+1) x |V|
    Mat mean_activity;
    bool compensation = false;     // second region takes over while the first declines
    bool late_decline = false;     // the takeover region eventually declines after its peak
    bool hypermetabolism = false;  // second region's activity rises above baseline, then falls
};

namespace detail {

inline Mat mean_curves(const std::vector<Mat>& per_subject) {
    Mat sum = Mat::Zero(per_subject.front().rows(), per_subject.front().cols());
    for (const auto& m : per_subject) sum += m;
    return sum / static_cast<double>(per_subject.size());
}

inline bool declines_after_peak(const Vec& curve) {
    Eigen::Index peak = 0;
    curve.maxCoeff(&peak);
    for (Eigen::Index t = peak; t + 1 < curve.size(); ++t)
        if (curve[t + 1] < curve[t] - 1e-12) return true;
    return false;
}

}  // namespace detail

/// Pattern flags are pure functions of the mean curves, so the report can
/// be recomputed from emitted trajectory tables alone.
inline RecoveryReport recovery_analysis(const std::vector<Mat>& information_curves,
                                        const std::vector<Mat>& activity_curves) {
    RecoveryReport report;
    report.mean_information = detail::mean_curves(information_curves);
    report.mean_activity = detail::mean_curves(activity_curves);
    const Mat& info = report.mean_information;
    if (info.cols() >= 2) {
        for (Eigen::Index t = 0; t + 1 < info.rows(); ++t) {
            if (info(t + 1, 1) > info(t, 1) + 1e-12 && info(t + 1, 0) < info(t, 0) - 1e-12) {
                report.compensation = true;
                break;
            }
        }
        report.late_decline = detail::declines_after_peak(info.col(1));
        const Vec y2 = report.mean_activity.col(1);
        double peak = y2[0];
        Eigen::Index peak_at = 0;
        for (Eigen::Index t = 1; t < y2.size(); ++t)
            if (y2[t] > peak) {
                peak = y2[t];
                peak_at = t;
            }
        if (peak > y2[0] + 1e-12)
            for (Eigen::Index t = peak_at; t + 1 < y2.size(); ++t)
                if (y2[t + 1] < y2[t] - 1e-12) report.hypermetabolism = true;
    }
    return report;
}

/// Mean per-subject Pearson correlation between two predictions of the same
/// subject over their overlapping years. Subjects whose overlap is (nearly)
/// constant carry no correlation signal and are excluded.
struct ConsistencyResult {
    double mean_correlation = std::nan("");
    int n_subjects = 0;
    int n_excluded = 0;
};

inline ConsistencyResult trajectory_consistency(
    const std::vector<PredictedTrajectory>& anchored_a,
    const std::vector<PredictedTrajectory>& anchored_b) {
    ConsistencyResult result;
    std::vector<double> correlations;
    for (const auto& a : anchored_a) {
        const PredictedTrajectory* b = nullptr;
        for (const auto& cand : anchored_b)
            if (cand.subject_id == a.subject_id) {
                b = &cand;
                break;
            }
        if (b == nullptr) continue;
        const int lo = std::max(a.anchor_year, b->anchor_year);
        const int hi = std::min(a.anchor_year + static_cast<int>(a.cognition.size()) - 1,
                                b->anchor_year + static_cast<int>(b->cognition.size()) - 1);
        std::vector<double> xs, ys;
        for (int year = lo; year <= hi; ++year) {
            xs.push_back(a.at_year(year));
            ys.push_back(b->at_year(year));
        }
        if (xs.size() < 2) continue;
        if (stddev_of(xs) < 1e-9 || stddev_of(ys) < 1e-9) {
            ++result.n_excluded;
            continue;
        }
        correlations.push_back(pearson(xs, ys));
    }
    result.n_subjects = static_cast<int>(correlations.size());
    result.mean_correlation = mean_of(correlations);
    return result;
}

/// Pearson correlation between model-predicted and observed region sizes,
/// per region, across all subject-visits where sizes were observed.
inline std::vector<double> structure_fidelity(
    const std::vector<std::pair<const SubjectRecord*, const RolloutResult*>>& pairs) {
    if (pairs.empty()) return {};
    const auto n_regions = pairs.front().second->states.front().X.size();
    std::vector<double> out;
    for (Eigen::Index region = 0; region < n_regions; ++region) {
        std::vector<double> predicted, observed;
        for (const auto& [rec, traj] : pairs) {
            for (const auto& visit : rec->visits) {
                if (!visit.x_ok) continue;
                if (visit.year < 0 || visit.year >= static_cast<int>(traj->states.size())) continue;
                predicted.push_back(traj->states[static_cast<size_t>(visit.year)].X[region]);
                observed.push_back(visit.X[region]);
            }
        }
        out.push_back(pearson(predicted, observed));
    }
    return out;
}

}  // namespace adprog
