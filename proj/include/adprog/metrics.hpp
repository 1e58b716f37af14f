#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "adprog/cohort.hpp"

namespace adprog {

/// Predicted cognition indexed by year offset from the anchor (entry 0 is
/// the anchor year itself).
struct PredictedTrajectory {
    std::string subject_id;
    int anchor_year = 0;
    std::vector<double> cognition;

    double at_year(int year) const {
        const int k = year - anchor_year;
        if (k < 0 || k >= static_cast<int>(cognition.size())) return std::nan("");
        return cognition[static_cast<size_t>(k)];
    }
};

struct ErrorStats {
    double mae = std::nan("");
    double mse = std::nan("");
    long n_visits = 0;
    std::vector<double> abs_errors_per_subject;  // per-subject mean absolute error
};

/// Prediction error over follow-up visits with an observed cognitive score
/// (years anchor+1 .. anchor+h). Visits without cognition never contribute.
inline ErrorStats cognition_error(const std::vector<PredictedTrajectory>& predictions,
                                  const Cohort& cohort, int horizon = 10) {
    std::map<std::string, const SubjectRecord*> by_id;
    for (const auto& rec : cohort) by_id[rec.id] = &rec;
    ErrorStats stats;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (const auto& pred : predictions) {
        auto it = by_id.find(pred.subject_id);
        if (it == by_id.end()) continue;
        double subject_abs = 0.0;
        long subject_n = 0;
        for (const auto& visit : it->second->visits) {
            if (!visit.c_ok) continue;
            if (visit.year <= pred.anchor_year || visit.year > pred.anchor_year + horizon) continue;
            const double p = pred.at_year(visit.year);
            if (std::isnan(p)) continue;
            const double err = p - visit.C;
            abs_sum += std::abs(err);
            sq_sum += err * err;
            subject_abs += std::abs(err);
            ++subject_n;
            ++stats.n_visits;
        }
        if (subject_n > 0)
            stats.abs_errors_per_subject.push_back(subject_abs / static_cast<double>(subject_n));
    }
    if (stats.n_visits > 0) {
        stats.mae = abs_sum / static_cast<double>(stats.n_visits);
        stats.mse = sq_sum / static_cast<double>(stats.n_visits);
    }
    return stats;
}

inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::nan("");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double stddev_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) return std::nan("");
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nan("");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace adprog
