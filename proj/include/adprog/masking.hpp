#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "adprog/cohort.hpp"
#include "adprog/rng.hpp"

namespace adprog {

/// Per-follow-up-year retention fractions (index 0 is year 1). The imaging
/// channel covers sizes, amyloid, rates and activity together; cognition is
/// retained independently and more often, matching longitudinal studies
/// where cognitive scores outlive imaging follow-up. Baseline visits are
/// never masked.
struct MaskSchedule {
    std::vector<double> imaging;
    std::vector<double> cognition;

    void validate() const {
        for (double f : imaging)
            if (f < 0.0 || f > 1.0)
                throw std::invalid_argument("MaskSchedule: imaging fraction outside [0,1]");
        for (double f : cognition)
            if (f < 0.0 || f > 1.0)
                throw std::invalid_argument("MaskSchedule: cognition fraction outside [0,1]");
    }

    double imaging_at(int year) const {
        const size_t i = static_cast<size_t>(year - 1);
        return i < imaging.size() ? imaging[i] : 1.0;
    }
    double cognition_at(int year) const {
        const size_t i = static_cast<size_t>(year - 1);
        return i < cognition.size() ? cognition[i] : 1.0;
    }
};

/// Default ten-year schedule. Late-year imaging retention matches the
/// reference attrition counts of 60/17/4 participants out of 160 at years
/// 8/9/10, and the average over the eleven possible visits is 31%.
inline MaskSchedule default_mask_schedule() {
    MaskSchedule s;
    s.imaging = {0.50, 0.55, 0.20, 0.35, 0.10, 0.17, 0.034, 60.0 / 160.0, 17.0 / 160.0, 4.0 / 160.0};
    s.cognition = {0.80, 0.80, 0.65, 0.55, 0.45, 0.40, 0.35, 60.0 / 160.0, 17.0 / 160.0, 4.0 / 160.0};
    return s;
}

/// Flips availability flags so that, per follow-up year, exactly
/// round(fraction * n_having_visit) randomly chosen subjects keep the
/// channel. Values are never modified, only flags.
inline Cohort apply_missing_mask(Cohort cohort, const MaskSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    int max_year = 0;
    for (const auto& rec : cohort)
        for (const auto& v : rec.visits) max_year = std::max(max_year, v.year);

    for (int year = 1; year <= max_year; ++year) {
        std::vector<size_t> having;
        for (size_t i = 0; i < cohort.size(); ++i)
            if (cohort[i].visit_at(year) != nullptr) having.push_back(i);
        if (having.empty()) continue;
        for (int channel = 0; channel < 2; ++channel) {
            const double fraction =
                channel == 0 ? schedule.imaging_at(year) : schedule.cognition_at(year);
            const auto keep =
                static_cast<size_t>(std::lround(fraction * static_cast<double>(having.size())));
            std::vector<size_t> order = having;
            Rng rng = make_rng(seed, {static_cast<std::uint64_t>(year),
                                      static_cast<std::uint64_t>(channel)});
            std::shuffle(order.begin(), order.end(), rng);
            for (size_t k = keep; k < order.size(); ++k) {
                for (auto& v : cohort[order[k]].visits) {
                    if (v.year != year) continue;
                    if (channel == 0)
                        v.x_ok = v.phi_ok = v.d_ok = v.y_ok = false;
                    else
                        v.c_ok = false;
                }
            }
        }
    }
    return cohort;
}

}  // namespace adprog
