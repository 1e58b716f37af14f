#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace adprog {

/// Per-group constants driving the difference equations.
/// alpha2 and gamma only ever enter the dynamics through their product,
/// so the product is stored; gamma stays 1.0 unless explicitly overridden.
struct ModelParams {
    double alpha1 = 0.0;        // atrophy per unit amyloid rate (1/year)
    double alpha2_gamma = 0.0;  // atrophy per unit information processing (1/year)
    double beta = 0.0;          // diffusion rate (1/year)
    double gamma = 1.0;         // activity efficiency constant
    double lambda = 1.0;        // reward trade-off weight
    int activity_exponent = 1;  // 1: inverse size, 2: inverse squared size

    void validate() const {
        if (alpha1 < 0.0 || alpha2_gamma < 0.0 || beta < 0.0)
            throw std::invalid_argument("ModelParams: rates must be nonnegative");
        if (gamma <= 0.0)
            throw std::invalid_argument("ModelParams: gamma must be positive");
        if (activity_exponent != 1 && activity_exponent != 2)
            throw std::invalid_argument("ModelParams: activity_exponent must be 1 or 2");
    }
};

struct Demographics {
    int gender = 0;              // categorical code
    bool apoe4 = false;          // genetic-risk flag
    double age_baseline = 70.0;  // years
    double education = 0.0;      // years
    std::map<std::string, int> extra;  // named discrete features

    void validate() const {
        if (age_baseline <= 0.0)
            throw std::invalid_argument("Demographics: age_baseline must be positive");
    }
};

/// Simulation-wide constants; defaults follow the reference setup
/// (cognitive demand 10, ten annual steps, actions bounded by 2).
struct SimConfig {
    double c_task = 10.0;
    int horizon = 10;
    double dt = 1.0;
    double action_clip = 2.0;
    double reward_floor = -2000.0;
    double reward_ceiling = 2000.0;

    void validate() const {
        if (c_task <= 0.0) throw std::invalid_argument("SimConfig: c_task must be positive");
        if (horizon < 1) throw std::invalid_argument("SimConfig: horizon must be >= 1");
        if (dt <= 0.0) throw std::invalid_argument("SimConfig: dt must be positive");
        if (action_clip <= 0.0) throw std::invalid_argument("SimConfig: action_clip must be positive");
        if (reward_floor >= reward_ceiling)
            throw std::invalid_argument("SimConfig: reward_floor must be below reward_ceiling");
    }
};

}  // namespace adprog
