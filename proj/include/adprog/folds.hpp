#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "adprog/rng.hpp"

namespace adprog {

struct Fold {
    std::vector<std::string> train, val, test;
};

struct FoldPlan {
    int k = 5;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;
};

/// k-fold plan with a train:val:test split of 64:16:20 per fold. Subjects
/// are shuffled once; each fold takes a disjoint test chunk and splits the
/// remainder into train and validation, so every subject is in exactly one
/// of the three sets per fold and test sets partition the cohort.
inline FoldPlan make_fold_plan(std::vector<std::string> ids, int k, std::uint64_t seed,
                               double train_ratio = 0.64, double val_ratio = 0.16) {
    if (k < 2) throw std::invalid_argument("make_fold_plan: k must be >= 2");
    if (static_cast<int>(ids.size()) < k)
        throw std::invalid_argument("make_fold_plan: fewer subjects than folds");
    if (train_ratio <= 0.0 || val_ratio < 0.0 || train_ratio + val_ratio >= 1.0)
        throw std::invalid_argument("make_fold_plan: bad split ratios");
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    Rng rng = make_rng(seed, {0xf01d});
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n = ids.size();
    size_t start = 0;
    for (int f = 0; f < k; ++f) {
        const size_t chunk = n / static_cast<size_t>(k) + (static_cast<size_t>(f) < n % static_cast<size_t>(k) ? 1 : 0);
        Fold fold;
        fold.test.assign(ids.begin() + static_cast<long>(start),
                         ids.begin() + static_cast<long>(start + chunk));
        std::vector<std::string> rest;
        rest.insert(rest.end(), ids.begin(), ids.begin() + static_cast<long>(start));
        rest.insert(rest.end(), ids.begin() + static_cast<long>(start + chunk), ids.end());
        const auto n_train = static_cast<size_t>(std::lround(train_ratio * static_cast<double>(n)));
        if (n_train >= rest.size())
            throw std::invalid_argument("make_fold_plan: split leaves no validation subjects");
        fold.train.assign(rest.begin(), rest.begin() + static_cast<long>(n_train));
        fold.val.assign(rest.begin() + static_cast<long>(n_train), rest.end());
        plan.folds.push_back(std::move(fold));
        start += chunk;
    }
    return plan;
}

}  // namespace adprog
