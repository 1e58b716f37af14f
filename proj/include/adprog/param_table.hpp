#pragma once

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adprog/estimation.hpp"

namespace adprog {

/// Which demographic features key the parameter lookup. Feature names are
/// "gender", "apoe4", or any named discrete extra feature.
struct DemographicKeySpec {
    std::vector<std::string> features;

    std::vector<int> key_of(const Demographics& d) const {
        std::vector<int> key;
        key.reserve(features.size());
        for (const auto& f : features) {
            if (f == "gender") {
                key.push_back(d.gender);
            } else if (f == "apoe4") {
                key.push_back(d.apoe4 ? 1 : 0);
            } else {
                auto it = d.extra.find(f);
                if (it == d.extra.end())
                    throw std::invalid_argument("DemographicKeySpec: subject lacks feature " + f);
                key.push_back(it->second);
            }
        }
        return key;
    }
};

struct GroupEntry {
    ModelParams params;
    int subject_count = 0;
    long pair_count = 0;
};

struct LookupResult {
    ModelParams params;
    bool pooled_fallback = false;
};

/// Demographic-keyed lookup table of the dynamics constants, with a pooled
/// all-subjects estimate as fallback for keys unseen at fit time.
struct ParamTable {
    DemographicKeySpec keying;
    std::map<std::vector<int>, GroupEntry> entries;
    ModelParams pooled;
    int pooled_subject_count = 0;
    std::string provenance;  // e.g. fold id

    LookupResult lookup(const Demographics& d) const {
        auto it = entries.find(keying.key_of(d));
        if (it != entries.end()) return {it->second.params, false};
        return {pooled, true};
    }
};

namespace detail {

inline ModelParams estimate_pooled(const Cohort& group, const BrainGraph& graph,
                                   int activity_exponent) {
    ModelParams p;
    p.beta = estimate_beta(group, graph);
    const AtrophyEstimate a = estimate_alpha1_alpha2gamma(group, activity_exponent);
    p.alpha1 = a.alpha1;
    p.alpha2_gamma = a.alpha2_gamma;
    p.gamma = 1.0;
    p.activity_exponent = activity_exponent;
    return p;
}

}  // namespace detail

/// Pools visit pairs per demographic group and runs the closed-form
/// estimators once per group. Groups whose estimation degenerates are
/// omitted with a warning; lookups for them fall back to the pooled
/// all-subjects estimate.
inline ParamTable fit_param_table(const Cohort& subjects, const DemographicKeySpec& keying,
                                  const BrainGraph& graph, int activity_exponent = 1,
                                  const std::string& provenance = "") {
    ParamTable table;
    table.keying = keying;
    table.provenance = provenance;
    table.pooled = detail::estimate_pooled(subjects, graph, activity_exponent);
    table.pooled_subject_count = static_cast<int>(subjects.size());

    std::map<std::vector<int>, Cohort> groups;
    for (const auto& rec : subjects) groups[keying.key_of(rec.demographics)].push_back(rec);
    for (const auto& [key, group] : groups) {
        try {
            GroupEntry entry;
            entry.params = detail::estimate_pooled(group, graph, activity_exponent);
            entry.subject_count = static_cast<int>(group.size());
            entry.pair_count = accumulate_k_constants(group, activity_exponent).n_pairs;
            table.entries[key] = entry;
        } catch (const NonIdentifiable& e) {
            std::cerr << "fit_param_table: omitting group (" << e.what() << ")\n";
        }
    }
    return table;
}

inline nlohmann::json param_table_to_json(const ParamTable& table) {
    nlohmann::json j;
    j["format"] = "adprog-param-table";
    j["version"] = 1;
    j["keying"] = table.keying.features;
    j["provenance"] = table.provenance;
    j["pooled"] = {{"alpha1", table.pooled.alpha1},
                   {"alpha2_gamma", table.pooled.alpha2_gamma},
                   {"beta", table.pooled.beta},
                   {"gamma", table.pooled.gamma},
                   {"subject_count", table.pooled_subject_count}};
    j["groups"] = nlohmann::json::array();
    for (const auto& [key, entry] : table.entries) {
        nlohmann::json g;
        g["key"] = key;
        g["alpha1"] = entry.params.alpha1;
        g["alpha2_gamma"] = entry.params.alpha2_gamma;
        g["beta"] = entry.params.beta;
        g["gamma"] = entry.params.gamma;
        g["subject_count"] = entry.subject_count;
        g["pair_count"] = entry.pair_count;
        j["groups"].push_back(g);
    }
    j["activity_exponent"] = table.pooled.activity_exponent;
    return j;
}

inline ParamTable param_table_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "adprog-param-table")
        throw std::runtime_error("param_table_from_json: unrecognized format");
    ParamTable table;
    table.keying.features = j.at("keying").get<std::vector<std::string>>();
    table.provenance = j.value("provenance", "");
    const int exponent = j.value("activity_exponent", 1);
    const auto& p = j.at("pooled");
    table.pooled.alpha1 = p.at("alpha1");
    table.pooled.alpha2_gamma = p.at("alpha2_gamma");
    table.pooled.beta = p.at("beta");
    table.pooled.gamma = p.at("gamma");
    table.pooled.activity_exponent = exponent;
    table.pooled_subject_count = p.value("subject_count", 0);
    for (const auto& g : j.at("groups")) {
        GroupEntry entry;
        entry.params.alpha1 = g.at("alpha1");
        entry.params.alpha2_gamma = g.at("alpha2_gamma");
        entry.params.beta = g.at("beta");
        entry.params.gamma = g.at("gamma");
        entry.params.activity_exponent = exponent;
        entry.subject_count = g.value("subject_count", 0);
        entry.pair_count = g.value("pair_count", 0L);
        table.entries[g.at("key").get<std::vector<int>>()] = entry;
    }
    return table;
}

}  // namespace adprog
