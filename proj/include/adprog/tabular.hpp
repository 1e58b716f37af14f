#pragma once

#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "adprog/cohort.hpp"
#include "adprog/csv.hpp"

namespace adprog {

// Long-format cohort files. visits CSV: one row per subject-visit with
// columns subject_id, year, x_1..x_V, phi_1..phi_V, d_1..d_V, y_1..y_V,
// cognition, avail_imaging, avail_rates, avail_activity, avail_cognition.
// Unavailable fields are written as empty cells. Demographics live in a
// sibling CSV keyed by subject_id.

struct TabularSchema {
    bool mmse_raw = false;  // when true, cognition is a raw 0..30 score and gets divided by 3
    double c_task = 10.0;
};

namespace detail {

inline std::string opt_cell(double v, bool ok) { return ok ? fmt_double(v) : std::string(); }

inline std::string vec_or_empty(const Vec& v, Eigen::Index i, bool ok) {
    return ok && v.size() > i ? fmt_double(v[i]) : std::string();
}

}  // namespace detail

inline void write_cohort_visits(const Cohort& cohort, const std::string& path,
                                Eigen::Index n_regions) {
    std::vector<std::string> header = {"subject_id", "year"};
    const char* groups[] = {"x", "phi", "d", "y"};
    for (const char* g : groups)
        for (Eigen::Index v = 0; v < n_regions; ++v)
            header.push_back(std::string(g) + "_" + std::to_string(v + 1));
    header.insert(header.end(),
                  {"cognition", "avail_imaging", "avail_rates", "avail_activity", "avail_cognition"});
    std::vector<std::vector<std::string>> rows;
    for (const auto& rec : cohort) {
        for (const auto& vis : rec.visits) {
            std::vector<std::string> row = {rec.id, std::to_string(vis.year)};
            for (Eigen::Index v = 0; v < n_regions; ++v)
                row.push_back(detail::vec_or_empty(vis.X, v, vis.x_ok));
            for (Eigen::Index v = 0; v < n_regions; ++v)
                row.push_back(detail::vec_or_empty(vis.phi, v, vis.phi_ok));
            for (Eigen::Index v = 0; v < n_regions; ++v)
                row.push_back(detail::vec_or_empty(vis.D, v, vis.d_ok));
            for (Eigen::Index v = 0; v < n_regions; ++v)
                row.push_back(detail::vec_or_empty(vis.Y, v, vis.y_ok));
            row.push_back(detail::opt_cell(vis.C, vis.c_ok));
            row.push_back(vis.x_ok && vis.phi_ok ? "1" : "0");
            row.push_back(vis.d_ok ? "1" : "0");
            row.push_back(vis.y_ok ? "1" : "0");
            row.push_back(vis.c_ok ? "1" : "0");
            rows.push_back(std::move(row));
        }
    }
    write_csv(path, header, rows);
}

inline void write_cohort_demographics(const Cohort& cohort, const std::string& path) {
    std::set<std::string> extra_names;
    for (const auto& rec : cohort)
        for (const auto& [name, _] : rec.demographics.extra) extra_names.insert(name);
    std::vector<std::string> header = {"subject_id", "gender",   "apoe4",
                                       "age_baseline", "education", "diagnosis"};
    for (const auto& name : extra_names) header.push_back(name);
    std::vector<std::vector<std::string>> rows;
    for (const auto& rec : cohort) {
        std::vector<std::string> row = {rec.id,
                                        std::to_string(rec.demographics.gender),
                                        rec.demographics.apoe4 ? "1" : "0",
                                        fmt_double(rec.demographics.age_baseline),
                                        fmt_double(rec.demographics.education),
                                        rec.diagnosis};
        for (const auto& name : extra_names) {
            auto it = rec.demographics.extra.find(name);
            row.push_back(it == rec.demographics.extra.end() ? "" : std::to_string(it->second));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

inline void write_cohort(const Cohort& cohort, const std::string& visits_path,
                         const std::string& demographics_path) {
    Eigen::Index n_regions = 0;
    for (const auto& rec : cohort)
        for (const auto& v : rec.visits)
            if (v.X.size() > 0) n_regions = std::max(n_regions, v.X.size());
    write_cohort_visits(cohort, visits_path, n_regions);
    write_cohort_demographics(cohort, demographics_path);
}

struct IngestReport {
    Cohort records;
    std::vector<std::pair<std::string, std::string>> rejected;  // (subject id, reason)
};

/// Reads a visits CSV (plus optional demographics sidecar) back into
/// records. Availability is taken from the explicit flag columns when
/// present, otherwise derived from empty cells. Subjects violating the
/// record invariants are rejected individually, with a reason.
inline IngestReport ingest_tabular(const std::string& visits_path,
                                   const std::string& demographics_path = "",
                                   const TabularSchema& schema = {}) {
    const CsvTable table = read_csv(visits_path);
    const int col_id = table.require_column("subject_id");
    const int col_year = table.require_column("year");
    const int col_c = table.require_column("cognition");

    std::vector<int> col_x, col_phi, col_d, col_y;
    for (Eigen::Index v = 1;; ++v) {
        const int cx = table.column("x_" + std::to_string(v));
        if (cx < 0) break;
        col_x.push_back(cx);
        col_phi.push_back(table.require_column("phi_" + std::to_string(v)));
        col_d.push_back(table.column("d_" + std::to_string(v)));
        col_y.push_back(table.column("y_" + std::to_string(v)));
    }
    if (col_x.empty()) throw std::runtime_error("ingest_tabular: no region columns found");
    const auto n_regions = static_cast<Eigen::Index>(col_x.size());

    auto cell = [&](const std::vector<std::string>& row, int col) -> const std::string& {
        static const std::string empty;
        return (col >= 0 && col < static_cast<int>(row.size())) ? row[static_cast<size_t>(col)]
                                                                : empty;
    };
    auto read_vec = [&](const std::vector<std::string>& row, const std::vector<int>& cols,
                        Vec& out) -> bool {
        out.resize(n_regions);
        for (Eigen::Index v = 0; v < n_regions; ++v) {
            const std::string& s = cell(row, cols[static_cast<size_t>(v)]);
            if (s.empty()) return false;
            out[v] = std::strtod(s.c_str(), nullptr);
        }
        return true;
    };

    std::map<std::string, SubjectRecord> by_id;
    std::vector<std::string> id_order;
    for (const auto& row : table.rows) {
        const std::string id = cell(row, col_id);
        if (by_id.find(id) == by_id.end()) {
            id_order.push_back(id);
            by_id[id].id = id;
        }
        Visit vis;
        vis.year = std::atoi(cell(row, col_year).c_str());
        vis.x_ok = read_vec(row, col_x, vis.X);
        vis.phi_ok = read_vec(row, col_phi, vis.phi);
        vis.d_ok = read_vec(row, col_d, vis.D);
        vis.y_ok = read_vec(row, col_y, vis.Y);
        const std::string& c = cell(row, col_c);
        vis.c_ok = !c.empty();
        if (vis.c_ok) vis.C = std::strtod(c.c_str(), nullptr);
        by_id[id].visits.push_back(std::move(vis));
    }

    if (!demographics_path.empty()) {
        const CsvTable demo = read_csv(demographics_path);
        const int d_id = demo.require_column("subject_id");
        const int d_gender = demo.column("gender");
        const int d_apoe = demo.column("apoe4");
        const int d_age = demo.column("age_baseline");
        const int d_edu = demo.column("education");
        const int d_diag = demo.column("diagnosis");
        std::vector<std::pair<std::string, int>> extra_cols;
        const std::set<std::string> known = {"subject_id", "gender", "apoe4",
                                             "age_baseline", "education", "diagnosis"};
        for (size_t i = 0; i < demo.header.size(); ++i)
            if (!known.count(demo.header[i]))
                extra_cols.emplace_back(demo.header[i], static_cast<int>(i));
        for (const auto& row : demo.rows) {
            auto it = by_id.find(cell(row, d_id));
            if (it == by_id.end()) continue;
            Demographics& d = it->second.demographics;
            if (d_gender >= 0) d.gender = std::atoi(cell(row, d_gender).c_str());
            if (d_apoe >= 0) d.apoe4 = cell(row, d_apoe) == "1";
            if (d_age >= 0 && !cell(row, d_age).empty())
                d.age_baseline = std::strtod(cell(row, d_age).c_str(), nullptr);
            if (d_edu >= 0 && !cell(row, d_edu).empty())
                d.education = std::strtod(cell(row, d_edu).c_str(), nullptr);
            if (d_diag >= 0) it->second.diagnosis = cell(row, d_diag);
            for (const auto& [name, col] : extra_cols)
                if (!cell(row, col).empty()) d.extra[name] = std::atoi(cell(row, col).c_str());
        }
    }

    IngestReport report;
    const double c_max_raw = schema.mmse_raw ? 30.0 : schema.c_task;
    for (const auto& id : id_order) {
        SubjectRecord rec = by_id[id];
        std::string reason;
        for (size_t i = 0; i + 1 < rec.visits.size() && reason.empty(); ++i)
            if (rec.visits[i + 1].year <= rec.visits[i].year) reason = "non-monotone years";
        if (reason.empty()) {
            const Visit* base = rec.visit_at(0);
            if (base == nullptr || !base->x_ok || !base->phi_ok || !base->c_ok)
                reason = "missing baseline row";
        }
        for (auto& vis : rec.visits) {
            if (!reason.empty()) break;
            if (vis.c_ok && (vis.C < 0.0 || vis.C > c_max_raw + 1e-9))
                reason = "cognition out of range at year " + std::to_string(vis.year);
        }
        if (!reason.empty()) {
            report.rejected.emplace_back(id, reason);
            continue;
        }
        if (schema.mmse_raw)
            for (auto& vis : rec.visits)
                if (vis.c_ok) vis.C /= 3.0;
        report.records.push_back(std::move(rec));
    }
    return report;
}

}  // namespace adprog
