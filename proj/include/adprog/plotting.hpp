#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "adprog/csv.hpp"
#include "adprog/svg.hpp"

namespace adprog {

namespace detail {

inline std::vector<double> column_means_by_year(const CsvTable& table, int col,
                                                const std::vector<int>& t_of_row, int t_max) {
    std::vector<double> sum(static_cast<size_t>(t_max) + 1, 0.0);
    std::vector<long> count(static_cast<size_t>(t_max) + 1, 0);
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const int t = t_of_row[r];
        if (t < 0 || t > t_max) continue;
        const std::string& cell = table.rows[r][static_cast<size_t>(col)];
        if (cell.empty()) continue;
        sum[static_cast<size_t>(t)] += std::strtod(cell.c_str(), nullptr);
        ++count[static_cast<size_t>(t)];
    }
    std::vector<double> mean;
    for (size_t t = 0; t < sum.size(); ++t)
        if (count[t] > 0) mean.push_back(sum[t] / static_cast<double>(count[t]));
    return mean;
}

}  // namespace detail

/// Renders cognition.svg, information.svg and activity.svg from a
/// trajectories table: cohort-mean curves per year, one series per region.
inline void plot_trajectories(const std::string& csv_path, const std::string& out_dir) {
    const CsvTable table = read_csv(csv_path);
    const int col_t = table.require_column("t");
    std::vector<int> t_of_row(table.rows.size());
    int t_max = 0;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        t_of_row[r] = std::atoi(table.rows[r][static_cast<size_t>(col_t)].c_str());
        t_max = std::max(t_max, t_of_row[r]);
    }
    std::filesystem::create_directories(out_dir);
    const auto year_axis = [](size_t n) {
        std::vector<double> x(n);
        for (size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
        return x;
    };

    std::vector<Series> cognition;
    {
        const auto pred =
            detail::column_means_by_year(table, table.require_column("C_pred"), t_of_row, t_max);
        cognition.push_back({"predicted", year_axis(pred.size()), pred});
        const int col_true = table.column("C_true");
        if (col_true >= 0) {
            const auto truth = detail::column_means_by_year(table, col_true, t_of_row, t_max);
            if (!truth.empty()) cognition.push_back({"observed", year_axis(truth.size()), truth});
        }
    }
    write_line_chart(out_dir + "/cognition.svg", "Mean cognition trajectory", "year", "cognition",
                     cognition);

    const std::vector<std::tuple<std::string, std::string, std::string>> charts = {
        {"I", "information.svg", "information processing"},
        {"Y", "activity.svg", "activity"}};
    for (const auto& [prefix, file, ylabel] : charts) {
        std::vector<Series> series;
        for (int v = 1;; ++v) {
            const int col = table.column(prefix + "_" + std::to_string(v));
            if (col < 0) break;
            const auto mean = detail::column_means_by_year(table, col, t_of_row, t_max);
            series.push_back({prefix + std::to_string(v), year_axis(mean.size()), mean});
        }
        if (series.empty()) continue;
        write_line_chart(out_dir + "/" + file, "Mean regional " + ylabel + " over time", "year",
                         ylabel, series);
    }
}

}  // namespace adprog
