/**
 * @file figures.hpp
 * @brief Datasets behind the variance, tracking, lag and hindsight plots.
 *
 * Figure ids:
 *   2  estimator variance vs time for several OU rates, plus the static-field curve
 *   3  one simulated field with its causal estimate, and the fixed-delay error profile
 *   4  delay weights fitted by least squares, pooled over realizations
 *   5  smoothed estimate at the deepest lag against the simulated field
 *   6  variance around the current time: backward (smoother) and forward (OU) branches
 */
#pragma once

#include "magest/io.hpp"
#include "magest/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace magest {

/// OU rates of the variance-vs-time plot; sigma_b = 2 gamma_b (1 pT^2 stationary).
const std::vector<double>& figure2_rates();
/// OU rates of the hindsight plot.
const std::vector<double>& figure6_rates();

struct NamedTable {
    std::string name;  // file stem
    FileHeader header;
    std::vector<std::vector<double>> columns;
};

std::vector<NamedTable> figure_tables(const ScenarioConfig& config, int figure_id);

/// Writes figure<id>_<name>.dat files into dir and returns their paths.
std::vector<std::filesystem::path> write_figure(const ScenarioConfig& config, int figure_id,
                                                const std::filesystem::path& dir);

/// Lag grid shared by the fixed-delay and weighted-delay diagnostics.
struct DelayGrid {
    std::size_t profile_step = 100;    // Error^2(T) sampled every 1 us at tau = 10 ns
    std::size_t profile_points = 101;  // up to 0.1 ms
    std::size_t weight_stride = 500;   // 5 us between weights
    std::size_t weight_max_index = 20; // 0.1 ms reach
};

DelayGrid default_delay_grid(double tau);

} // namespace magest
