/**
 * @file scenario.hpp
 * @brief Scenario configuration, seeded ensembles and the calibration report.
 */
#pragma once

#include "magest/io.hpp"
#include "magest/physics.hpp"
#include "magest/smoother.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magest {

struct ScenarioConfig {
    PhysicsParams physics = [] {
        PhysicsParams p = table1_params();
        p.constituents = table1_constituents();
        return p;
    }();
    OUParams ou;
    /// Model assumed by the estimators; equals `ou` unless deliberately mismatched.
    std::optional<OUParams> estimator_ou;
    double duration = 1e-3;
    std::size_t realizations = 1;
    LagConfig lag;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::size_t step_cap = kDefaultStepCap;
    std::size_t threads = 0;  // 0 = hardware concurrency

    OUParams model_ou() const { return estimator_ou.value_or(ou); }
    std::size_t steps() const { return step_count(duration, physics.tau, step_cap); }
    void validate() const;
};

/// Known configuration keys, in header order.
const std::vector<std::string>& config_keys();

/**
 * Applies "key: value" / "key = value" lines. A leading '#' is allowed, so a
 * data file header can be fed back as a configuration; unknown keys are
 * rejected on uncommented lines and ignored on commented ones.
 */
void apply_config_text(ScenarioConfig& config, std::string_view text);
void apply_config_value(ScenarioConfig& config, std::string_view key, std::string_view value);
ScenarioConfig load_config(const std::string& path);

/// Complete parameter set, including the master seed, as header entries.
FileHeader scenario_header(const ScenarioConfig& config);

/// Seed of realization i: master_seed + i.
inline std::uint64_t realization_seed(std::uint64_t master, std::size_t index) { return master + index; }

/// Runs fn(i) for i in [0, count) on a pool of worker threads.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct CalibrationLine {
    std::string label;
    double delay = 0.0;      // s
    double mse = 0.0;        // mean squared error vs truth
    double mean_var = 0.0;   // mean reported variance
    double ratio = 0.0;      // mse / mean_var
    double ci_low = 0.0;     // 95% interval of the ratio over realizations
    double ci_high = 0.0;
    bool within_band = false; // ratio in [0.9, 1.1]
};

struct CalibrationReport {
    std::size_t realizations = 0;
    std::size_t skip_steps = 0;  // transient excluded from scoring
    std::vector<CalibrationLine> lines;  // filter first, then smoother slots
};

inline constexpr double kCalibrationBandLow = 0.9;
inline constexpr double kCalibrationBandHigh = 1.1;

/// Requires >= 100 realizations. Smoother slots are scored when lag.n_slots > 0.
CalibrationReport run_calibration(const ScenarioConfig& config);

} // namespace magest
