/**
 * @file smoother.hpp
 * @brief Fixed-lag smoothing by augmenting the estimator with past field values.
 *
 * State ordering: (B_now, B_1, ..., B_n, x_at, p_at, x_ph, p_ph), where slot i
 * holds the field at an earlier time. Every `slot_stride` steps the history is
 * pushed one slot into the past and slot 1 becomes a copy of B_now. Slots do
 * not take part in the OU dynamics; the measurement updates them through their
 * correlations with the atoms.
 *
 * Truth-dependent scoring tools live in delay_fit.hpp.
 */
#pragma once

#include "magest/filter.hpp"
#include "magest/gaussian.hpp"
#include "magest/physics.hpp"
#include "magest/truth.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace magest {

struct LagConfig {
    std::size_t n_slots = 50;
    std::size_t slot_stride = 200;
    std::size_t dim_cap = 128;

    std::size_t dim() const { return 5 + n_slots; }
    /// Lag covered by the deepest slot, in steps.
    std::size_t span_steps() const { return n_slots * slot_stride; }
    void validate() const;
};

EstimatorLayout smoother_layout(const LagConfig& lag);

/// History slots start at the prior: mean 0, gamma 2 delta_b0^2, uncorrelated.
GaussianBelief init_smoother(double delta_b0, const LagConfig& lag);

/// Push history one slot into the past and copy B_now into slot 1.
void shift_history(GaussianBelief& state, const LagConfig& lag);

/// One segment: shift (when step_index is a stride multiple), predict, update.
GaussianBelief step_smoother(GaussianBelief state, const PhysicsParams& params, const OUParams& ou,
                             const LagConfig& lag, double x_meas, std::size_t step_index);

/**
 * Steps since slot `slot` (0 = B_now) was copied from B_now, measured at the
 * emission after step `step_index`. Slot 0 refers to time (step_index+1) tau.
 */
std::size_t slot_delay_steps(std::size_t step_index, std::size_t slot, std::size_t stride);

/// Whether every slot holds a copied value (not the initial prior) after step_index.
bool history_filled(std::size_t step_index, const LagConfig& lag);

struct SmoothedTrace {
    double tau = 0.0;
    std::size_t n_slots = 0;
    std::vector<std::size_t> steps;  // step index of each emission
    std::vector<double> times;       // (step + 1) tau
    // Row-major, (n_slots + 1) entries per emission; column 0 is B_now.
    std::vector<double> delay;
    std::vector<double> b_hat;
    std::vector<double> b_var;

    std::size_t rows() const { return steps.size(); }
    std::size_t width() const { return n_slots + 1; }
    double delay_at(std::size_t row, std::size_t slot) const { return delay[row * width() + slot]; }
    double b_hat_at(std::size_t row, std::size_t slot) const { return b_hat[row * width() + slot]; }
    double b_var_at(std::size_t row, std::size_t slot) const { return b_var[row * width() + slot]; }
};

using SmootherObserver = std::function<void(std::size_t step_index, const GaussianBelief& state)>;

/// Runs the smoother, calling observer after each step's update.
void run_smoother(const MeasurementRecord& record, const PhysicsParams& params, const OUParams& ou,
                  const LagConfig& lag, const SmootherObserver& observer);

/// Emits a row after every step with (step + 1) % emit_every == 0. emit_every = 0 -> slot_stride.
SmoothedTrace run_smoother(const MeasurementRecord& record, const PhysicsParams& params,
                           const OUParams& ou, const LagConfig& lag, std::size_t emit_every = 0);

struct BackwardProfile {
    std::vector<double> delay;  // s, slot 0 first
    std::vector<double> b_var;  // pT^2
};

/**
 * Slot variances at steady state from the deterministic covariance flow, read
 * at the emission just before a shift so slot i sits at delay i * stride * tau.
 */
BackwardProfile smoother_variance_profile(const PhysicsParams& params, const OUParams& ou,
                                          const LagConfig& lag, std::size_t n_steps);

} // namespace magest
