/**
 * @file delay_fit.hpp
 * @brief Simulation-only scoring of estimates against the hidden true field.
 *
 * Everything here needs the true field trajectory and therefore only makes
 * sense on simulated records. Index convention: trace entry k estimates the
 * field at time (k+1) tau, which is true_field[k + 1].
 */
#pragma once

#include "magest/filter.hpp"
#include "magest/smoother.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace magest {

struct LagErrorProfile {
    std::vector<std::size_t> delay_steps;
    std::vector<double> delay;    // s
    std::vector<double> error_sq; // pT^2
    std::size_t samples = 0;      // common averaging window length

    /// Index of the smallest error.
    std::size_t argmin() const;
};

/**
 * Error^2(T) = mean_k (b_hat[k] - B((k+1) tau - T))^2 over a window shared by
 * all delays. Trace entries before `skip` (the filter transient) are excluded.
 */
LagErrorProfile lag_error_profile(std::span<const double> b_hat, std::span<const double> truth,
                                  double tau, std::span<const std::size_t> delay_steps,
                                  std::size_t skip = 0);

struct DelayWeights {
    std::vector<std::size_t> delay_steps;  // i * stride
    std::vector<double> delay;             // s
    std::vector<double> weights;           // a_i
    double error_sq = 0.0;                 // mean squared residual of the fit
    std::size_t samples = 0;
    bool collinear = false;                // normal matrix was numerically singular
};

/**
 * Accumulates the normal equations of
 *   min_a sum_t ( sum_i a_i b_hat(t + i dt) - B(t) )^2,   i = 0..K,
 * i.e. the field at t is explained by estimates made up to K dt later.
 * Several records can be pooled before solving.
 */
class DelayRegression {
public:
    DelayRegression(std::size_t max_index, std::size_t stride, double tau);

    void add(std::span<const double> b_hat, std::span<const double> truth, std::size_t skip = 0);
    /// Pools the sums of another accumulator with the same grid.
    void merge(const DelayRegression& other);

    DelayWeights solve() const;
    /// Mean squared residual for arbitrary weights on the accumulated data.
    double error_sq(const std::vector<double>& weights) const;

    std::size_t samples() const { return samples_; }
    std::size_t terms() const { return max_index_ + 1; }

private:
    std::size_t max_index_;
    std::size_t stride_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd cross_;
    double target_sq_ = 0.0;
    std::size_t samples_ = 0;
    double tau_;
};

/// Fit on a single record. Requires K + 1 <= samples / 10.
DelayWeights fit_delay_weights(const EstimateTrace& trace, std::span<const double> truth,
                               std::size_t max_index, std::size_t stride, std::size_t skip = 0);

/// out[j] = sum_i a_i b_hat[j + i stride]; the trailing K stride entries are trimmed.
std::vector<double> apply_delay_weights(std::span<const double> b_hat, std::span<const double> weights,
                                        std::size_t stride);

struct SlotScore {
    std::vector<double> delay;      // s, slot 0 first
    std::vector<double> error_sq;   // mean squared error vs truth
    std::vector<double> mean_var;   // mean reported variance
    std::size_t samples = 0;
};

/**
 * Scores every slot of a smoothed trace against the truth. Rows before the
 * history is fully populated, or before step `skip`, are ignored.
 */
SlotScore score_smoothed(const SmoothedTrace& trace, std::span<const double> truth,
                         const LagConfig& lag, std::size_t skip = 0);

} // namespace magest
