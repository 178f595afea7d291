/**
 * @file filter.hpp
 * @brief Causal estimator of the field from the photodetection record alone.
 *
 * The estimator tracks a joint Gaussian over (B, x_at, p_at, x_ph, p_ph).
 * Each light segment is one predict (Larmor + atom-light interaction, then
 * OU damping and diffusion of B) followed by one update on the measured x_ph.
 * Trace entries are emitted after the update; entry k refers to time (k+1) tau.
 */
#pragma once

#include "magest/gaussian.hpp"
#include "magest/physics.hpp"
#include "magest/truth.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace magest {

/// Where the field and the atom/light quadratures live inside a belief.
struct EstimatorLayout {
    Index field = 0;
    Index x_at = 1;
    Index p_at = 2;
    Index x_ph = 3;
    Index p_ph = 4;
    Index dim = 5;

    /// Layout of the plain 5-variable estimator.
    static EstimatorLayout plain() { return {}; }
    /// Field first, then `history` stored past values, then the atoms and light.
    static EstimatorLayout with_history(Index history);

    BlockPartition partition() const;
};

/// The interaction map on a layout, as an ordered shear sequence.
std::array<Shear, 3> interaction_shears(const EstimatorLayout& layout, const PhysicsParams& params);

/// In-place predict on any layout; history coordinates are left untouched.
void predict_in_place(GaussianBelief& belief, const EstimatorLayout& layout,
                      const PhysicsParams& params, const OUParams& ou);
/// In-place update on x_ph with innovation x_meas - mean(x_ph).
void update_in_place(GaussianBelief& belief, const EstimatorLayout& layout,
                     const BlockPartition& part, double x_meas);

/// mean 0, gamma = diag(2 delta_b0^2, 1, 1, 1, 1).
GaussianBelief init_filter(double delta_b0);
GaussianBelief predict(GaussianBelief belief, const PhysicsParams& params, const OUParams& ou);
GaussianBelief update(GaussianBelief belief, double x_meas);

struct EstimateTrace {
    double tau = 0.0;
    std::vector<double> times;  // s
    std::vector<double> b_hat;  // pT
    std::vector<double> b_var;  // pT^2

    std::size_t size() const { return b_hat.size(); }
};

/// `ou` is the estimator's model; it may differ from the one that made the record.
EstimateTrace run_filter(const MeasurementRecord& record, const PhysicsParams& params,
                         const OUParams& ou);

/// b_var for n steps. Independent of outcomes, so no record is needed.
std::vector<double> filter_variance_flow(const PhysicsParams& params, const OUParams& ou,
                                         std::size_t n_steps);

/// Posterior variance for a static field after probing for time t.
double static_variance(double delta_b0, double kappa_sq, double mu, double t);
/// Long-time limit 6 / (kappa^2 mu^2 t^3) of static_variance.
double static_variance_asymptote(double kappa_sq, double mu, double t);

/**
 * Stationary variance of the field estimate,
 *   (r - g)^2 r / (4 kappa^2 mu^2),  r = sqrt(g^2 + 2 mu kappa sqrt(s)),
 * with g = gamma_b and s = 2 sigma_b the field diffusion rate in the doubled
 * covariance convention (the rate the estimator's gamma_11 receives).
 */
double steady_variance(double kappa_sq, double mu, const OUParams& ou);

struct FixedPointResult {
    double b_var = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Iterates the one-step covariance map until the (B, p_at) block stops moving.
FixedPointResult steady_variance_fixed_point(const PhysicsParams& params, const OUParams& ou,
                                             double tolerance = 1e-12,
                                             std::size_t max_iterations = 200'000'000);

/// First index after which series stays within rel_tol of its last value.
std::size_t settle_index(const std::vector<double>& series, double rel_tol = 0.01);

} // namespace magest
