/**
 * @file truth.hpp
 * @brief Simulation of the probed atoms under a known field trajectory.
 *
 * This is the omniscient view: the field B(t) acting on the atoms is known,
 * and the atom+light Gaussian state generates the photodetection record that
 * the estimators consume.
 */
#pragma once

#include "magest/gaussian.hpp"
#include "magest/physics.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace magest {

/// Default per-realization step cap.
inline constexpr std::size_t kDefaultStepCap = 100'000'000;

struct MeasurementRecord {
    double tau = 0.0;
    std::vector<double> outcomes;    // x_meas per light segment
    std::vector<double> true_field;  // B at segment start (pT), hidden from estimators
    std::uint64_t seed = 0;

    std::size_t size() const { return outcomes.size(); }
    /// Start time of segment k.
    double time(std::size_t k) const { return static_cast<double>(k) * tau; }
    void validate() const;
};

/// Number of segments for a duration; requires duration / tau to be integral.
std::size_t step_count(double duration, double tau, std::size_t cap = kDefaultStepCap);

/// mean 0, gamma = 1 on (x_at, p_at, x_ph, p_ph).
GaussianBelief init_truth();

struct TruthStep {
    GaussianBelief state;
    double x_meas;
};

/// One segment with the shot-noise draw chi ~ N(0, 1/2) taken from rng.
TruthStep step_truth(GaussianBelief state, double field, const PhysicsParams& params, Random& rng);

/// One segment with an explicit shot-noise value chi.
TruthStep step_truth_with_noise(GaussianBelief state, double field, const PhysicsParams& params,
                                double chi);

/**
 * Simulates an OU field and the resulting record. The initial field is drawn
 * from the estimators' prior N(0, delta_b0^2). Draw order per segment: the OU
 * increment (segments k >= 1), then chi.
 */
MeasurementRecord run_truth(const PhysicsParams& params, const OUParams& ou, double duration,
                            std::uint64_t seed, std::size_t cap = kDefaultStepCap);

/// Same with an explicitly supplied field, one value per segment.
MeasurementRecord run_truth(const PhysicsParams& params, std::span<const double> field,
                            std::uint64_t seed);

} // namespace magest
