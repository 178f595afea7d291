#include "magest/truth.hpp"

#include <cmath>
#include <string>

namespace magest {

namespace {

const BlockPartition& truth_partition()
{
    static const BlockPartition part({0, 1}, {2, 3}, 4);
    return part;
}

const double kShotNoiseStddev = std::sqrt(0.5);

} // namespace

void MeasurementRecord::validate() const
{
    if (outcomes.size() != true_field.size()) {
        throw ContractError("record: outcomes and true_field differ in length");
    }
    if (!(tau > 0.0)) throw ContractError("record: tau must be > 0");
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (!std::isfinite(outcomes[k]) || !std::isfinite(true_field[k])) {
            throw ContractError("record: non-finite value at segment " + std::to_string(k));
        }
    }
}

std::size_t step_count(double duration, double tau, std::size_t cap)
{
    if (!(duration >= 0.0) || !(tau > 0.0)) throw ContractError("duration must be >= 0 and tau > 0");
    const double ratio = duration / tau;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, rounded)) {
        throw ContractError("duration / tau must be an integer number of segments");
    }
    if (rounded > static_cast<double>(cap)) {
        throw ContractError("duration / tau = " + std::to_string(rounded) + " exceeds the step cap of " +
                            std::to_string(cap) + "; raise the cap or tau");
    }
    return static_cast<std::size_t>(rounded);
}

GaussianBelief init_truth() { return GaussianBelief::vacuum(4); }

TruthStep step_truth_with_noise(GaussianBelief state, double field, const PhysicsParams& params,
                                double chi)
{
    if (state.dim() != 4) throw ContractError("step_truth: state must have dimension 4");
    if (!std::isfinite(field)) throw ContractError("step_truth: field must be finite");
    state = affine_transform(std::move(state), interaction_map_4(params),
                             larmor_offset(params, field));
    // After the transform the mean of x_ph already equals kappa sqrt(tau) m_p.
    const double x_meas = state.mean(2) + chi;
    condition_in_place(state, truth_partition(), x_meas);
    return {std::move(state), x_meas};
}

TruthStep step_truth(GaussianBelief state, double field, const PhysicsParams& params, Random& rng)
{
    const double chi = kShotNoiseStddev * rng.normal();
    return step_truth_with_noise(std::move(state), field, params, chi);
}

MeasurementRecord run_truth(const PhysicsParams& params, const OUParams& ou, double duration,
                            std::uint64_t seed, std::size_t cap)
{
    params.validate();
    ou.validate();
    const std::size_t n = step_count(duration, params.tau, cap);
    Random rng(seed);
    MeasurementRecord rec;
    rec.tau = params.tau;
    rec.seed = seed;
    rec.outcomes.reserve(n);
    rec.true_field.reserve(n);

    GaussianBelief state = init_truth();
    double field = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        field = k == 0 ? params.delta_b0 * rng.normal() : ou_step(field, ou, params.tau, rng);
        auto step = step_truth(std::move(state), field, params, rng);
        state = std::move(step.state);
        rec.true_field.push_back(field);
        rec.outcomes.push_back(step.x_meas);
    }
    return rec;
}

MeasurementRecord run_truth(const PhysicsParams& params, std::span<const double> field,
                            std::uint64_t seed)
{
    params.validate();
    Random rng(seed);
    MeasurementRecord rec;
    rec.tau = params.tau;
    rec.seed = seed;
    rec.outcomes.reserve(field.size());
    rec.true_field.assign(field.begin(), field.end());

    GaussianBelief state = init_truth();
    for (double b : field) {
        auto step = step_truth(std::move(state), b, params, rng);
        state = std::move(step.state);
        rec.outcomes.push_back(step.x_meas);
    }
    return rec;
}

} // namespace magest
