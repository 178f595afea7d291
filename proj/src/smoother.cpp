#include "magest/smoother.hpp"

#include <cmath>
#include <string>

namespace magest {

void LagConfig::validate() const
{
    if (slot_stride < 1) throw ContractError("lag: slot_stride must be >= 1");
    if (dim() > dim_cap) {
        throw ContractError("lag: augmented dimension " + std::to_string(dim()) + " exceeds cap " +
                            std::to_string(dim_cap));
    }
}

EstimatorLayout smoother_layout(const LagConfig& lag)
{
    return EstimatorLayout::with_history(static_cast<Index>(lag.n_slots));
}

GaussianBelief init_smoother(double delta_b0, const LagConfig& lag)
{
    lag.validate();
    if (!(delta_b0 > 0.0)) throw ContractError("init_smoother: delta_b0 must be > 0");
    auto b = GaussianBelief::vacuum(static_cast<Index>(lag.dim()));
    for (Index i = 0; i <= static_cast<Index>(lag.n_slots); ++i) b.gamma(i, i) = 2.0 * delta_b0 * delta_b0;
    return b;
}

void shift_history(GaussianBelief& state, const LagConfig& lag)
{
    const Index n = static_cast<Index>(lag.n_slots);
    if (n == 0) return;
    const Index dim = state.dim();
    // New coordinate i takes old coordinate src(i): slots move one place back,
    // slot 1 duplicates B_now, the oldest slot is dropped.
    auto src = [n](Index i) { return (i >= 2 && i <= n) ? i - 1 : (i == 1 ? 0 : i); };

    Eigen::MatrixXd g(dim, dim);
    Eigen::VectorXd m(dim);
    for (Index j = 0; j < dim; ++j) {
        m(j) = state.mean(src(j));
        for (Index i = 0; i < dim; ++i) g(i, j) = state.gamma(src(i), src(j));
    }
    state.mean = std::move(m);
    state.gamma = std::move(g);
}

GaussianBelief step_smoother(GaussianBelief state, const PhysicsParams& params, const OUParams& ou,
                             const LagConfig& lag, double x_meas, std::size_t step_index)
{
    const auto layout = smoother_layout(lag);
    if (state.dim() != layout.dim) throw ContractError("step_smoother: state dimension mismatch");
    if (step_index % lag.slot_stride == 0) shift_history(state, lag);
    predict_in_place(state, layout, params, ou);
    update_in_place(state, layout, layout.partition(), x_meas);
    return state;
}

std::size_t slot_delay_steps(std::size_t step_index, std::size_t slot, std::size_t stride)
{
    if (slot == 0) return 0;
    return step_index % stride + 1 + (slot - 1) * stride;
}

bool history_filled(std::size_t step_index, const LagConfig& lag)
{
    // Slot n was copied at step (step_index - step_index % k) - (n - 1) k >= 0.
    if (lag.n_slots == 0) return true;
    const std::size_t last_shift = step_index - step_index % lag.slot_stride;
    return last_shift >= (lag.n_slots - 1) * lag.slot_stride;
}

void run_smoother(const MeasurementRecord& record, const PhysicsParams& params, const OUParams& ou,
                  const LagConfig& lag, const SmootherObserver& observer)
{
    record.validate();
    params.validate();
    ou.validate();
    lag.validate();
    if (std::abs(record.tau - params.tau) > 1e-12 * params.tau) {
        throw ContractError("run_smoother: record tau differs from parameter tau");
    }
    const auto layout = smoother_layout(lag);
    const auto part = layout.partition();
    GaussianBelief state = init_smoother(params.delta_b0, lag);
    for (std::size_t k = 0; k < record.size(); ++k) {
        if (k % lag.slot_stride == 0) shift_history(state, lag);
        predict_in_place(state, layout, params, ou);
        update_in_place(state, layout, part, record.outcomes[k]);
        if (observer) observer(k, state);
    }
}

SmoothedTrace run_smoother(const MeasurementRecord& record, const PhysicsParams& params,
                           const OUParams& ou, const LagConfig& lag, std::size_t emit_every)
{
    if (emit_every == 0) emit_every = lag.slot_stride;
    SmoothedTrace trace;
    trace.tau = params.tau;
    trace.n_slots = lag.n_slots;
    const std::size_t w = lag.n_slots + 1;
    run_smoother(record, params, ou, lag, [&](std::size_t k, const GaussianBelief& s) {
        if ((k + 1) % emit_every != 0) return;
        trace.steps.push_back(k);
        trace.times.push_back(static_cast<double>(k + 1) * params.tau);
        for (std::size_t i = 0; i < w; ++i) {
            const Index idx = static_cast<Index>(i);
            trace.delay.push_back(static_cast<double>(slot_delay_steps(k, i, lag.slot_stride)) * params.tau);
            trace.b_hat.push_back(s.mean(idx));
            trace.b_var.push_back(s.variance(idx));
        }
    });
    return trace;
}

BackwardProfile smoother_variance_profile(const PhysicsParams& params, const OUParams& ou,
                                          const LagConfig& lag, std::size_t n_steps)
{
    params.validate();
    ou.validate();
    lag.validate();
    const auto layout = smoother_layout(lag);
    const auto part = layout.partition();
    GaussianBelief state = init_smoother(params.delta_b0, lag);
    // Stop on the step just before a shift so delays are exact stride multiples.
    const std::size_t k = lag.slot_stride;
    const std::size_t total = std::max<std::size_t>(k, (n_steps + k - 1) / k * k);
    for (std::size_t s = 0; s < total; ++s) {
        if (s % k == 0) shift_history(state, lag);
        predict_in_place(state, layout, params, ou);
        update_in_place(state, layout, part, state.mean(layout.x_ph));
    }
    BackwardProfile out;
    for (std::size_t i = 0; i <= lag.n_slots; ++i) {
        out.delay.push_back(static_cast<double>(i * k) * params.tau);
        out.b_var.push_back(state.variance(static_cast<Index>(i)));
    }
    return out;
}

} // namespace magest
