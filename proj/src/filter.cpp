#include "magest/filter.hpp"

#include <cmath>

namespace magest {

EstimatorLayout EstimatorLayout::with_history(Index history)
{
    if (history < 0) throw ContractError("history length must be >= 0");
    return {0, history + 1, history + 2, history + 3, history + 4, history + 5};
}

BlockPartition EstimatorLayout::partition() const
{
    return BlockPartition::complement_of({x_ph, p_ph}, dim);
}

std::array<Shear, 3> interaction_shears(const EstimatorLayout& l, const PhysicsParams& params)
{
    const double k = params.kappa_sqrt_tau();
    // x_ph reads p_at before the Larmor shift moves it.
    return {{{l.x_ph, l.p_at, k}, {l.p_at, l.field, -params.mu * params.tau}, {l.x_at, l.p_ph, k}}};
}

void predict_in_place(GaussianBelief& belief, const EstimatorLayout& layout,
                      const PhysicsParams& params, const OUParams& ou)
{
    if (belief.dim() != layout.dim) throw ContractError("predict: belief dimension mismatch");
    const auto shears = interaction_shears(layout, params);
    apply_shears(belief, shears);
    const double damping = 1.0 - ou.gamma_b * params.tau;
    if (damping <= 0.0) throw ContractError("predict: gamma_b * tau >= 1");
    scale_coordinate(belief, layout.field, damping);
    add_variance(belief, layout.field, ou_gamma_diffusion(ou, params.tau));
}

void update_in_place(GaussianBelief& belief, const EstimatorLayout& layout,
                     const BlockPartition& part, double x_meas)
{
    if (belief.dim() != layout.dim) throw ContractError("update: belief dimension mismatch");
    condition_in_place(belief, part, x_meas);
}

GaussianBelief init_filter(double delta_b0)
{
    if (!(delta_b0 > 0.0)) throw ContractError("init_filter: delta_b0 must be > 0");
    auto b = GaussianBelief::vacuum(5);
    b.gamma(0, 0) = 2.0 * delta_b0 * delta_b0;
    return b;
}

GaussianBelief predict(GaussianBelief belief, const PhysicsParams& params, const OUParams& ou)
{
    predict_in_place(belief, EstimatorLayout::plain(), params, ou);
    return belief;
}

GaussianBelief update(GaussianBelief belief, double x_meas)
{
    static const BlockPartition part = EstimatorLayout::plain().partition();
    update_in_place(belief, EstimatorLayout::plain(), part, x_meas);
    return belief;
}

EstimateTrace run_filter(const MeasurementRecord& record, const PhysicsParams& params,
                         const OUParams& ou)
{
    record.validate();
    params.validate();
    ou.validate();
    if (std::abs(record.tau - params.tau) > 1e-12 * params.tau) {
        throw ContractError("run_filter: record tau differs from parameter tau");
    }
    const auto layout = EstimatorLayout::plain();
    const auto part = layout.partition();
    const std::size_t n = record.size();

    EstimateTrace trace;
    trace.tau = params.tau;
    trace.times.reserve(n);
    trace.b_hat.reserve(n);
    trace.b_var.reserve(n);

    GaussianBelief belief = init_filter(params.delta_b0);
    for (std::size_t k = 0; k < n; ++k) {
        predict_in_place(belief, layout, params, ou);
        update_in_place(belief, layout, part, record.outcomes[k]);
        trace.times.push_back(static_cast<double>(k + 1) * params.tau);
        trace.b_hat.push_back(belief.mean(layout.field));
        trace.b_var.push_back(belief.variance(layout.field));
    }
    return trace;
}

std::vector<double> filter_variance_flow(const PhysicsParams& params, const OUParams& ou,
                                         std::size_t n_steps)
{
    params.validate();
    ou.validate();
    const auto layout = EstimatorLayout::plain();
    const auto part = layout.partition();
    std::vector<double> out;
    out.reserve(n_steps);
    GaussianBelief belief = init_filter(params.delta_b0);
    for (std::size_t k = 0; k < n_steps; ++k) {
        predict_in_place(belief, layout, params, ou);
        update_in_place(belief, layout, part, belief.mean(layout.x_ph));
        out.push_back(belief.variance(layout.field));
    }
    return out;
}

double static_variance(double delta_b0, double kappa_sq, double mu, double t)
{
    if (!(t >= 0.0)) throw ContractError("static_variance: t must be >= 0");
    const double d2 = delta_b0 * delta_b0;
    const double kt = kappa_sq * t;
    const double t3 = t * t * t;
    const double denom = 1.0 + kt + (2.0 / 3.0) * kappa_sq * mu * mu * d2 * t3 +
        (1.0 / 6.0) * kappa_sq * kappa_sq * mu * mu * d2 * t3 * t;
    return d2 * (1.0 + kt) / denom;
}

double static_variance_asymptote(double kappa_sq, double mu, double t)
{
    return 6.0 / (kappa_sq * mu * mu * t * t * t);
}

double steady_variance(double kappa_sq, double mu, const OUParams& ou)
{
    if (!(kappa_sq > 0.0) || !(mu > 0.0)) throw ContractError("steady_variance: kappa_sq, mu must be > 0");
    ou.validate();
    const double g = ou.gamma_b;
    const double drive = 2.0 * mu * std::sqrt(kappa_sq) * std::sqrt(2.0 * ou.sigma_b);
    const double r = std::sqrt(g * g + drive);
    const double r_minus_g = drive / (r + g); // r - g without cancellation
    if (r == 0.0) return 0.0;
    return r_minus_g * r_minus_g * r / (4.0 * kappa_sq * mu * mu);
}

FixedPointResult steady_variance_fixed_point(const PhysicsParams& params, const OUParams& ou,
                                             double tolerance, std::size_t max_iterations)
{
    params.validate();
    ou.validate();
    const auto layout = EstimatorLayout::plain();
    const auto part = layout.partition();
    GaussianBelief belief = init_filter(params.delta_b0);

    auto block = [&](const GaussianBelief& b) {
        return std::array<double, 3>{b.gamma(layout.field, layout.field),
                                     b.gamma(layout.field, layout.p_at),
                                     b.gamma(layout.p_at, layout.p_at)};
    };
    constexpr std::size_t kCheckEvery = 1000;
    auto last = block(belief);
    FixedPointResult res;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        predict_in_place(belief, layout, params, ou);
        update_in_place(belief, layout, part, belief.mean(layout.x_ph));
        if (it % kCheckEvery != 0) continue;
        const auto now = block(belief);
        double change = 0.0;
        for (std::size_t i = 0; i < now.size(); ++i) {
            const double scale = std::max(std::abs(now[i]), std::abs(now[0]));
            change = std::max(change, std::abs(now[i] - last[i]) / scale);
        }
        last = now;
        res.iterations = it;
        res.b_var = belief.variance(layout.field);
        if (change < tolerance) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

std::size_t settle_index(const std::vector<double>& series, double rel_tol)
{
    if (series.empty()) return 0;
    const double target = series.back();
    std::size_t idx = series.size();
    while (idx > 0 && std::abs(series[idx - 1] - target) <= rel_tol * std::abs(target)) --idx;
    return idx;
}

} // namespace magest
