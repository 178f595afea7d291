#include "magest/figures.hpp"

#include "magest/delay_fit.hpp"
#include "magest/filter.hpp"
#include "magest/smoother.hpp"
#include "magest/truth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace magest {

namespace {

OUParams matched_ou(double gamma_b) { return {gamma_b, 2.0 * gamma_b}; }

std::string rate_label(double gamma_b) { return format_double(gamma_b); }

/// Roughly log-spaced step indices in [0, n).
std::vector<std::size_t> log_indices(std::size_t n, std::size_t points)
{
    std::set<std::size_t> idx;
    if (n == 0) return {};
    const double top = std::log(static_cast<double>(n));
    for (std::size_t p = 0; p < points; ++p) {
        const double v = std::exp(top * static_cast<double>(p) / static_cast<double>(points - 1));
        idx.insert(std::min(n - 1, static_cast<std::size_t>(v) - 1));
    }
    return {idx.begin(), idx.end()};
}

FileHeader base_header(const ScenarioConfig& config, int figure)
{
    FileHeader h = scenario_header(config);
    h.kind = "figure";
    h.set("figure", std::to_string(figure));
    return h;
}

std::vector<NamedTable> figure2(const ScenarioConfig& config)
{
    const std::size_t n = config.steps();
    const double tau = config.physics.tau;
    const auto rows = log_indices(n, 400);

    NamedTable curves{"variance", base_header(config, 2), {}};
    curves.header.columns = {"t", "static"};
    std::vector<double> t, stat;
    for (std::size_t k : rows) {
        const double time = static_cast<double>(k + 1) * tau;
        t.push_back(time);
        stat.push_back(static_variance(config.physics.delta_b0, config.physics.kappa_sq, config.physics.mu, time));
    }
    curves.columns = {t, stat};

    NamedTable steady{"steady", base_header(config, 2), {}};
    steady.header.columns = {"gamma_b", "sigma_b", "steady_variance", "final_b_var", "settle_time"};
    std::vector<double> g, s, sv, fin, settle;

    for (double rate : figure2_rates()) {
        const OUParams ou = matched_ou(rate);
        const auto flow = filter_variance_flow(config.physics, ou, n);
        std::vector<double> col;
        for (std::size_t k : rows) col.push_back(flow[k]);
        curves.header.columns.push_back("gamma_" + rate_label(rate));
        curves.columns.push_back(std::move(col));

        g.push_back(rate);
        s.push_back(ou.sigma_b);
        sv.push_back(steady_variance(config.physics.kappa_sq, config.physics.mu, ou));
        fin.push_back(flow.empty() ? config.physics.delta_b0 * config.physics.delta_b0 : flow.back());
        settle.push_back(static_cast<double>(settle_index(flow, 0.01)) * tau);
    }
    steady.columns = {g, s, sv, fin, settle};
    return {curves, steady};
}

struct SimulatedRun {
    MeasurementRecord record;
    EstimateTrace trace;
};

SimulatedRun simulate(const ScenarioConfig& config, std::size_t realization)
{
    SimulatedRun run;
    run.record = run_truth(config.physics, config.ou, config.duration,
                           realization_seed(config.seed, realization), config.step_cap);
    run.trace = run_filter(run.record, config.physics, config.model_ou());
    return run;
}

std::size_t transient_steps(const ScenarioConfig& config)
{
    return settle_index(filter_variance_flow(config.physics, config.model_ou(), config.steps()), 0.01);
}

std::vector<NamedTable> figure3(const ScenarioConfig& config)
{
    const auto run = simulate(config, 0);
    const std::size_t n = run.record.size();
    const double tau = config.physics.tau;
    const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1e-7 / tau)));

    NamedTable series{"series", base_header(config, 3), {}};
    series.header.columns = {"t", "B_true", "b_hat", "b_var"};
    std::vector<double> t, b, m, v;
    for (std::size_t k = 0; k + 1 < n; k += every) {
        t.push_back(run.trace.times[k]);
        b.push_back(run.record.true_field[k + 1]);
        m.push_back(run.trace.b_hat[k]);
        v.push_back(run.trace.b_var[k]);
    }
    series.columns = {t, b, m, v};

    const DelayGrid grid = default_delay_grid(tau);
    const std::size_t skip = transient_steps(config);
    std::vector<std::size_t> delays;
    for (std::size_t i = 0; i < grid.profile_points; ++i) delays.push_back(i * grid.profile_step);
    const auto profile = lag_error_profile(run.trace.b_hat, run.record.true_field, tau, delays, skip);

    DelayRegression reg(grid.weight_max_index, grid.weight_stride, tau);
    reg.add(run.trace.b_hat, run.record.true_field, skip);
    const auto fit = reg.solve();

    NamedTable inset{"inset", base_header(config, 3), {}};
    inset.header.set("skip_steps", std::to_string(skip));
    inset.header.set("weighted_error_sq", fit.error_sq);
    inset.header.set("optimal_delay", profile.delay[profile.argmin()]);
    inset.header.columns = {"delay", "error_sq"};
    inset.columns = {profile.delay, profile.error_sq};
    return {series, inset};
}

std::vector<NamedTable> figure4(const ScenarioConfig& config)
{
    const double tau = config.physics.tau;
    const DelayGrid grid = default_delay_grid(tau);
    const std::size_t skip = transient_steps(config);
    DelayRegression reg(grid.weight_max_index, grid.weight_stride, tau);
    for (std::size_t r = 0; r < config.realizations; ++r) {
        const auto run = simulate(config, r);
        reg.add(run.trace.b_hat, run.record.true_field, skip);
    }
    const auto fit = reg.solve();
    NamedTable w{"weights", base_header(config, 4), {}};
    w.header.set("fit_error_sq", fit.error_sq);
    w.header.set("collinear", fit.collinear ? "true" : "false");
    w.header.columns = {"delay", "weight"};
    w.columns = {fit.delay, fit.weights};
    return {w};
}

std::vector<NamedTable> figure5(const ScenarioConfig& config)
{
    const auto run = simulate(config, 0);
    const auto& lag = config.lag;
    const auto sm = run_smoother(run.record, config.physics, config.model_ou(), lag);
    const double tau = config.physics.tau;

    NamedTable out{"series", base_header(config, 5), {}};
    out.header.set("delay", static_cast<double>(lag.span_steps()) * tau);
    out.header.columns = {"t", "B_true", "b_hat_smoothed", "b_var_smoothed", "b_hat_filter"};
    std::vector<double> t, b, ms, vs, mf;
    const std::size_t deepest = lag.n_slots;
    for (std::size_t r = 0; r < sm.rows(); ++r) {
        const std::size_t k = sm.steps[r];
        if (!history_filled(k, lag)) continue;
        const std::size_t d = slot_delay_steps(k, deepest, lag.slot_stride);
        const std::size_t j = k + 1 - d;  // truth index of the smoothed value
        t.push_back(static_cast<double>(j) * tau);
        b.push_back(run.record.true_field[j]);
        ms.push_back(sm.b_hat_at(r, deepest));
        vs.push_back(sm.b_var_at(r, deepest));
        mf.push_back(j >= 1 ? run.trace.b_hat[j - 1] : 0.0);
    }
    out.columns = {t, b, ms, vs, mf};
    return {out};
}

std::vector<NamedTable> figure6(const ScenarioConfig& config)
{
    const std::size_t n = config.steps();
    NamedTable out{"variance", base_header(config, 6), {}};
    out.header.columns = {"gamma_b", "branch", "t_rel", "variance", "relative"};
    std::vector<double> g, br, t, v, rel;
    auto row = [&](double rate, double branch, double time, double var, double now) {
        g.push_back(rate);
        br.push_back(branch);
        t.push_back(time);
        v.push_back(var);
        rel.push_back(var / now);
    };
    for (double rate : figure6_rates()) {
        const OUParams ou = matched_ou(rate);
        const auto back = smoother_variance_profile(config.physics, ou, config.lag, n);
        const double now = back.b_var.front();
        // branch -1: smoothed past values, +1: OU extrapolation into the future
        for (std::size_t i = back.delay.size(); i-- > 0;) row(rate, -1.0, -back.delay[i], back.b_var[i], now);
        for (std::size_t i = 0; i < back.delay.size(); ++i) {
            row(rate, 1.0, back.delay[i], ou_extrapolate(0.0, now, ou, back.delay[i]).variance, now);
        }
    }
    out.columns = {g, br, t, v, rel};
    return {out};
}

} // namespace

const std::vector<double>& figure2_rates()
{
    static const std::vector<double> rates{1e5, 1e4, 1e3, 1e2, 1e1};
    return rates;
}

const std::vector<double>& figure6_rates()
{
    static const std::vector<double> rates{1e4, 1e3, 1e2, 1e1};
    return rates;
}

DelayGrid default_delay_grid(double tau)
{
    auto steps = [tau](double seconds) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds / tau)));
    };
    DelayGrid g;
    g.profile_step = steps(1e-6);
    g.profile_points = 101;
    g.weight_stride = steps(5e-6);
    g.weight_max_index = 20;
    return g;
}

std::vector<NamedTable> figure_tables(const ScenarioConfig& config, int figure_id)
{
    config.validate();
    switch (figure_id) {
    case 2: return figure2(config);
    case 3: return figure3(config);
    case 4: return figure4(config);
    case 5: return figure5(config);
    case 6: return figure6(config);
    default: throw ContractError("unknown figure id " + std::to_string(figure_id) + " (expected 2..6)");
    }
}

std::vector<std::filesystem::path> write_figure(const ScenarioConfig& config, int figure_id,
                                                const std::filesystem::path& dir)
{
    const auto tables = figure_tables(config, figure_id);
    std::vector<std::filesystem::path> paths;
    for (const auto& t : tables) {
        auto path = dir / ("figure" + std::to_string(figure_id) + "_" + t.name + ".dat");
        write_table_file(path, t.header, t.columns);
        paths.push_back(std::move(path));
    }
    return paths;
}

} // namespace magest
