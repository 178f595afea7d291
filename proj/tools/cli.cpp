#include "cli.hpp"

#include "magest/delay_fit.hpp"
#include "magest/figures.hpp"
#include "magest/filter.hpp"
#include "magest/io.hpp"
#include "magest/scenario.hpp"
#include "magest/smoother.hpp"
#include "magest/truth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace magest {

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<double> gamma_b;
    std::optional<double> sigma_b;
    std::optional<double> estimator_gamma_b;
    std::optional<double> estimator_sigma_b;
    std::optional<double> duration;
    std::optional<std::size_t> realizations;
    std::optional<std::size_t> lag_slots;
    std::optional<std::size_t> lag_stride;
    std::optional<std::size_t> step_cap;
    std::optional<std::size_t> threads;
    std::string out = ".";

    std::string record;
    int figure = 0;
    std::size_t emit_every = 0;
    bool diagnostics = false;
    bool fixed_point = false;
};

// flags > file > defaults
ScenarioConfig build_config(const Flags& f)
{
    ScenarioConfig c = f.config ? load_config(*f.config) : ScenarioConfig{};
    if (f.seed) c.seed = *f.seed;
    if (f.tau) c.physics.tau = *f.tau;
    if (f.gamma_b) c.ou.gamma_b = *f.gamma_b;
    if (f.sigma_b) c.ou.sigma_b = *f.sigma_b;
    if (f.estimator_gamma_b || f.estimator_sigma_b) {
        OUParams e = c.model_ou();
        if (f.estimator_gamma_b) e.gamma_b = *f.estimator_gamma_b;
        if (f.estimator_sigma_b) e.sigma_b = *f.estimator_sigma_b;
        c.estimator_ou = e;
    }
    if (f.duration) c.duration = *f.duration;
    if (f.realizations) c.realizations = *f.realizations;
    if (f.lag_slots) c.lag.n_slots = *f.lag_slots;
    if (f.lag_stride) c.lag.slot_stride = *f.lag_stride;
    if (f.step_cap) c.step_cap = *f.step_cap;
    if (f.threads) c.threads = *f.threads;
    c.out_dir = f.out;
    c.validate();
    return c;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string index_name(const char* stem, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04zu.dat", stem, i);
    return buf;
}

MeasurementRecord load_matching_record(const ScenarioConfig& c, const std::string& path)
{
    if (path.empty()) throw ContractError("--record is required");
    auto loaded = read_record(path);
    if (loaded.record.tau != c.physics.tau) {
        throw ContractError("record tau " + format_double(loaded.record.tau) + " differs from configured tau " +
                            format_double(c.physics.tau));
    }
    return std::move(loaded.record);
}

FileHeader record_header(const ScenarioConfig& c, const MeasurementRecord& rec, const std::string& path)
{
    FileHeader h = scenario_header(c);
    h.set("realization_seed", std::to_string(rec.seed));
    h.set("record", fs::path(path).filename().string());
    return h;
}

int cmd_simulate(const ScenarioConfig& c, std::ostream& out)
{
    ensure_dir(c.out_dir);
    const std::size_t n = c.realizations;
    std::vector<std::string> paths(n);
    parallel_for(n, c.threads, [&](std::size_t i) {
        const auto rec = run_truth(c.physics, c.ou, c.duration, realization_seed(c.seed, i), c.step_cap);
        FileHeader h = scenario_header(c);
        h.set("realization", std::to_string(i));
        const fs::path p = fs::path(c.out_dir) / index_name("record", i);
        write_record(p, rec, h);
        paths[i] = p.string();
    });
    for (std::size_t i = 0; i < n; ++i) {
        out << "realization " << i << " seed " << realization_seed(c.seed, i) << " -> " << paths[i] << '\n';
    }
    return kExitOk;
}

int cmd_filter(const ScenarioConfig& c, const Flags& f, std::ostream& out)
{
    const auto rec = load_matching_record(c, f.record);
    ensure_dir(c.out_dir);
    const auto trace = run_filter(rec, c.physics, c.model_ou());
    const fs::path p = fs::path(c.out_dir) / (fs::path(f.record).stem().string() + ".trace.dat");
    write_trace(p, trace, record_header(c, rec, f.record));
    out << p.string() << '\n';
    return kExitOk;
}

int cmd_smooth(const ScenarioConfig& c, const Flags& f, std::ostream& out)
{
    const auto rec = load_matching_record(c, f.record);
    ensure_dir(c.out_dir);
    const std::string stem = fs::path(f.record).stem().string();
    const FileHeader header = record_header(c, rec, f.record);

    const auto sm = run_smoother(rec, c.physics, c.model_ou(), c.lag, f.emit_every);
    FileHeader sh = header;
    sh.set("emit_every", std::to_string(f.emit_every == 0 ? c.lag.slot_stride : f.emit_every));
    const fs::path p = fs::path(c.out_dir) / (stem + ".smoothed.dat");
    write_smoothed(p, sm, sh);
    out << p.string() << '\n';

    if (f.diagnostics) {
        const auto trace = run_filter(rec, c.physics, c.model_ou());
        const std::size_t skip = settle_index(filter_variance_flow(c.physics, c.model_ou(), rec.size()), 0.01);
        const DelayGrid grid = default_delay_grid(c.physics.tau);

        std::vector<std::size_t> delays;
        for (std::size_t i = 0; i < grid.profile_points; ++i) delays.push_back(i * grid.profile_step);
        const auto profile = lag_error_profile(trace.b_hat, rec.true_field, c.physics.tau, delays, skip);
        FileHeader ph = header;
        ph.kind = "lag_profile";
        ph.set("skip_steps", std::to_string(skip));
        ph.set("samples", std::to_string(profile.samples));
        ph.set("optimal_delay", profile.delay[profile.argmin()]);
        ph.columns = {"delay", "error_sq"};
        const fs::path pp = fs::path(c.out_dir) / (stem + ".lag_profile.dat");
        write_table_file(pp, ph, {profile.delay, profile.error_sq});
        out << pp.string() << '\n';

        const auto weights = fit_delay_weights(trace, rec.true_field, grid.weight_max_index, grid.weight_stride, skip);
        const fs::path wp = fs::path(c.out_dir) / (stem + ".weights.dat");
        write_weights(wp, weights, header);
        out << wp.string() << '\n';
    }
    return kExitOk;
}

int cmd_figure(const ScenarioConfig& c, const Flags& f, std::ostream& out)
{
    if (f.figure < 2 || f.figure > 6) {
        throw ContractError("unknown figure id " + std::to_string(f.figure) + " (expected 2..6)");
    }
    ensure_dir(c.out_dir);
    for (const auto& p : write_figure(c, f.figure, c.out_dir)) out << p.string() << '\n';
    return kExitOk;
}

int cmd_calibrate(const ScenarioConfig& c, std::ostream& out)
{
    const auto report = run_calibration(c);
    ensure_dir(c.out_dir);

    FileHeader h = scenario_header(c);
    h.kind = "calibration";
    h.set("skip_steps", std::to_string(report.skip_steps));
    h.set("band_low", kCalibrationBandLow);
    h.set("band_high", kCalibrationBandHigh);
    h.columns = {"slot", "delay", "mse", "mean_var", "ratio", "ci_low", "ci_high", "within_band"};
    std::vector<std::vector<double>> cols(h.columns.size());
    for (std::size_t i = 0; i < report.lines.size(); ++i) {
        const auto& l = report.lines[i];
        const double vals[] = {static_cast<double>(i) - 1.0, l.delay, l.mse, l.mean_var, l.ratio,
                               l.ci_low, l.ci_high, l.within_band ? 1.0 : 0.0};
        for (std::size_t k = 0; k < cols.size(); ++k) cols[k].push_back(vals[k]);
    }
    const fs::path p = fs::path(c.out_dir) / "calibration.dat";
    write_table_file(p, h, cols);

    out << "realizations " << report.realizations << ", transient " << report.skip_steps << " steps\n";
    for (const auto& l : report.lines) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-8s delay %.3e s  mse %.5g  var %.5g  ratio %.4f [%.4f, %.4f] %s\n",
                      l.label.c_str(), l.delay, l.mse, l.mean_var, l.ratio, l.ci_low, l.ci_high,
                      l.within_band ? "ok" : "OUT OF BAND");
        out << buf;
    }
    out << p.string() << '\n';
    return kExitOk;
}

int cmd_steady(const ScenarioConfig& c, const Flags& f, std::ostream& out)
{
    const auto& ph = c.physics;
    const OUParams ou = c.model_ou();
    out << "kappa_sq: " << format_double(ph.kappa_sq) << '\n';
    if (ph.constituents) out << "kappa_sq_from_constituents: " << format_double(compute_kappa_sq(ph)) << '\n';
    out << "gamma_b: " << format_double(ou.gamma_b) << '\n';
    out << "sigma_b: " << format_double(ou.sigma_b) << '\n';
    out << "steady_variance: " << format_double(steady_variance(ph.kappa_sq, ph.mu, ou)) << '\n';
    out << "ou_stationary_variance: " << format_double(ou_steady_variance(ou)) << '\n';
    out << "duration: " << format_double(c.duration) << '\n';
    out << "static_variance: " << format_double(static_variance(ph.delta_b0, ph.kappa_sq, ph.mu, c.duration)) << '\n';
    out << "static_asymptote: " << format_double(static_variance_asymptote(ph.kappa_sq, ph.mu, c.duration)) << '\n';
    if (f.fixed_point) {
        const auto fp = steady_variance_fixed_point(ph, ou);
        out << "fixed_point_variance: " << format_double(fp.b_var) << '\n';
        out << "fixed_point_iterations: " << fp.iterations << '\n';
        out << "fixed_point_converged: " << (fp.converged ? "true" : "false") << '\n';
    }
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Flags f;
    CLI::App app{"Field estimation from simulated continuous polarimetry"};
    app.name("magest");
    app.require_subcommand(1);

    app.add_option("--config", f.config, "key: value configuration file (data file headers work too)");
    app.add_option("--seed", f.seed, "master seed; realization i uses seed + i");
    app.add_option("--tau", f.tau, "light segment duration [s]");
    app.add_option("--gamma-b", f.gamma_b, "OU damping rate of the field [1/s]");
    app.add_option("--sigma-b", f.sigma_b, "OU diffusion strength [pT^2/s]");
    app.add_option("--estimator-gamma-b", f.estimator_gamma_b, "damping rate assumed by the estimators");
    app.add_option("--estimator-sigma-b", f.estimator_sigma_b, "diffusion strength assumed by the estimators");
    app.add_option("--duration", f.duration, "probe duration per realization [s]");
    app.add_option("--realizations", f.realizations, "number of realizations");
    app.add_option("--lag-slots", f.lag_slots, "number of smoother history slots");
    app.add_option("--lag-stride", f.lag_stride, "steps between history slots");
    app.add_option("--step-cap", f.step_cap, "maximum steps per realization");
    app.add_option("--threads", f.threads, "worker threads (0 = all cores)");
    app.add_option("--out", f.out, "output directory");

    auto* sim = app.add_subcommand("simulate", "simulate field trajectories and detection records");
    auto* filt = app.add_subcommand("filter", "causal field estimate from a record");
    filt->add_option("--record", f.record, "record file")->required();
    auto* smooth = app.add_subcommand("smooth", "fixed-lag smoothed estimate from a record");
    smooth->add_option("--record", f.record, "record file")->required();
    smooth->add_option("--emit-every", f.emit_every, "steps between output rows (0 = lag stride)");
    smooth->add_flag("--diagnostics", f.diagnostics, "also write the delay error profile and fitted weights");
    auto* fig = app.add_subcommand("figure", "write the dataset behind a figure");
    fig->add_option("--figure", f.figure, "figure id 2..6")->required();
    auto* cal = app.add_subcommand("calibrate", "Monte Carlo check of reported variances");
    auto* steady = app.add_subcommand("steady", "print closed-form variances for the parameters");
    steady->add_flag("--fixed-point", f.fixed_point, "also iterate the covariance map to its fixed point");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        const ScenarioConfig c = build_config(f);
        for (const auto& w : c.physics.warnings()) err << "warning: " << w << '\n';
        if (sim->parsed()) return cmd_simulate(c, out);
        if (filt->parsed()) return cmd_filter(c, f, out);
        if (smooth->parsed()) return cmd_smooth(c, f, out);
        if (fig->parsed()) return cmd_figure(c, f, out);
        if (cal->parsed()) return cmd_calibrate(c, out);
        if (steady->parsed()) return cmd_steady(c, f, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

} // namespace magest
