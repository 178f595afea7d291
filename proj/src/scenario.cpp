#include "magest/scenario.hpp"

#include "magest/delay_fit.hpp"
#include "magest/filter.hpp"
#include "magest/truth.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace magest {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text)
{
    text = trim(text);
    std::uint64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        // Accept integral values written in floating notation (e.g. 1e8).
        const double d = parse_double(text);
        if (d < 0 || d != std::floor(d) || d > 1.8e19) {
            throw ContractError(std::string(key) + ": expected a non-negative integer");
        }
        return static_cast<std::uint64_t>(d);
    }
    return v;
}

Constituents& constituents(ScenarioConfig& c)
{
    if (!c.physics.constituents) c.physics.constituents = table1_constituents();
    return *c.physics.constituents;
}

OUParams& estimator(ScenarioConfig& c)
{
    if (!c.estimator_ou) c.estimator_ou = c.ou;
    return *c.estimator_ou;
}

} // namespace

void ScenarioConfig::validate() const
{
    physics.validate();
    ou.validate();
    if (estimator_ou) estimator_ou->validate();
    if (!(duration >= 0.0)) throw ContractError("duration must be >= 0");
    if (realizations < 1) throw ContractError("realizations must be >= 1");
    lag.validate();
    (void)steps();
    (void)ou_maps(model_ou(), physics.tau);
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys{
        "kappa_sq",   "mu",          "delta_b0",          "tau",
        "gamma_b",    "sigma_b",     "estimator_gamma_b", "estimator_sigma_b",
        "duration",   "seed",        "realizations",      "lag_slots",
        "lag_stride", "lag_dim_cap", "step_cap",          "n_atoms",
        "photon_flux", "area",       "wavelength",        "detuning_hz",
        "dipole"};
    return keys;
}

void apply_config_value(ScenarioConfig& c, std::string_view key, std::string_view value)
{
    auto num = [&] { return parse_double(value); };
    if (key == "kappa_sq") c.physics.kappa_sq = num();
    else if (key == "mu") c.physics.mu = num();
    else if (key == "delta_b0") c.physics.delta_b0 = num();
    else if (key == "tau") c.physics.tau = num();
    else if (key == "gamma_b") c.ou.gamma_b = num();
    else if (key == "sigma_b") c.ou.sigma_b = num();
    else if (key == "estimator_gamma_b") estimator(c).gamma_b = num();
    else if (key == "estimator_sigma_b") estimator(c).sigma_b = num();
    else if (key == "duration") c.duration = num();
    else if (key == "seed") c.seed = parse_uint(key, value);
    else if (key == "realizations") c.realizations = parse_uint(key, value);
    else if (key == "lag_slots") c.lag.n_slots = parse_uint(key, value);
    else if (key == "lag_stride") c.lag.slot_stride = parse_uint(key, value);
    else if (key == "lag_dim_cap") c.lag.dim_cap = parse_uint(key, value);
    else if (key == "step_cap") c.step_cap = parse_uint(key, value);
    else if (key == "n_atoms") constituents(c).n_atoms = num();
    else if (key == "photon_flux") constituents(c).photon_flux = num();
    else if (key == "area") constituents(c).area = num();
    else if (key == "wavelength") constituents(c).wavelength = num();
    else if (key == "detuning_hz") constituents(c).detuning_hz = num();
    else if (key == "dipole") constituents(c).dipole = num();
    else throw ContractError("unknown configuration key '" + std::string(key) + "'");
}

void apply_config_text(ScenarioConfig& config, std::string_view text)
{
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        line = trim(line);
        const bool commented = !line.empty() && line.front() == '#';
        if (commented) line = trim(line.substr(1));
        if (line.empty()) continue;
        // Data files: the header ends at the column line.
        if (commented && line.starts_with("columns:")) break;
        const std::size_t sep = line.find_first_of(":=");
        if (sep == std::string_view::npos) {
            if (commented) continue;
            throw ContractError("configuration line without ':' or '=': '" + std::string(line) + "'");
        }
        const std::string_view key = trim(line.substr(0, sep));
        const std::string_view value = trim(line.substr(sep + 1));
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            if (commented) continue;
            throw ContractError("unknown configuration key '" + std::string(key) + "'");
        }
        apply_config_value(config, key, value);
    }
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open configuration " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    ScenarioConfig c;
    apply_config_text(c, ss.str());
    return c;
}

FileHeader scenario_header(const ScenarioConfig& c)
{
    FileHeader h;
    h.set("kappa_sq", c.physics.kappa_sq);
    h.set("mu", c.physics.mu);
    h.set("delta_b0", c.physics.delta_b0);
    h.set("tau", c.physics.tau);
    h.set("gamma_b", c.ou.gamma_b);
    h.set("sigma_b", c.ou.sigma_b);
    if (c.estimator_ou) {
        h.set("estimator_gamma_b", c.estimator_ou->gamma_b);
        h.set("estimator_sigma_b", c.estimator_ou->sigma_b);
    }
    h.set("duration", c.duration);
    h.set("seed", std::to_string(c.seed));
    h.set("realizations", std::to_string(c.realizations));
    h.set("lag_slots", std::to_string(c.lag.n_slots));
    h.set("lag_stride", std::to_string(c.lag.slot_stride));
    h.set("lag_dim_cap", std::to_string(c.lag.dim_cap));
    h.set("step_cap", std::to_string(c.step_cap));
    if (c.physics.constituents) {
        const Constituents& k = *c.physics.constituents;
        h.set("n_atoms", k.n_atoms);
        h.set("photon_flux", k.photon_flux);
        h.set("area", k.area);
        h.set("wavelength", k.wavelength);
        h.set("detuning_hz", k.detuning_hz);
        h.set("dipole", k.dipole);
    }
    return h;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

CalibrationLine summarize(std::string label, double delay, const std::vector<double>& mse,
                          const std::vector<double>& var)
{
    const double n = static_cast<double>(mse.size());
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < mse.size(); ++i) {
        m += mse[i];
        v += var[i];
    }
    m /= n;
    v /= n;
    double ss = 0.0;
    for (double x : mse) ss += (x - m) * (x - m);
    const double se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;

    CalibrationLine line;
    line.label = std::move(label);
    line.delay = delay;
    line.mse = m;
    line.mean_var = v;
    line.ratio = m / v;
    line.ci_low = (m - 1.96 * se) / v;
    line.ci_high = (m + 1.96 * se) / v;
    line.within_band = line.ratio >= kCalibrationBandLow && line.ratio <= kCalibrationBandHigh;
    return line;
}

} // namespace

CalibrationReport run_calibration(const ScenarioConfig& config)
{
    config.validate();
    if (config.realizations < 100) throw ContractError("calibration needs at least 100 realizations");
    const std::size_t n = config.steps();
    const OUParams model = config.model_ou();

    CalibrationReport report;
    report.realizations = config.realizations;
    report.skip_steps = settle_index(filter_variance_flow(config.physics, model, n), 0.01);
    if (report.skip_steps + 2 >= n) throw ContractError("calibration: run too short to reach steady state");

    const std::size_t R = config.realizations;
    const std::size_t slots = config.lag.n_slots;
    std::vector<double> filt_mse(R), filt_var(R);
    std::vector<std::vector<double>> slot_mse(slots + 1, std::vector<double>(R));
    std::vector<std::vector<double>> slot_var(slots + 1, std::vector<double>(R));
    std::vector<double> slot_delay(slots + 1, 0.0);
    std::mutex delay_mutex;

    parallel_for(R, config.threads, [&](std::size_t r) {
        const auto rec = run_truth(config.physics, config.ou, config.duration,
                                   realization_seed(config.seed, r), config.step_cap);
        const auto trace = run_filter(rec, config.physics, model);
        double se = 0.0, sv = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = report.skip_steps; k + 1 < rec.size(); ++k) {
            const double e = trace.b_hat[k] - rec.true_field[k + 1];
            se += e * e;
            sv += trace.b_var[k];
            ++cnt;
        }
        filt_mse[r] = se / static_cast<double>(cnt);
        filt_var[r] = sv / static_cast<double>(cnt);

        if (slots > 0) {
            const auto sm = run_smoother(rec, config.physics, model, config.lag);
            const auto score = score_smoothed(sm, rec.true_field, config.lag, report.skip_steps);
            for (std::size_t i = 0; i <= slots; ++i) {
                slot_mse[i][r] = score.error_sq[i];
                slot_var[i][r] = score.mean_var[i];
            }
            std::lock_guard lock(delay_mutex);
            slot_delay = score.delay;
        }
    });

    report.lines.push_back(summarize("filter", 0.0, filt_mse, filt_var));
    if (slots > 0) {
        for (std::size_t i = 0; i <= slots; ++i) {
            report.lines.push_back(summarize("slot_" + std::to_string(i), slot_delay[i], slot_mse[i], slot_var[i]));
        }
    }
    return report;
}

} // namespace magest
