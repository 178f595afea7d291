// Acceptance checks. Prints one PASS/FAIL line per criterion.
// Usage: magest_acceptance [criterion...]   (no argument runs all seven)

#include "magest/delay_fit.hpp"
#include "magest/filter.hpp"
#include "magest/physics.hpp"
#include "magest/scenario.hpp"
#include "magest/smoother.hpp"
#include "magest/truth.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace magest;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1. Static field.
Outcome static_field()
{
    const PhysicsParams p = table1_params();
    const std::size_t n = step_count(1e-3, p.tau);
    const auto rec = run_truth(p, OUParams{0.0, 0.0}, 1e-3, 1);
    const auto tr = run_filter(rec, p, OUParams{0.0, 0.0});
    double worst = 0.0;
    for (std::size_t k = 9; k < n; ++k) {
        const double t = static_cast<double>(k + 1) * p.tau;
        worst = std::max(worst, std::abs(tr.b_var[k] / static_variance(p.delta_b0, p.kappa_sq, p.mu, t) - 1.0));
    }
    double worst_asym = 0.0;
    for (double kt = 101.0; kt <= 1e6; kt *= 1.25) {
        const double t = kt / p.kappa_sq;
        const double r = static_variance(p.delta_b0, p.kappa_sq, p.mu, t) / static_variance_asymptote(p.kappa_sq, p.mu, t);
        worst_asym = std::max(worst_asym, std::abs(r - 1.0));
    }
    return {worst <= 5e-3 && worst_asym <= 0.05,
            fmt("max rel dev over [10 tau, 1 ms] = %.3e (<= 5e-3); asymptote dev for k^2 t > 100 = %.3e (<= 0.05)",
                worst, worst_asym)};
}

// 2. Steady state across rates.
Outcome steady_state()
{
    const PhysicsParams p = table1_params();
    bool ok = true;
    double prev = 0.0;
    std::string detail;
    for (double g : {1e1, 1e2, 1e3, 1e4, 1e5}) {
        const OUParams ou{g, 2.0 * g};
        const auto flow = filter_variance_flow(p, ou, 2'000'000);  // 20 ms
        const double long_run = flow.back();
        const double closed = steady_variance(p.kappa_sq, p.mu, ou);
        const double rel = std::abs(long_run / closed - 1.0);
        ok = ok && rel <= 0.01 && closed > prev;
        prev = closed;
        detail += fmt("g=%.0e: %.5g vs %.5g (%.2e); ", g, long_run, closed, rel);
    }
    return {ok, detail + "increasing in gamma_b"};
}

// 3. Calibration of the reported variance.
Outcome calibration()
{
    ScenarioConfig c;
    c.ou = {1e3, 2e3};
    c.duration = 5e-4;
    c.realizations = 200;
    c.lag.n_slots = 0;
    c.seed = 1;
    const auto rep = run_calibration(c);
    const auto& f = rep.lines.front();
    return {f.within_band, fmt("mse/var = %.4f (95%% CI %.4f..%.4f), band [0.9, 1.1], %zu realizations, skip %zu steps",
                               f.ratio, f.ci_low, f.ci_high, rep.realizations, rep.skip_steps)};
}

// 4. OU sample statistics.
Outcome ou_statistics()
{
    const OUParams ou{1e3, 2e3};
    const double v = ou_steady_variance(ou);
    const std::size_t n = 100'000;
    bool ok = true;
    std::string detail;
    for (double s : {1e-4, 1e-3}) {
        // Each sample path is advanced in 100 sub-steps.
        Random rng(2024);
        const double sub = s / 100.0;
        std::vector<double> x0(n), xs(n);
        for (std::size_t i = 0; i < n; ++i) {
            x0[i] = rng.normal(0.0, std::sqrt(v));
            double x = x0[i];
            for (int k = 0; k < 100; ++k) x = ou_step(x, ou, sub, rng);
            xs[i] = x;
        }
        double var = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            var += xs[i] * xs[i];
            cov += x0[i] * xs[i];
        }
        var /= static_cast<double>(n);
        cov /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += std::pow(x0[i] * xs[i] - cov, 2);
        const double se_cov = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
        const double se_var = v * std::sqrt(2.0 / static_cast<double>(n));
        const double want_cov = v * std::exp(-ou.gamma_b * s);
        const double z_var = (var - v) / se_var, z_cov = (cov - want_cov) / se_cov;
        ok = ok && std::abs(z_var) <= 3.0 && std::abs(z_cov) <= 3.0;
        detail += fmt("s=%.0e: var %.4f (z=%.2f), autocov %.4f vs %.4f (z=%.2f); ", s, var, z_var, cov, want_cov, z_cov);
    }
    return {ok, detail};
}

// 5. Smoothing gain.
Outcome hindsight()
{
    const PhysicsParams p = table1_params();
    const LagConfig lag{50, 200};
    bool ok = true, monotone = true;
    std::string detail;
    for (double g : {1e1, 1e2, 1e3, 1e4}) {
        const OUParams ou{g, 2.0 * g};
        const auto prof = smoother_variance_profile(p, ou, lag, 60000);
        for (std::size_t i = 1; i < prof.b_var.size(); ++i) {
            monotone = monotone && prof.b_var[i] <= prof.b_var[i - 1] * (1.0 + 1e-12);
        }
        const double ratio = prof.b_var.back() / prof.b_var.front();
        ok = ok && ratio >= 0.35 && ratio <= 0.65;
        detail += fmt("g=%.0e: var ratio %.4f (std ratio %.4f); ", g, ratio, std::sqrt(ratio));
    }
    return {ok && monotone, detail + (monotone ? "monotone" : "NOT monotone") + "; required var ratio in [0.35, 0.65]"};
}

// 6. Delayed estimates, least-squares weights and the smoother.
Outcome delay_dominance()
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    const double duration = 1e-3;
    const std::size_t R = 50;
    const std::uint64_t master = 1;
    const std::size_t n = step_count(duration, p.tau);
    const std::size_t skip = settle_index(filter_variance_flow(p, ou, n), 0.01);

    const std::size_t profile_step = 100, profile_points = 101;  // 1 us grid up to 0.1 ms
    const std::size_t stride = 500, K = 20;                       // 5 us weight grid
    std::vector<std::size_t> delays;
    for (std::size_t i = 0; i < profile_points; ++i) delays.push_back(i * profile_step);

    // Training ensemble: pooled lag profile and LS weights.
    std::vector<LagErrorProfile> profiles(R);
    std::vector<DelayRegression> regs(R, DelayRegression(K, stride, p.tau));
    parallel_for(R, 0, [&](std::size_t r) {
        const auto rec = run_truth(p, ou, duration, realization_seed(master + 100000, r));
        const auto tr = run_filter(rec, p, ou);
        profiles[r] = lag_error_profile(tr.b_hat, rec.true_field, p.tau, delays, skip);
        regs[r].add(tr.b_hat, rec.true_field, skip);
    });
    std::vector<double> pooled(profile_points, 0.0);
    for (const auto& pr : profiles) {
        for (std::size_t i = 0; i < profile_points; ++i) pooled[i] += pr.error_sq[i] / static_cast<double>(R);
    }
    DelayRegression all(K, stride, p.tau);
    for (const auto& r : regs) all.merge(r);
    const auto fit = all.solve();

    const std::size_t best = static_cast<std::size_t>(std::min_element(pooled.begin(), pooled.end()) - pooled.begin());
    const double t_opt = static_cast<double>(delays[best]) * p.tau;
    const bool argmin_ok = t_opt > 0.0 && t_opt < 1e-4;

    double min_unit = INFINITY;
    for (std::size_t i = 0; i <= K; ++i) {
        std::vector<double> unit(K + 1, 0.0);
        unit[i] = 1.0;
        min_unit = std::min(min_unit, all.error_sq(unit));
    }
    const double min_profile = pooled[best];
    const bool ls_ok = fit.error_sq <= min_unit && fit.error_sq <= min_profile;

    // Test ensemble: smoother deepest slot vs LS weights on identical target times.
    const LagConfig lag{50, 200};
    const std::size_t span = lag.span_steps();
    std::vector<double> sm_mse(R), ls_mse(R);
    parallel_for(R, 0, [&](std::size_t r) {
        const auto rec = run_truth(p, ou, duration, realization_seed(master, r));
        const auto tr = run_filter(rec, p, ou);
        const auto sm = run_smoother(rec, p, ou, lag);
        double es = 0.0, el = 0.0;
        std::size_t cnt = 0;
        for (std::size_t row = 0; row < sm.rows(); ++row) {
            const std::size_t k = sm.steps[row];
            if (k + 1 < span + skip + 1) continue;
            const std::size_t j = k + 1 - span;
            double ls = 0.0;
            for (std::size_t i = 0; i <= K; ++i) ls += fit.weights[i] * tr.b_hat[j - 1 + i * stride];
            es += std::pow(sm.b_hat_at(row, lag.n_slots) - rec.true_field[j], 2);
            el += std::pow(ls - rec.true_field[j], 2);
            ++cnt;
        }
        sm_mse[r] = es / static_cast<double>(cnt);
        ls_mse[r] = el / static_cast<double>(cnt);
    });
    double ms = 0.0, ml = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        ms += sm_mse[r] / static_cast<double>(R);
        ml += ls_mse[r] / static_cast<double>(R);
    }
    double ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) ss += std::pow(sm_mse[r] - ls_mse[r] - (ms - ml), 2);
    const double se = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
    const bool smooth_ok = ms <= ml;

    return {argmin_ok && ls_ok && smooth_ok,
            fmt("argmin T = %.1f us (in (0, 100)); LS error %.5f <= min single delay %.5f (5 us grid) / %.5f (1 us grid); "
                "smoother MSE %.5f <= LS (held-out) %.5f, diff %.5f +- %.5f over %zu realizations",
                t_opt * 1e6, fit.error_sq, min_unit, min_profile, ms, ml, ms - ml, se, R)};
}

// 7. Properties of the covariance machinery.
Outcome properties()
{
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> nd;
    std::size_t bad = 0, steps = 0;

    // Randomized filter, smoother and truth steps.
    for (int trial = 0; trial < 20; ++trial) {
        PhysicsParams p = table1_params();
        p.kappa_sq *= std::pow(10.0, 2.0 * unif(eng) - 1.0);
        p.mu *= std::pow(10.0, 2.0 * unif(eng) - 1.0);
        const OUParams ou{std::pow(10.0, 1.0 + 4.0 * unif(eng)), 0.0};
        const OUParams ou2{ou.gamma_b, 2.0 * ou.gamma_b * (0.5 + unif(eng))};
        auto f = init_filter(0.5 + unif(eng));
        const LagConfig lag{1 + static_cast<std::size_t>(8 * unif(eng)), 1 + static_cast<std::size_t>(20 * unif(eng))};
        auto s = init_smoother(1.0, lag);
        auto t = init_truth();
        Random rng(static_cast<std::uint64_t>(trial));
        for (int k = 0; k < 170; ++k) {
            f = update(predict(f, p, ou2), 3.0 * nd(eng));
            s = step_smoother(s, p, ou2, lag, 3.0 * nd(eng), static_cast<std::size_t>(k));
            t = step_truth(t, nd(eng), p, rng).state;
            bad += !validate(f).ok() + !validate(s).ok() + !validate(t).ok();
            steps += 3;
        }
    }

    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    std::vector<EstimateTrace> traces;
    std::vector<MeasurementRecord> recs;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        recs.push_back(run_truth(p, ou, 5e-5, seed));
        traces.push_back(run_filter(recs.back(), p, ou));
    }
    const bool deterministic = traces[0].b_var == traces[1].b_var && traces[0].b_var == traces[2].b_var;

    bool bit_equal = true;
    for (LagConfig lag : {LagConfig{0, 1}, LagConfig{8, 25}}) {
        const auto sm = run_smoother(recs[0], p, ou, lag, 1);
        for (std::size_t r = 0; r < sm.rows(); ++r) {
            bit_equal = bit_equal && sm.b_hat_at(r, 0) == traces[0].b_hat[r] && sm.b_var_at(r, 0) == traces[0].b_var[r];
        }
    }

    PhysicsParams dark = p;
    dark.kappa_sq = 1e-300;
    auto b = init_filter(std::sqrt(0.03));
    double worst_extrap = 0.0;
    for (std::size_t k = 1; k <= 200000; ++k) {
        b = predict(b, dark, ou);
        if (k % 5000 == 0) {
            const double want = ou_extrapolate(0.0, 0.03, ou, static_cast<double>(k) * p.tau).variance;
            worst_extrap = std::max(worst_extrap, std::abs(b.variance(0) / want - 1.0));
        }
    }

    double worst_cond = 0.0;
    const BlockPartition part({0}, {1}, 2);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::Matrix2d a;
        a << nd(eng), nd(eng), nd(eng), nd(eng);
        const Eigen::Matrix2d cov = a * a.transpose() + 0.01 * Eigen::Matrix2d::Identity();
        const Eigen::Vector2d mean(nd(eng), nd(eng));
        const double x = nd(eng);
        const auto got = condition_on_measurement(GaussianBelief(mean, 2.0 * cov), part, x);
        const auto ref = oracle::condition(mean, cov, 1, x);
        worst_cond = std::max({worst_cond, std::abs(got.mean(0) - ref.mean(0)) / (1.0 + std::abs(ref.mean(0))),
                               std::abs(got.variance(0) - ref.cov(0, 0)) / ref.cov(0, 0)});
    }

    const bool ok = bad == 0 && steps >= 10000 && deterministic && bit_equal && worst_extrap <= 1e-3 && worst_cond <= 1e-9;
    return {ok, fmt("%zu/%zu steps symmetric PSD; b_var identical across records: %s; delay-0 bit equality: %s; "
                    "extrapolation dev %.2e (<= 1e-3); conditioning dev %.2e",
                    steps - bad, steps, deterministic ? "yes" : "no", bit_equal ? "yes" : "no", worst_extrap, worst_cond)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"static-field closed form", static_field},
        {"steady-state fixed point", steady_state},
        {"calibration", calibration},
        {"OU statistics", ou_statistics},
        {"hindsight factor", hindsight},
        {"delay dominance", delay_dominance},
        {"property suite", properties},
    };
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty()) {
        for (int i = 1; i <= 7; ++i) which.push_back(i);
    }
    int failures = 0;
    for (int id : which) {
        if (id < 1 || id > 7) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        const auto start = std::chrono::steady_clock::now();
        const Outcome o = criteria[id - 1].second();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[id - 1].first,
                    o.detail.c_str(), secs);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
