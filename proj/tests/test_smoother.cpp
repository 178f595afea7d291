#include "magest/delay_fit.hpp"
#include "magest/filter.hpp"
#include "magest/smoother.hpp"
#include "magest/truth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace magest;

TEST_SUITE("smoother")
{

TEST_CASE("layout and prior")
{
    LagConfig none{0, 10};
    const auto l0 = smoother_layout(none);
    const auto plain = EstimatorLayout::plain();
    CHECK(l0.dim == plain.dim);
    CHECK(l0.p_at == plain.p_at);
    CHECK(init_smoother(1.0, none).gamma == init_filter(1.0).gamma);

    LagConfig lag{4, 3};
    const auto b = init_smoother(1.5, lag);
    CHECK(b.dim() == 9);
    for (Index i = 0; i <= 4; ++i) CHECK(b.gamma(i, i) == 2.0 * 2.25);
    Eigen::MatrixXd hist = b.gamma.topLeftCorner(5, 5);
    CHECK((hist - Eigen::MatrixXd(hist.diagonal().asDiagonal())).isZero());
    CHECK(validate(b).ok());
}

TEST_CASE("dimension cap")
{
    LagConfig lag{200, 1};
    CHECK_THROWS_AS(lag.validate(), ContractError);
    lag.dim_cap = 256;
    CHECK_NOTHROW(lag.validate());
    CHECK_THROWS_AS((LagConfig{3, 0}.validate()), ContractError);
}

TEST_CASE("shift copies the current field into slot 1")
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    LagConfig lag{3, 5};
    const auto rec = run_truth(p, ou, 100 * p.tau, 4);
    GaussianBelief s = init_smoother(1.0, lag);
    for (std::size_t k = 0; k < 23; ++k) s = step_smoother(s, p, ou, lag, rec.outcomes[k], k);

    const GaussianBelief before = s;
    shift_history(s, lag);
    CHECK(s.mean(1) == s.mean(0));
    CHECK(s.gamma(1, 1) == s.gamma(0, 0));
    CHECK(s.gamma(0, 1) == s.gamma(0, 0));
    CHECK(s.mean(2) == before.mean(1));
    CHECK(s.mean(3) == before.mean(2));
    CHECK(s.gamma(3, 2) == before.gamma(2, 1));
    // Coordinates outside the history are untouched.
    CHECK(s.gamma.bottomRightCorner(4, 4) == before.gamma.bottomRightCorner(4, 4));
    CHECK(s.gamma(0, 6) == before.gamma(0, 6));
    CHECK(validate(s).ok());
}

TEST_CASE("without light the stored values never learn")
{
    PhysicsParams p = table1_params();
    p.kappa_sq = 1e-300;
    const OUParams ou{1e3, 2e3};
    LagConfig lag{4, 6};
    GaussianBelief s = init_smoother(1.0, lag);
    for (std::size_t k = 0; k < 200; ++k) {
        if (k % lag.slot_stride == 0 && k > 0) {
            // Each value moved back one slot unchanged.
            GaussianBelief t = s;
            shift_history(t, lag);
            for (std::size_t i = 2; i <= lag.n_slots; ++i) {
                CHECK(t.variance(static_cast<Index>(i)) == s.variance(static_cast<Index>(i - 1)));
            }
        }
        const GaussianBelief prev = s;
        s = step_smoother(s, p, ou, lag, 0.0, k);
        if (k % lag.slot_stride != 0) {
            for (Index i = 1; i <= 4; ++i) CHECK(s.variance(i) == prev.variance(i));
        }
    }
}

TEST_CASE("current-time column equals the plain filter bit for bit")
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    const auto rec = run_truth(p, ou, 3e-5, 12);
    const auto trace = run_filter(rec, p, ou);
    for (LagConfig lag : {LagConfig{0, 1}, LagConfig{3, 7}, LagConfig{12, 50}}) {
        const auto sm = run_smoother(rec, p, ou, lag, 1);
        REQUIRE(sm.rows() == trace.size());
        for (std::size_t r = 0; r < sm.rows(); ++r) {
            CHECK(sm.b_hat_at(r, 0) == trace.b_hat[r]);
            CHECK(sm.b_var_at(r, 0) == trace.b_var[r]);
        }
    }
}

TEST_CASE("slot delays")
{
    CHECK(slot_delay_steps(17, 0, 5) == 0);
    // Emission aligned with the stride: exact multiples.
    CHECK(slot_delay_steps(19, 1, 5) == 5);
    CHECK(slot_delay_steps(19, 3, 5) == 15);
    // Right after a shift slot 1 is one step old.
    CHECK(slot_delay_steps(20, 1, 5) == 1);
    LagConfig lag{3, 5};
    CHECK_FALSE(history_filled(9, lag));
    CHECK(history_filled(10, lag));
}

TEST_CASE("emitted delays and their alignment with the truth")
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    LagConfig lag{5, 40};
    const auto rec = run_truth(p, ou, 2e-5, 3);
    const auto sm = run_smoother(rec, p, ou, lag);
    REQUIRE(sm.rows() == rec.size() / lag.slot_stride);
    for (std::size_t r = 0; r < sm.rows(); ++r) {
        for (std::size_t i = 0; i <= lag.n_slots; ++i) {
            CHECK(sm.delay_at(r, i) == doctest::Approx(static_cast<double>(i * lag.slot_stride) * p.tau));
        }
    }
}

TEST_CASE("backward variance is monotone, reaches a plateau and matches a fixed-interval reference")
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    const LagConfig lag{50, 200};
    const auto prof = smoother_variance_profile(p, ou, lag, 60000);
    for (std::size_t i = 1; i < prof.b_var.size(); ++i) CHECK(prof.b_var[i] <= prof.b_var[i - 1] + 1e-12);
    const std::size_t last = prof.b_var.size() - 1;
    CHECK(prof.b_var[last] == doctest::Approx(prof.b_var[last - 5]).epsilon(1e-3));

    const std::size_t n = 60000;
    const auto ref = oracle::rts_field_variance(p.kappa_sq, p.mu, p.tau, ou.gamma_b, ou.sigma_b, 1.0, n,
                                                n - 1 - lag.span_steps());
    CHECK(prof.b_var.front() == doctest::Approx(ref.filtered).epsilon(2e-3));
    CHECK(prof.b_var.back() == doctest::Approx(ref.smoothed).epsilon(1e-2));
}

TEST_CASE("deepest slot settles in time")
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    const LagConfig lag{10, 200};
    const auto rec = run_truth(p, ou, 4e-4, 9);
    const auto sm = run_smoother(rec, p, ou, lag);
    const std::size_t rows = sm.rows();
    CHECK(sm.b_var_at(rows - 1, 10) == doctest::Approx(sm.b_var_at(rows - 50, 10)).epsilon(1e-6));
}

TEST_CASE("smoothing does not lose to filtering on simulated data")
{
    const PhysicsParams p = table1_params();
    const OUParams ou{1e3, 2e3};
    const LagConfig lag{20, 200};
    double filt = 0.0, smooth = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto rec = run_truth(p, ou, 5e-4, seed);
        const auto sm = run_smoother(rec, p, ou, lag);
        const auto score = score_smoothed(sm, rec.true_field, lag, 5000);
        filt += score.error_sq.front();
        smooth += score.error_sq.back();
        CHECK(score.delay.back() == doctest::Approx(lag.span_steps() * p.tau));
    }
    CHECK(smooth < filt);
}

} // TEST_SUITE
