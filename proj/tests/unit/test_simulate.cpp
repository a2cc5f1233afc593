#include <doctest.h>

#include <cmath>

#include "entrance/errors.hpp"
#include "entrance/simulate.hpp"
#include "gen.hpp"

using namespace entrance;

namespace {

double logistic_flow(double x0, double t) { return x0 / (1.0 + x0 * t / 2.0); }

SimConfig quiet(double dt, double t_max, std::uint64_t seed = 1) {
    SimConfig c;
    c.dt = dt;
    c.t_max = t_max;
    c.seed = seed;
    return c;
}

ProcessSpec linear_mean_spec() {
    ProcessSpec s;
    s.gamma0 = RateFunction::linear(0.5);
    s.gamma1 = RateFunction::linear(1.0);
    s.gamma2 = RateFunction::linear(1.0);
    s.nu = LevyMeasure::stable(1.5, 1.0);
    return s;
}

}  // namespace

TEST_CASE("step: null dynamics leave the state alone") {
    SimConfig c;
    const auto scheme = SchemeConstants::from(LevyMeasure::none(), c);
    NoiseSlice noise;
    noise.brownian = 1.3;
    noise.small_jump = -0.4;
    for (double dt : {1e-4, 0.1, 3.0}) CHECK(step(null_spec(), 5.0, dt, noise, scheme).value == 5.0);
}

TEST_CASE("step: deterministic Euler step of the logistic drift") {
    SimConfig c;
    const auto scheme = SchemeConstants::from(LevyMeasure::none(), c);
    const auto r = step(logistic_drift_only(1.0), 10.0, 1e-3, NoiseSlice{}, scheme);
    CHECK(r.value == doctest::Approx(10.0 - 0.05).epsilon(1e-15));
    CHECK_FALSE(r.clamped);
}

TEST_CASE("step: thinning and compensator on a single atom") {
    ProcessSpec spec;
    spec.gamma2 = RateFunction::linear(1.0);
    spec.nu = LevyMeasure::finite_atoms({{1.0, 2.0}});
    SimConfig c;
    c.eps = 0.5;
    const auto scheme = SchemeConstants::from(spec.nu, c);
    CHECK(scheme.m1 == 2.0);  // size 1 times rate 2
    const double dt = 1e-3;
    NoiseSlice noise;
    noise.u_dom = 3.0;
    noise.marks = {{dt / 2, 1.0, 2.5}};
    CHECK(step(spec, 3.0, dt, noise, scheme).value == doctest::Approx(3.0 - 3.0 * 2.0 * dt + 1.0));
    // u above gamma2(x) rejects the mark
    noise.marks = {{dt / 2, 1.0, 2.9}};
    CHECK(step(spec, 2.5, dt, noise, scheme).value == doctest::Approx(2.5 - 2.5 * 2.0 * dt));
}

TEST_CASE("step: overflow raises with the last finite state") {
    ProcessSpec spec;
    spec.gamma0 = RateFunction::power_law(1.0, 400.0);
    SimConfig c;
    const auto scheme = SchemeConstants::from(spec.nu, c);
    try {
        step(spec, 10.0, 1e-3, NoiseSlice{}, scheme);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.last_state() == 10.0);
    }
}

TEST_CASE("step: accepted jumps add exactly their sizes, each at least eps") {
    const auto spec = logistic_csbp(1.0, LevyMeasure::stable(1.5, 1.0));
    SimConfig c;
    c.eps = 0.2;
    const auto scheme = SchemeConstants::from(spec.nu, c);
    gen::for_all(500, 21, [&](gen::Gen& g, std::size_t i) {
        const double x = g.log_uniform(0.01, 1e4);
        const double dt = g.log_uniform(1e-6, 1e-2);
        NoiseSlice base;
        base.brownian = g.uniform(-4, 4);
        base.small_jump = g.uniform(-4, 4);
        base.u_dom = x * g.uniform(1.0, 3.0);
        NoiseSlice with = base;
        double accepted = 0.0;
        for (std::size_t k = 0; k < g.index(5); ++k) {
            const double z = c.eps * g.log_uniform(1.0, 1e3);
            const double u = g.uniform(0, base.u_dom);
            with.marks.push_back({dt * g.unit(), z, u});
            if (u <= x) accepted += z;
        }
        const double a = step(spec, x, dt, base, scheme).value;
        const double b = step(spec, x, dt, with, scheme).value;
        INFO("case " << i);
        CHECK(a >= 0.0);
        CHECK(b - a == doctest::Approx(accepted).epsilon(1e-12).scale(x));
    });
}

TEST_CASE("step: monotone in the start value under shared noise") {
    const auto spec = logistic_csbp(1.0, LevyMeasure::stable(1.5, 1.0));
    SimConfig c;
    c.eps = 0.1;
    const auto scheme = SchemeConstants::from(spec.nu, c);
    gen::for_all(2000, 22, [&](gen::Gen& g, std::size_t i) {
        double x = g.log_uniform(1e-4, 1e5);
        double y = x * g.log_uniform(1.0, 100.0);
        if (g.coin()) y = x;
        const double base = g.log_uniform(1e-5, 1e-1);
        const double dt = std::min(adaptive_step(spec, x, base, scheme),
                                   adaptive_step(spec, y, base, scheme));
        NoiseSlice noise;
        noise.brownian = g.uniform(-5, 5);
        noise.small_jump = g.uniform(-5, 5);
        noise.u_dom = y;
        for (std::size_t k = 0; k < g.index(3); ++k) {
            noise.marks.push_back({dt * g.unit(), c.eps * g.log_uniform(1, 100), g.uniform(0, y)});
        }
        INFO("case " << i << " x=" << x << " y=" << y << " dt=" << dt);
        CHECK(step(spec, x, dt, noise, scheme).value <= step(spec, y, dt, noise, scheme).value);
    });
}

TEST_CASE("simulate_path: logistic ODE within 1e-2 of x0/(1+x0 t/2)") {
    const auto p = simulate_path(logistic_drift_only(1.0), 100.0, quiet(1e-4, 1.0), 0);
    double sup = 0.0;
    for (std::size_t k = 0; k < p.times.size(); ++k) {
        sup = std::max(sup, std::abs(p.values[k] - logistic_flow(100.0, p.times[k])));
    }
    CHECK(sup < 1e-2);
    CHECK(p.times.back() == 1.0);
}

TEST_CASE("simulate_path: empty horizon") {
    const auto p = simulate_path(logistic_csbp(1.0, LevyMeasure::stable(1.5, 1)), 12.0,
                                 quiet(1e-2, 0.0), 0);
    REQUIRE(p.times.size() == 1);
    CHECK(p.times[0] == 0.0);
    CHECK(p.values[0] == 12.0);
}

TEST_CASE("simulate_path: domain errors") {
    const auto spec = logistic_drift_only(1.0);
    SimConfig c = quiet(1e-3, 1.0);
    c.eps = 0.0;
    CHECK_THROWS_AS(simulate_path(spec, 10.0, c, 0), DomainError);
    CHECK_THROWS_AS(simulate_path(spec, 2e6, quiet(1e-3, 1.0), 0), DomainError);
    CHECK_THROWS_AS(simulate_path(spec, -1.0, quiet(1e-3, 1.0), 0), DomainError);
}

TEST_CASE("simulate_path: crossings are interpolated to the closed form") {
    SimConfig c = quiet(1e-3, 2.0);
    c.thresholds = {50.0, 10.0};
    const auto p = simulate_path(logistic_drift_only(1.0), 100.0, c, 0);
    for (double b : c.thresholds) {
        REQUIRE(p.crossing_time(b));
        // invert the flow: t = 2 (1/b - 1/x0)
        CHECK(*p.crossing_time(b) == doctest::Approx(2.0 * (1.0 / b - 1.0 / 100.0)).epsilon(2e-3));
    }
}

TEST_CASE("simulate_path: recorded values are nonnegative and descend continuously") {
    gen::for_all(30, 23, [](gen::Gen& g, std::size_t i) {
        ProcessSpec spec = logistic_csbp(g.log_uniform(0.1, 5), LevyMeasure::stable(g.uniform(1.1, 1.9), 1));
        SimConfig c = quiet(1e-2, 1.0, g.bits());
        const double x0 = g.log_uniform(0.1, 1e3);
        const auto p = simulate_path(spec, x0, c, g.index(1000));
        INFO("case " << i);
        for (double v : p.values) CHECK(v >= 0.0);
    });

    // gamma1 = 0 and no jumps: each decrement is exactly the Euler drift
    const auto p = simulate_path(logistic_drift_only(2.0), 1e3, quiet(1e-3, 1.0), 0);
    for (std::size_t k = 0; k + 1 < p.values.size(); ++k) {
        const double dt = p.times[k + 1] - p.times[k];
        const double expect = std::max(0.0, p.values[k] - p.values[k] * p.values[k] * dt);
        CHECK(p.values[k + 1] == doctest::Approx(expect).epsilon(1e-9).scale(p.values[k]));
    }
}

TEST_CASE("simulate_ensemble: singleton equals path 0") {
    const auto spec = logistic_csbp(1.0, LevyMeasure::stable(1.5, 1.0));
    const auto c = quiet(1e-2, 1.0, 9);
    const auto e = simulate_ensemble(spec, 40.0, c, 1);
    const auto p = simulate_path(spec, 40.0, c, 0);
    REQUIRE(e.paths.size() == 1);
    CHECK(e.paths[0].times == p.times);
    CHECK(e.paths[0].values == p.values);
}

TEST_CASE("simulate_ensemble: worker count never changes output") {
    const auto spec = logistic_csbp(1.0, LevyMeasure::stable(1.5, 1.0));
    auto c = quiet(1e-2, 1.0, 17);
    c.thresholds = {5.0};
    c.observation_times = {0.5};
    const auto a = simulate_ensemble(spec, 50.0, c, 64, 1);
    const auto b = simulate_ensemble(spec, 50.0, c, 64, 8);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(a.paths[i].values == b.paths[i].values);
        CHECK(a.paths[i].times == b.paths[i].times);
        CHECK(a.paths[i].crossings == b.paths[i].crossings);
    }
    CHECK(a.summary.moments[0].mean == b.summary.moments[0].mean);
}

TEST_CASE("simulate_ensemble: null dynamics stay constant") {
    const auto e = simulate_ensemble(null_spec(), 7.0, quiet(1e-2, 1.0), 100);
    for (const auto& p : e.paths) {
        for (double v : p.values) CHECK(v == 7.0);
    }
}

TEST_CASE("simulate_ensemble: mean tracks x0 e^{0.5 t} for linear drift") {
    auto c = quiet(1e-2, 1.0, 5);
    c.observation_times = {1.0};
    const std::size_t n = 4000;
    const auto e = simulate_ensemble(linear_mean_spec(), 10.0, c, n, 2);
    const auto& m = e.summary.moments.front();
    const double se = std::sqrt(m.variance / static_cast<double>(m.count));
    CHECK(std::abs(m.mean - 10.0 * std::exp(0.5)) <= 3.0 * se);
}

TEST_CASE("simulate: sup error halves with dt on the logistic ODE") {
    auto sup_error = [](double dt) {
        SimConfig c = quiet(dt, 1.0);
        c.adaptive = false;
        const auto p = simulate_path(logistic_drift_only(1.0), 10.0, c, 0);
        double sup = 0.0;
        for (std::size_t k = 0; k < p.times.size(); ++k) {
            sup = std::max(sup, std::abs(p.values[k] - logistic_flow(10.0, p.times[k])));
        }
        return sup;
    };
    const double e1 = sup_error(2e-3);
    const double e2 = sup_error(1e-3);
    const double e3 = sup_error(5e-4);
    CHECK(e1 / e2 >= 1.5);
    CHECK(e1 / e2 <= 2.5);
    CHECK(e2 / e3 >= 1.5);
    CHECK(e2 / e3 <= 2.5);
}
