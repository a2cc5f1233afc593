#include <doctest.h>

#include <cmath>

#include "entrance/quadrature.hpp"
#include "gen.hpp"

using namespace entrance;

TEST_CASE("finite-interval quadrature against antiderivatives") {
    CHECK(quad::integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(quad::integrate([](double x) { return std::exp(-x); }, 0.0, 30.0) ==
          doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-12));
    // z^{-0.9} on (0, 1] integrates to 10
    CHECK(quad::integrate_singular([](double z) { return std::pow(z, -0.9); }, 0.0, 1.0) ==
          doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("improper integral of power laws matches b^{1-p}/(p-1)") {
    gen::for_all(60, 11, [](gen::Gen& g, std::size_t i) {
        const double p = g.uniform(1.05, 5.0);
        const double a = g.log_uniform(0.1, 10.0);
        const double b = g.log_uniform(0.1, 100.0);
        const auto r = quad::integrate_to_infinity([&](double x) { return a * std::pow(x, -p); }, b);
        const double exact = a * std::pow(b, 1.0 - p) / (p - 1.0);
        INFO("case " << i << " p=" << p << " b=" << b);
        REQUIRE(r.finite);
        CHECK(std::abs(r.value - exact) <= 1e-6 * exact);
        CHECK(r.tail >= 0.0);
    });
}

TEST_CASE("improper integral reports divergence for 1/x and slower") {
    CHECK_FALSE(quad::integrate_to_infinity([](double x) { return 1.0 / x; }, 1.0).finite);
    CHECK_FALSE(
        quad::integrate_to_infinity([](double x) { return std::pow(x, -0.7); }, 2.0).finite);
}

TEST_CASE("improper integral of a non-power integrand") {
    // int_1^inf dx / (x^2 + x) = ln 2
    const auto r = quad::integrate_to_infinity([](double x) { return 1.0 / (x * x + x); }, 1.0);
    REQUIRE(r.finite);
    CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(1e-7));
}
