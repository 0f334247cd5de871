#include <doctest.h>

#include <cmath>

#include "geomotion/barriers.hpp"
#include "geomotion/errors.hpp"

using namespace geomotion;

TEST_CASE("inverse barrier values") {
    const Barrier inv = Barrier::inverse_power(1.0);
    CHECK(barrier_value(inv, 1.0) == doctest::Approx(1.0));
    CHECK(barrier_value(inv, 0.5) == doctest::Approx(2.0));
    CHECK(barrier_value(inv, 10.0) == doctest::Approx(0.1));

    const Barrier inv3 = Barrier::inverse_power(2.0, 3);
    CHECK(barrier_value(inv3, 0.5) == doctest::Approx(2.0 / 0.125));
}

TEST_CASE("exponential barrier is finite at the region") {
    const Barrier exp_b = Barrier::exponential(1.0, 0.5);
    CHECK(barrier_value(exp_b, 0.0) == doctest::Approx(1.0));  // = sigma
    // Negative distances (penetration) evaluate at s = 0.
    CHECK(barrier_value(exp_b, -0.3) == doctest::Approx(1.0));
    // Vanishes quickly: below 2e-11 at five widths.
    CHECK(barrier_value(Barrier::exponential(1.0, 1.0), 5.0) < 2e-11);
}

TEST_CASE("strict barriers reject non-positive distances") {
    CHECK_THROWS_AS(barrier_value(Barrier::inverse_power(1.0), 0.0), InsideRegionError);
    CHECK_THROWS_AS(barrier_value(Barrier::logarithmic(1.0), -1.0), InsideRegionError);
    CHECK_THROWS_AS(barrier_gradient(Barrier::inverse_power(1.0), 0.0), InsideRegionError);
}

TEST_CASE("barrier gradients") {
    CHECK(barrier_gradient(Barrier::inverse_power(1.0), 2.0) == doctest::Approx(-0.25));
    CHECK(barrier_gradient(Barrier::exponential(1.0, 1.0), 0.0) == doctest::Approx(0.0));

    // All families match central finite differences.
    const Barrier barriers[] = {Barrier::inverse_power(1.0), Barrier::inverse_power(0.7, 2),
                                Barrier::logarithmic(1.3), Barrier::exponential(2.0, 0.8)};
    for (const Barrier& b : barriers) {
        for (double s : {0.1, 1.0, 10.0}) {
            const double h = 1e-7 * std::max(s, 1.0);
            const double fd = (barrier_value(b, s + h) - barrier_value(b, s - h)) / (2.0 * h);
            CHECK(barrier_gradient(b, s) ==
                  doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("strictness predicate") {
    CHECK(is_strict(Barrier::inverse_power(1.0)));
    CHECK(is_strict(Barrier::logarithmic(1.0)));
    CHECK_FALSE(is_strict(Barrier::exponential(1.0, 1.0)));
}

TEST_CASE("monotonicity and divergence") {
    const Barrier inv = Barrier::inverse_power(1.0);
    const Barrier logb = Barrier::logarithmic(1.0);
    const Barrier expb = Barrier::exponential(1.0, 0.7);
    double prev_inv = barrier_value(inv, 0.01);
    double prev_log = barrier_value(logb, 0.01);
    for (double s = 0.02; s <= 1.0; s += 0.01) {
        const double vi = barrier_value(inv, s);
        const double vl = barrier_value(logb, s);
        CHECK(vi < prev_inv);
        CHECK(vl < prev_log);
        prev_inv = vi;
        prev_log = vl;
    }
    double prev_exp = barrier_value(expb, 0.0);
    for (double s = 0.05; s <= 5.0; s += 0.05) {
        const double ve = barrier_value(expb, s);
        CHECK(ve < prev_exp);
        prev_exp = ve;
    }
    // Numerical divergence: above the threshold within (sigma/1e6)^(1/n).
    CHECK(barrier_value(inv, 0.9e-6) > Barrier::kDivergenceThreshold);
    CHECK(barrier_value(Barrier::inverse_power(1.0, 2), 0.9e-3) > Barrier::kDivergenceThreshold);
}
