#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "contraction_lab/mittag_leffler.hpp"
#include "oracles.hpp"

using clab::mittag_leffler;

TEST_CASE("E_{1,1} is the exponential") {
    for (double z : {-2.0, 0.0, 1.0})
        REQUIRE(mittag_leffler(1.0, 1.0, z) == Catch::Approx(std::exp(z)).epsilon(1e-12));
    REQUIRE(mittag_leffler(1.0, 1.0, 1.0) ==
            Catch::Approx(2.718281828459045).epsilon(1e-12));
}

TEST_CASE("E(0) = 1/Gamma(b)") {
    for (double a : {0.3, 0.5, 0.9, 1.3, 1.9})
        for (double b : {0.4, 1.0, 1.7, 3.2})
            REQUIRE(mittag_leffler(a, b, 0.0) ==
                    Catch::Approx(1.0 / std::tgamma(b)).epsilon(1e-13));
}

TEST_CASE("series range agrees with the high-precision series oracle") {
    REQUIRE(mittag_leffler(0.5, 1.0, -1.0) ==
            Catch::Approx(oracles::ml_series(0.5, 1.0, -1.0)).margin(1e-10));
    // closed form E_{1/2,1}(-x) = e^{x^2} erfc(x)
    REQUIRE(mittag_leffler(0.5, 1.0, -1.0) ==
            Catch::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-12));
    REQUIRE(mittag_leffler(0.5, 1.0, -2.0) ==
            Catch::Approx(std::exp(4.0) * std::erfc(2.0)).epsilon(1e-12));

    for (double a : {0.3, 0.5, 0.8})
        for (double b : {a, 1.0})
            for (double z = -4.0; z <= 2.0 + 1e-9; z += 0.5) {
                const double got = mittag_leffler(a, b, z);
                const double want = oracles::ml_series(a, b, z);
                REQUIRE(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
            }
}

TEST_CASE("integral branch matches the oracle beyond the switch") {
    const struct {
        double a, b, z;
    } cases[] = {{0.5, 1.0, -5.0},  {0.5, 0.5, -5.0}, {0.5, 1.0, -12.0}, {0.8, 0.8, -6.0},
                 {0.8, 1.0, -20.0}, {0.3, 1.0, -6.0}, {0.3, 0.3, -5.0},  {0.9, 1.0, -8.0},
                 {0.6, 1.0, -45.0}};
    for (const auto& c : cases) {
        const double got = mittag_leffler(c.a, c.b, c.z);
        const double want = oracles::ml_series(c.a, c.b, c.z);
        REQUIRE(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    }
    // closed form deep in the integral branch
    REQUIRE(mittag_leffler(0.5, 1.0, -6.0) ==
            Catch::Approx(std::exp(36.0) * std::erfc(6.0)).epsilon(1e-9));
}

TEST_CASE("recurrence consistency inside the integral branch") {
    // E_{a,a+b}(z) = (E_{a,b}(z) - 1/Gamma(b)) / z with a = b = 0.5
    for (double z : {-5.0, -9.0, -17.0}) {
        const double lhs = mittag_leffler(0.5, 1.0, z);
        const double rhs =
            (mittag_leffler(0.5, 0.5, z) - 1.0 / std::tgamma(0.5)) / z;
        REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("b-reduction handles b >= 1 + a on the negative axis") {
    for (double b : {1.8, 2.0, 3.5}) {
        const double got = mittag_leffler(0.5, b, -6.0);
        const double want = oracles::ml_series(0.5, b, -6.0);
        REQUIRE(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("a in (1,2) stays on the series branch") {
    for (double z : {-30.0, -10.0, 3.0})
        REQUIRE(mittag_leffler(1.5, 1.0, z) ==
                Catch::Approx(oracles::ml_series(1.5, 1.0, z)).margin(1e-10));
}

TEST_CASE("continuity across the series/integral switch at z = -4") {
    for (double a : {0.3, 0.5, 0.8, 0.95})
        for (double b : {a, 1.0}) {
            const double series_side = mittag_leffler(a, b, -4.0);
            const double integral_side = mittag_leffler(a, b, -4.0 - 1e-12);
            REQUIRE(std::abs(series_side - integral_side) < 1e-9);
        }
}

TEST_CASE("argument validation") {
    REQUIRE_THROWS_AS(mittag_leffler(0.0, 1.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mittag_leffler(2.0, 1.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mittag_leffler(-0.5, 1.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mittag_leffler(0.5, 0.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mittag_leffler(0.5, -1.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mittag_leffler(0.5, 1.0, 50.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mittag_leffler(0.5, 1.0, -50.5), std::invalid_argument);
}
