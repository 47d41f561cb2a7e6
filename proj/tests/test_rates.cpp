#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "contraction_lab/rates.hpp"

using namespace clab;

namespace {
// brute-force feasibility oracle: scan a (b, c) grid at the given resolution
// with rho pinned by the equality constraint
double best_b_grid_oracle(const RateConstants& k, double h, P3Variant variant,
                          double res = 1e-3) {
    for (double b = h - 0.5 + res; b < 0.0; b += res) {
        const double rho = b + 0.5 - h;
        for (double c = res; c <= 1.0; c += res) {
            const ConstraintReport r = check_constraints(RateParams{b, c, h, rho, k}, variant);
            if (r.feasible) return b;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

TEST_CASE("paper tuple for the diffusion problem is feasible") {
    const RateConstants k{3.0, 1.0, 2.0, 0.0, 0.0};
    const RateParams p{-0.1, 0.22, 0.05, 0.35, k};
    for (P3Variant v : {P3Variant::P3, P3Variant::P3prime}) {
        const ConstraintReport r = check_constraints(p, v);
        REQUIRE(r.feasible);
        REQUIRE(std::abs(r.p4) <= 1e-15);
        REQUIRE(r.p1 == Catch::Approx(0.01).margin(1e-12));
        REQUIRE(r.p2 == Catch::Approx(0.8 - 0.76).margin(1e-12));
    }
}

TEST_CASE("paper tuples for the potential problems across dimensions") {
    for (const auto& [d, c] : std::vector<std::pair<double, double>>{
             {1.0, 0.1}, {2.0, 0.15}, {3.0, 0.25}}) {
        const RateConstants k{3.0, 1.0, d, 1.0, 1.0};
        const RateParams p{-0.15, c, 0.05, 0.3, k};
        const ConstraintReport r = check_constraints(p, P3Variant::P3);
        INFO("d = " << d << ", c = " << c);
        REQUIRE(r.feasible);
        const ConstraintReport rp = check_constraints(p, P3Variant::P3prime);
        REQUIRE(rp.feasible);
    }
}

TEST_CASE("perturbing the diffusion tuple to b = -0.12 violates (P1)") {
    const RateConstants k{3.0, 1.0, 2.0, 0.0, 0.0};
    const ConstraintReport r =
        check_constraints(RateParams{-0.12, 0.22, 0.05, 0.33, k}, P3Variant::P3);
    REQUIRE(r.p1 == Catch::Approx(-0.01).margin(1e-12));
    REQUIRE_FALSE(r.feasible);
}

TEST_CASE("residuals are affine with the documented coefficients") {
    const RateConstants k{3.0, 1.0, 2.0, 0.5, 0.7};
    const RateParams base{-0.11, 0.2, 0.07, 0.1, k};
    const double eps = 1e-6;
    const auto res = [&](double b, double c, double h, double rho, int which) {
        const ConstraintReport r =
            check_constraints(RateParams{b, c, h, rho, k}, P3Variant::P3prime);
        switch (which) {
            case 1: return r.p1;
            case 2: return r.p2;
            case 3: return r.p3;
            case 4: return r.p4;
            default: return r.p5;
        }
    };
    // finite-difference slopes match the system's coefficients
    const double a = k.alpha, be = k.beta, d = k.d, kp = k.kappa, l = k.l;
    struct Probe {
        int which;
        double db, dc, dh, drho;
    };
    const Probe probes[] = {
        {1, 1.0, (kp + be) / d, 0.0, 0.0},
        {2, 2.0, -(2.0 * (a - be) / d + 1.0), -2.0, 0.0},
        {3, 2.0 + 2.0 * d / (2.0 * a + 2.0 * kp - d), 0.0, 2.0 * d / (2.0 * a + 2.0 * kp - d),
         -2.0 * l * d / (2.0 * a + 2.0 * kp - d)},
        {4, 1.0, 0.0, -1.0, -1.0},
        {5, 2.0 + d / (a + kp), 0.0, 0.0, -d / (a + kp) - l * d / (a + kp)},
    };
    for (const auto& p : probes) {
        const double fb = (res(base.b + eps, base.c, base.h, base.rho, p.which) -
                           res(base.b - eps, base.c, base.h, base.rho, p.which)) /
                          (2.0 * eps);
        const double fc = (res(base.b, base.c + eps, base.h, base.rho, p.which) -
                           res(base.b, base.c - eps, base.h, base.rho, p.which)) /
                          (2.0 * eps);
        const double fh = (res(base.b, base.c, base.h + eps, base.rho, p.which) -
                           res(base.b, base.c, base.h - eps, base.rho, p.which)) /
                          (2.0 * eps);
        const double fr = (res(base.b, base.c, base.h, base.rho + eps, p.which) -
                           res(base.b, base.c, base.h, base.rho - eps, p.which)) /
                          (2.0 * eps);
        REQUIRE(fb == Catch::Approx(p.db).margin(1e-9));
        REQUIRE(fc == Catch::Approx(p.dc).margin(1e-9));
        REQUIRE(fh == Catch::Approx(p.dh).margin(1e-9));
        REQUIRE(fr == Catch::Approx(p.drho).margin(1e-9));
    }
}

TEST_CASE("ill-posed constants are rejected") {
    RateConstants k{1.0, 1.0, 2.0, 0.0, 0.0};  // 2a + 2kappa - d = 0
    REQUIRE_THROWS_AS(check_constraints(RateParams{-0.1, 0.1, 0.05, 0.35, k}, P3Variant::P3),
                      std::invalid_argument);
    RateConstants neg{3.0, -1.0, 1.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(check_constraints(RateParams{-0.1, 0.1, 0.05, 0.35, neg}, P3Variant::P3),
                      std::invalid_argument);
}

TEST_CASE("solve_best_rate: diffusion constants beat the paper tuple") {
    const RateConstants k{3.0, 1.0, 2.0, 0.0, 0.0};
    const RateParams best = solve_best_rate(k, 0.05);
    REQUIRE(best.b <= -0.1);
    const ConstraintReport r = check_constraints(best, P3Variant::P3);
    REQUIRE(r.feasible);
    // minimality witness
    RateParams worse = best;
    worse.b -= 1e-3;
    worse.rho = worse.b + 0.5 - worse.h;
    REQUIRE_FALSE(check_constraints(worse, P3Variant::P3).feasible);
    // brute-force grid oracle agrees to its own resolution
    const double oracle_b = best_b_grid_oracle(k, 0.05, P3Variant::P3);
    REQUIRE(best.b <= oracle_b + 1e-9);
    REQUIRE(best.b >= oracle_b - 2e-3);
}

TEST_CASE("solve_best_rate respects the dominant-restriction bound when l = kappa = 0") {
    for (const auto& [alpha, beta, d] : std::vector<std::array<double, 3>>{
             {3.0, 1.0, 1.0}, {3.0, 1.0, 2.0}, {4.0, 1.5, 2.0}}) {
        for (double h : {0.05, 0.2}) {
            const RateConstants k{alpha, beta, d, 0.0, 0.0};
            const RateParams best = solve_best_rate(k, h);
            const double bound = -(1.0 - 2.0 * h) * beta / (2.0 * alpha + d);
            INFO("alpha=" << alpha << " beta=" << beta << " d=" << d << " h=" << h);
            REQUIRE(best.b >= bound - 1e-6);
            REQUIRE(best.b <= bound + 2e-3);  // frontier reached up to grid resolution
            REQUIRE(check_constraints(best, P3Variant::P3).feasible);
        }
    }
}

TEST_CASE("solve_best_rate: rate degenerates as h -> 1/2") {
    const RateConstants k{3.0, 1.0, 2.0, 0.0, 0.0};
    const RateParams best = solve_best_rate(k, 0.49);
    REQUIRE(best.b > -0.01);
    REQUIRE(best.b < 0.0);
    REQUIRE(check_constraints(best, P3Variant::P3).feasible);
    REQUIRE_THROWS_AS(solve_best_rate(k, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(solve_best_rate(k, 0.0), std::invalid_argument);
}

TEST_CASE("solve_best_rate under the strengthened (P3)' variant") {
    const RateConstants k{3.0, 1.0, 1.0, 1.0, 1.0};
    const RateParams best = solve_best_rate(k, 0.05, P3Variant::P3prime);
    REQUIRE(check_constraints(best, P3Variant::P3prime).feasible);
    REQUIRE(best.b <= -0.15);  // at least as good as the paper's potential tuple
    const double oracle_b = best_b_grid_oracle(k, 0.05, P3Variant::P3prime);
    REQUIRE(best.b <= oracle_b + 1e-8);
}

TEST_CASE("check_constraints runs fast enough for the acceptance budget") {
    const RateConstants k{3.0, 1.0, 2.0, 0.0, 0.0};
    const RateParams p{-0.1, 0.22, 0.05, 0.35, k};
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
        volatile bool ok = check_constraints(p, P3Variant::P3).feasible;
        (void)ok;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double per_call =
        std::chrono::duration<double, std::milli>(t1 - t0).count() / 1000.0;
    REQUIRE(per_call < 1.0);  // < 1 ms each
}
