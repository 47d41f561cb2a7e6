#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "contraction_lab/mittag_leffler.hpp"
#include "contraction_lab/pde.hpp"

using namespace clab;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<double> const_f(int dim, int n, double v) {
    const std::size_t npa = static_cast<std::size_t>(n + 2);
    return std::vector<double>(dim == 1 ? npa : npa * npa, v);
}

// L2 error against a closed-form solution, trapezoid on the solver grid
template <class Exact>
double l2_error(const GridFn& u, const Exact& exact) {
    GridFn diff = u;
    const int npa = u.nodes_per_axis();
    const double h = u.h();
    if (u.dim == 1) {
        for (int i = 0; i < npa; ++i) diff.at(i) -= exact(Point{i * h, 0.0});
    } else {
        for (int iy = 0; iy < npa; ++iy)
            for (int ix = 0; ix < npa; ++ix) diff.at(ix, iy) -= exact(Point{ix * h, iy * h});
    }
    return l2_norm(diff);
}

// backward Euler heat stepper (classical limit oracle for the L1 scheme)
GridFn heat_backward_euler_1d(int n, double T, int steps, double c,
                              const std::vector<double>& u0_interior) {
    const double h = 1.0 / (n + 1);
    const double dt = T / steps;
    const double ih2 = 1.0 / (h * h);
    std::vector<double> u = u0_interior;
    // (I/dt - Laplace + c) u^{k+1} = u^k/dt, solved by the Thomas algorithm
    std::vector<double> a(n, -ih2), b(n, 1.0 / dt + 2.0 * ih2 + c), cc(n, -ih2), d(n), x(n);
    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < n; ++i) d[i] = u[static_cast<std::size_t>(i)] / dt;
        std::vector<double> bp = b, dp = d;
        for (int i = 1; i < n; ++i) {
            const double m = a[static_cast<std::size_t>(i)] / bp[static_cast<std::size_t>(i - 1)];
            bp[static_cast<std::size_t>(i)] -= m * cc[static_cast<std::size_t>(i - 1)];
            dp[static_cast<std::size_t>(i)] -= m * dp[static_cast<std::size_t>(i - 1)];
        }
        x[static_cast<std::size_t>(n - 1)] =
            dp[static_cast<std::size_t>(n - 1)] / bp[static_cast<std::size_t>(n - 1)];
        for (int i = n - 2; i >= 0; --i)
            x[static_cast<std::size_t>(i)] = (dp[static_cast<std::size_t>(i)] -
                                              cc[static_cast<std::size_t>(i)] *
                                                  x[static_cast<std::size_t>(i + 1)]) /
                                             bp[static_cast<std::size_t>(i)];
        u = x;
    }
    GridFn out = GridFn::zeros(1, n);
    for (int i = 1; i <= n; ++i) out.at(i) = u[static_cast<std::size_t>(i - 1)];
    return out;
}
}  // namespace

TEST_CASE("diffusion: manufactured solution converges at second order") {
    ForwardProblem prob;
    prob.kind = ForwardKind::DiffusionCoefficient;
    prob.dim = 2;
    prob.source = SourceSpec::custom([](const Point& x) {
        return 2.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    });
    const auto exact = [](const Point& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };

    std::vector<double> errs;
    for (int n : {32, 64, 128}) {
        prob.grid_n = n;
        const SolveOutput out = solve_diffusion(prob, const_f(2, n, 1.0));
        errs.push_back(l2_error(out.grid, exact));
    }
    REQUIRE(std::log2(errs[0] / errs[1]) > 1.9);
    REQUIRE(std::log2(errs[1] / errs[2]) > 1.9);
}

TEST_CASE("diffusion: constant-coefficient scaling u(c) = u(1)/c") {
    ForwardProblem prob;
    prob.kind = ForwardKind::DiffusionCoefficient;
    prob.dim = 2;
    prob.grid_n = 24;
    prob.source = SourceSpec::sine(1.0, 1, 1);
    const SolveOutput u1 = solve_diffusion(prob, const_f(2, 24, 1.0));
    const SolveOutput uc = solve_diffusion(prob, const_f(2, 24, 2.5));
    for (std::size_t i = 0; i < u1.grid.values.size(); ++i)
        REQUIRE(uc.grid.values[i] * 2.5 == Catch::Approx(u1.grid.values[i]).margin(1e-9));
}

TEST_CASE("diffusion: self-convergence ratio under grid doubling") {
    ForwardProblem prob;
    prob.kind = ForwardKind::DiffusionCoefficient;
    prob.dim = 2;
    prob.source = SourceSpec::constant(1.0);
    const auto fvar = [](int n) {
        GridFn g = GridFn::zeros(2, n);
        const double h = g.h();
        for (int iy = 0; iy < n + 2; ++iy)
            for (int ix = 0; ix < n + 2; ++ix)
                g.at(ix, iy) = 1.0 + 0.5 * std::sin(kPi * ix * h) * std::sin(kPi * iy * h);
        return g.values;
    };
    std::vector<GridFn> sols;
    for (int n : {32, 64, 128}) {
        prob.grid_n = n;
        sols.push_back(solve_diffusion(prob, fvar(n)).grid);
    }
    const auto diff_l2 = [](const GridFn& a, const GridFn& b) {
        const int nq = 256;
        double acc = 0.0;
        for (int iy = 0; iy < nq; ++iy)
            for (int ix = 0; ix < nq; ++ix) {
                const Point x{(ix + 0.5) / nq, (iy + 0.5) / nq};
                const double d = a.eval(x) - b.eval(x);
                acc += d * d / (static_cast<double>(nq) * nq);
            }
        return std::sqrt(acc);
    };
    const double d1 = diff_l2(sols[0], sols[1]);
    const double d2 = diff_l2(sols[1], sols[2]);
    REQUIRE(d1 / d2 == Catch::Approx(4.0).epsilon(0.3));
}

TEST_CASE("diffusion: discrete maximum principle") {
    ForwardProblem prob;
    prob.kind = ForwardKind::DiffusionCoefficient;
    prob.dim = 2;
    prob.grid_n = 20;
    prob.source = SourceSpec::custom(
        [](const Point& x) { return 0.2 + std::abs(std::sin(3.0 * x[0] + x[1])); });
    GridFn f = GridFn::zeros(2, 20);
    for (int iy = 0; iy < 22; ++iy)
        for (int ix = 0; ix < 22; ++ix)
            f.at(ix, iy) = 1.5 + std::sin(2.0 * ix * 0.3) * std::cos(iy * 0.2) * 0.4;
    const SolveOutput out = solve_diffusion(prob, f.values);
    for (double v : out.grid.values) REQUIRE(v >= -1e-12);
}

TEST_CASE("potential d=1: manufactured solutions") {
    ForwardProblem prob;
    prob.kind = ForwardKind::EllipticPotential;
    prob.dim = 1;

    SECTION("g = (pi^2+1) sin(pi x), f = 1 -> u = sin(pi x), order 2, small at 256") {
        prob.source = SourceSpec::sine(kPi * kPi + 1.0, 1);
        std::vector<double> errs;
        for (int n : {32, 64, 128, 256}) {
            prob.grid_n = n;
            const SolveOutput out = solve_potential(prob, const_f(1, n, 1.0));
            errs.push_back(
                l2_error(out.grid, [](const Point& x) { return std::sin(kPi * x[0]); }));
        }
        REQUIRE(std::log2(errs[0] / errs[1]) > 1.9);
        REQUIRE(std::log2(errs[1] / errs[2]) > 1.9);
        REQUIRE(errs[3] < 1e-4);
    }

    SECTION("zero source gives the zero solution") {
        prob.grid_n = 32;
        prob.source = SourceSpec::constant(0.0);
        const SolveOutput out = solve_potential(prob, const_f(1, 32, 1.7));
        for (double v : out.grid.values) REQUIRE(v == 0.0);
    }

    SECTION("g = 1, f = 1 -> u = 1 - cosh(x - 1/2)/cosh(1/2)") {
        prob.grid_n = 256;
        prob.source = SourceSpec::constant(1.0);
        const SolveOutput out = solve_potential(prob, const_f(1, 256, 1.0));
        double max_err = 0.0;
        for (int i = 0; i < 258; ++i) {
            const double x = i * out.grid.h();
            const double exact = 1.0 - std::cosh(x - 0.5) / std::cosh(0.5);
            max_err = std::max(max_err, std::abs(out.grid.at(i) - exact));
        }
        REQUIRE(max_err < 1e-3);
    }
}

TEST_CASE("potential d=2: manufactured solution converges at second order") {
    ForwardProblem prob;
    prob.kind = ForwardKind::EllipticPotential;
    prob.dim = 2;
    prob.source = SourceSpec::custom([](const Point& x) {
        return (2.0 * kPi * kPi + 1.0) * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    });
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        prob.grid_n = n;
        const SolveOutput out = solve_potential(prob, const_f(2, n, 1.0));
        errs.push_back(l2_error(out.grid, [](const Point& x) {
            return std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
        }));
    }
    REQUIRE(std::log2(errs[0] / errs[1]) > 1.9);
    REQUIRE(std::log2(errs[1] / errs[2]) > 1.9);
}

TEST_CASE("potential: discrete comparison principle in f") {
    ForwardProblem prob;
    prob.kind = ForwardKind::EllipticPotential;
    prob.dim = 1;
    prob.grid_n = 48;
    prob.source = SourceSpec::custom(
        [](const Point& x) { return 1.0 + 0.3 * std::sin(5.0 * x[0]); });
    std::vector<double> f1 = const_f(1, 48, 1.0), f2 = const_f(1, 48, 1.0);
    for (std::size_t i = 0; i < f1.size(); ++i) {
        f2[i] = 1.0 + 0.2 * std::sin(0.1 * static_cast<double>(i));
        f1[i] = f2[i] + 0.5 + 0.3 * std::cos(0.07 * static_cast<double>(i));  // f1 >= f2
    }
    const SolveOutput u1 = solve_potential(prob, f1);
    const SolveOutput u2 = solve_potential(prob, f2);
    for (std::size_t i = 0; i < u1.grid.values.size(); ++i)
        REQUIRE(u1.grid.values[i] <= u2.grid.values[i] + 1e-12);
}

TEST_CASE("subdiffusion: constant-potential terminal slice matches Mittag-Leffler") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 1;
    prob.grid_n = 128;
    prob.time_steps = 2048;
    prob.frac_order = 0.5;
    prob.T = 1.0;
    prob.boundary_value = 0.0;
    prob.source = SourceSpec::constant(0.0);
    prob.u0 = SourceSpec::sine(1.0, 1);

    const double c = 1.0;
    const SolveOutput out = solve_subdiffusion(prob, const_f(1, 128, c));
    const double amp = mittag_leffler(0.5, 1.0, -(kPi * kPi + c));
    const double rel =
        l2_error(out.grid, [&](const Point& x) { return amp * std::sin(kPi * x[0]); }) /
        (std::abs(amp) / std::sqrt(2.0));
    REQUIRE(rel < 0.01);
}

TEST_CASE("subdiffusion: a -> 1 recovers the classical heat equation") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 1;
    prob.grid_n = 64;
    prob.time_steps = 1024;
    prob.frac_order = 0.999;
    prob.T = 0.1;
    prob.boundary_value = 0.0;
    prob.source = SourceSpec::constant(0.0);
    prob.u0 = SourceSpec::sine(1.0, 1);

    const double c = 1.0;
    const SolveOutput out = solve_subdiffusion(prob, const_f(1, 64, c));
    std::vector<double> u0(64);
    for (int i = 1; i <= 64; ++i) u0[static_cast<std::size_t>(i - 1)] = std::sin(kPi * i / 65.0);
    const GridFn heat = heat_backward_euler_1d(64, 0.1, 1024, c, u0);
    REQUIRE(l2_distance(out.grid, heat) / l2_norm(heat) < 0.01);
}

TEST_CASE("subdiffusion: constant data is a steady state") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 1;
    prob.grid_n = 32;
    prob.time_steps = 64;
    prob.frac_order = 0.7;
    prob.boundary_value = 0.8;
    prob.source = SourceSpec::constant(0.0);
    prob.u0 = SourceSpec::constant(0.8);
    const SolveOutput out = solve_subdiffusion(prob, const_f(1, 32, 0.0));
    for (double v : out.grid.values) REQUIRE(v == Catch::Approx(0.8).margin(1e-10));
}

TEST_CASE("subdiffusion: positivity with positive data") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 1;
    prob.grid_n = 48;
    prob.time_steps = 256;
    prob.frac_order = 0.6;
    prob.boundary_value = 1.0;
    prob.source = SourceSpec::custom([](const Point& x) { return 0.1 + 0.1 * x[0]; });
    prob.u0 = SourceSpec::constant(1.0);
    GridFn f = GridFn::zeros(1, 48);
    for (int i = 0; i < 50; ++i) f.at(i) = 1.0 + 0.8 * std::sin(0.4 * i);
    const SolveOutput out = solve_subdiffusion(prob, f.values);
    double minimum = 1e300;
    for (double v : out.grid.values) minimum = std::min(minimum, v);
    REQUIRE(minimum > 0.0);  // empirical m_T
}

TEST_CASE("subdiffusion: temporal accuracy against the spectral reference") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 1;
    prob.grid_n = 256;  // fine in space so the time error dominates
    prob.frac_order = 0.5;
    prob.T = 1.0;
    prob.boundary_value = 0.0;
    prob.source = SourceSpec::constant(0.0);
    prob.u0 = SourceSpec::sine(1.0, 1);
    const double mu = kPi * kPi + 1.0;
    const double amp = mittag_leffler(0.5, 1.0, -mu);

    std::vector<double> errs;
    for (int steps : {64, 128, 256}) {
        prob.time_steps = steps;
        const SolveOutput out = solve_subdiffusion(prob, const_f(1, 256, 1.0));
        errs.push_back(
            l2_error(out.grid, [&](const Point& x) { return amp * std::sin(kPi * x[0]); }));
    }
    REQUIRE(std::log2(errs[0] / errs[1]) >= 0.5);  // conservative bound: >= a
    REQUIRE(std::log2(errs[1] / errs[2]) >= 0.5);
}

TEST_CASE("subdiffusion: argument and compatibility validation") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 1;
    prob.grid_n = 16;
    prob.frac_order = 1.2;
    REQUIRE_THROWS_AS(prob.validate(), std::invalid_argument);
    prob.frac_order = 0.5;
    prob.boundary_value = 0.5;
    prob.u0 = SourceSpec::constant(0.2);  // u0 != m_g on the boundary
    REQUIRE_THROWS_AS(solve_subdiffusion(prob, const_f(1, 16, 1.0)), std::invalid_argument);
}

TEST_CASE("forward_apply: link midpoint reproduces constant-coefficient solves") {
    LinkSpec link;
    link.lambda_lo = 1.0;
    link.lambda_hi = 3.0;

    SECTION("potential") {
        ForwardProblem prob;
        prob.kind = ForwardKind::EllipticPotential;
        prob.dim = 1;
        prob.grid_n = 40;
        prob.source = SourceSpec::sine(1.0, 1);
        const SolveOutput via_link = forward_apply(prob, link, zero_field(make_basis(1, 8)));
        const SolveOutput direct = solve_potential(prob, const_f(1, 40, 2.0));
        for (std::size_t i = 0; i < direct.grid.values.size(); ++i)
            REQUIRE(via_link.grid.values[i] == Catch::Approx(direct.grid.values[i]).margin(1e-12));
    }
    SECTION("diffusion") {
        ForwardProblem prob;
        prob.kind = ForwardKind::DiffusionCoefficient;
        prob.dim = 2;
        prob.grid_n = 16;
        prob.source = SourceSpec::sine(1.0, 1, 1);
        const SolveOutput via_link = forward_apply(prob, link, zero_field(make_basis(2, 4)));
        const SolveOutput direct = solve_diffusion(prob, const_f(2, 16, 2.0));
        for (std::size_t i = 0; i < direct.grid.values.size(); ++i)
            REQUIRE(via_link.grid.values[i] == Catch::Approx(direct.grid.values[i]).margin(1e-12));
    }
    SECTION("subdiffusion") {
        ForwardProblem prob;
        prob.kind = ForwardKind::SubdiffusionPotential;
        prob.dim = 1;
        prob.grid_n = 24;
        prob.time_steps = 32;
        prob.boundary_value = 0.0;
        prob.source = SourceSpec::constant(0.3);
        prob.u0 = SourceSpec::sine(0.5, 1);
        const SolveOutput via_link = forward_apply(prob, link, zero_field(make_basis(1, 8)));
        const SolveOutput direct = solve_subdiffusion(prob, const_f(1, 24, 2.0));
        for (std::size_t i = 0; i < direct.grid.values.size(); ++i)
            REQUIRE(via_link.grid.values[i] == Catch::Approx(direct.grid.values[i]).margin(1e-12));
    }
}

TEST_CASE("forward_apply: determinism and Lipschitz smoke test") {
    LinkSpec link;
    ForwardProblem prob;
    prob.kind = ForwardKind::EllipticPotential;
    prob.dim = 1;
    prob.grid_n = 64;
    prob.source = SourceSpec::constant(1.0);

    auto basis = make_basis(1, 8);
    std::vector<double> c(8);
    Rng rng(55);
    for (auto& v : c) v = 0.3 * rng.normal();
    const SpectralField f(basis, c);

    const SolveOutput a = forward_apply(prob, link, f);
    const SolveOutput b = forward_apply(prob, link, f);
    REQUIRE(a.grid.values == b.grid.values);

    std::vector<double> cp = c;
    cp[2] += 1e-6;
    const SolveOutput p = forward_apply(prob, link, SpectralField(basis, cp));
    const double change = l2_distance(a.grid, p.grid);
    REQUIRE(change > 0.0);
    REQUIRE(change < 1e-4);  // O(1e-6) perturbation cannot move the output much
}

TEST_CASE("forward_apply: linear surrogate and the uniform bound check") {
    ForwardProblem prob;
    prob.kind = ForwardKind::Linear;
    prob.dim = 1;
    prob.grid_n = 64;
    LinkSpec link;

    auto basis = make_basis(1, 4);
    std::vector<double> c{0.5, -0.25, 0.0, 0.1};
    const SpectralField f(basis, c);
    const SolveOutput out = forward_apply(prob, link, f);
    REQUIRE(out.eval(Point{0.3333, 0.0}) == Catch::Approx(evaluate(f, Point{0.3333, 0.0})));

    ForwardProblem bounded = prob;
    bounded.u_bound = 1e-3;
    REQUIRE_THROWS_AS(forward_apply(bounded, link, f), SolverError);
}

TEST_CASE("subdiffusion d=2: spectral reference on the first tensor mode") {
    ForwardProblem prob;
    prob.kind = ForwardKind::SubdiffusionPotential;
    prob.dim = 2;
    prob.grid_n = 32;
    prob.time_steps = 512;
    prob.frac_order = 0.5;
    prob.T = 1.0;
    prob.boundary_value = 0.0;
    prob.source = SourceSpec::constant(0.0);
    prob.u0 = SourceSpec::sine(1.0, 1, 1);

    const double c = 1.0;
    const SolveOutput out = solve_subdiffusion(prob, const_f(2, 32, c));
    const double amp = mittag_leffler(0.5, 1.0, -(2.0 * kPi * kPi + c));
    const double rel = l2_error(out.grid, [&](const Point& x) {
                           return amp * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
                       }) /
                       (std::abs(amp) / 2.0);
    REQUIRE(rel < 0.02);
}

TEST_CASE("uniform boundedness of forward outputs over prior draws") {
    const LinkSpec link;
    PriorSpec prior1;
    prior1.alpha = 3.0;
    prior1.basis = make_basis(1, 12);
    PriorSpec prior2;
    prior2.alpha = 3.0;
    prior2.basis = make_basis(2, 4);

    const auto report_max = [&](const ForwardProblem& prob, const PriorSpec& prior,
                                int count, std::uint64_t seed) {
        double worst = 0.0;
        for (const auto& f : sample_prior(prior, count, seed))
            worst = std::max(worst, forward_apply(prob, link, f).max_abs());
        return worst;
    };

    ForwardProblem pot;
    pot.kind = ForwardKind::EllipticPotential;
    pot.dim = 1;
    pot.grid_n = 32;
    pot.source = SourceSpec::constant(1.0);
    // -u'' + f u = 1 with f >= 1: comparison against f == 1 bounds u by ~0.11
    REQUIRE(report_max(pot, prior1, 100, 61) < 0.12);

    ForwardProblem dif;
    dif.kind = ForwardKind::DiffusionCoefficient;
    dif.dim = 2;
    dif.grid_n = 16;
    dif.source = SourceSpec::constant(1.0);
    // -div(f grad u) = 1 with f >= 1: bounded by the f == 1 Poisson solution
    REQUIRE(report_max(dif, prior2, 100, 62) < 0.08);

    ForwardProblem sub;
    sub.kind = ForwardKind::SubdiffusionPotential;
    sub.dim = 1;
    sub.grid_n = 24;
    sub.time_steps = 64;
    sub.frac_order = 0.5;
    sub.boundary_value = 1.0;
    sub.source = SourceSpec::constant(0.5);
    sub.u0 = SourceSpec::constant(1.0);
    // positive data, f in (1,3): the state stays within the steady envelope
    REQUIRE(report_max(sub, prior1, 30, 63) < 1.5);
}
