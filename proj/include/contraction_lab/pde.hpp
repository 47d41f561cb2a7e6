#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "contraction_lab/grid.hpp"
#include "contraction_lab/prior.hpp"
#include "contraction_lab/spectral.hpp"

namespace clab {

enum class ForwardKind { Linear, DiffusionCoefficient, EllipticPotential, SubdiffusionPotential };

// Evaluable scalar data term (source g/h, initial condition u0); the named
// kinds round-trip through the experiment config, Custom is for tests.
struct SourceSpec {
    enum class Kind { Constant, Sine, Field, Custom };
    Kind kind = Kind::Constant;
    double value = 0.0;                              // Constant
    double amplitude = 1.0;                          // Sine
    int k1 = 1, k2 = 1;                              // Sine frequencies
    std::shared_ptr<const SpectralField> field;      // Field
    std::function<double(const Point&)> fn;          // Custom

    static SourceSpec constant(double v) {
        SourceSpec s;
        s.kind = Kind::Constant;
        s.value = v;
        return s;
    }
    static SourceSpec sine(double amplitude, int k1, int k2 = 1) {
        SourceSpec s;
        s.kind = Kind::Sine;
        s.amplitude = amplitude;
        s.k1 = k1;
        s.k2 = k2;
        return s;
    }
    static SourceSpec of_field(SpectralField f) {
        SourceSpec s;
        s.kind = Kind::Field;
        s.field = std::make_shared<const SpectralField>(std::move(f));
        return s;
    }
    static SourceSpec custom(std::function<double(const Point&)> f) {
        SourceSpec s;
        s.kind = Kind::Custom;
        s.fn = std::move(f);
        return s;
    }

    double operator()(int dim, const Point& x) const {
        const double pi = 3.14159265358979323846;
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::Sine: {
                double v = amplitude * std::sin(k1 * pi * x[0]);
                if (dim == 2) v *= std::sin(k2 * pi * x[1]);
                return v;
            }
            case Kind::Field: return evaluate(*field, x);
            case Kind::Custom: return fn(x);
        }
        return 0.0;
    }
};

struct ForwardProblem {
    ForwardKind kind = ForwardKind::EllipticPotential;
    int dim = 1;
    int grid_n = 64;
    SourceSpec source = SourceSpec::constant(1.0);  // g (elliptic) or h (subdiffusion)

    // subdiffusion data
    double frac_order = 0.5;  // Caputo order a in (0,1)
    double T = 1.0;
    SourceSpec u0 = SourceSpec::constant(0.0);
    double boundary_value = 0.0;  // m_g, constant Dirichlet data
    int time_steps = 256;

    std::optional<double> u_bound;  // configured uniform bound U

    void validate() const {
        require(dim == 1 || dim == 2, "ForwardProblem: dim must be 1 or 2");
        if (kind != ForwardKind::Linear)
            require(grid_n >= 8, "ForwardProblem: grid_n must be >= 8");
        else
            require(grid_n >= 1, "ForwardProblem: grid_n must be >= 1");
        if (kind == ForwardKind::DiffusionCoefficient)
            require(dim == 2, "ForwardProblem: the diffusion problem is posed on d = 2");
        if (kind == ForwardKind::SubdiffusionPotential) {
            require(frac_order > 0.0 && frac_order < 1.0,
                    "ForwardProblem: frac_order must lie in (0,1)");
            require(T > 0.0, "ForwardProblem: T must be positive");
            require(time_steps >= 1, "ForwardProblem: time_steps must be >= 1");
            require(boundary_value >= 0.0, "ForwardProblem: boundary value m_g must be >= 0");
        }
    }
};

struct SolveOutput {
    GridFn grid;
    std::shared_ptr<const SpectralField> exact_field;  // set for the linear map

    double eval(const Point& x) const {
        return exact_field ? evaluate(*exact_field, x) : grid.eval(x);
    }
    double max_abs() const { return grid.max_abs(); }
};

namespace pde_detail {

// Jacobi-preconditioned conjugate gradient on the interior unknowns.
// apply(x, y): y = A x. Throws SolverError if the relative residual does not
// reach reltol within the iteration cap.
template <class Apply>
inline void pcg(const Apply& apply, const std::vector<double>& diag, const std::vector<double>& b,
                std::vector<double>& x, double reltol = 1e-10, int maxit = 0) {
    const std::size_t n = b.size();
    if (maxit <= 0) maxit = static_cast<int>(10 * n) + 2000;
    x.assign(n, 0.0);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return;

    std::vector<double> r = b, z(n), p(n), Ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
    double res = bnorm;
    for (int it = 0; it < maxit; ++it) {
        apply(p, Ap);
        double pAp = 0.0;
        for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        const double alpha = rz / pAp;
        res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
            res += r[i] * r[i];
        }
        res = std::sqrt(res);
        if (res <= reltol * bnorm) return;
        double rz_new = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = r[i] / diag[i];
            rz_new += r[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("conjugate gradient failed to converge", res / bnorm, maxit);
}

inline double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

inline std::vector<double> sample_source(const SourceSpec& s, int dim, int n_interior) {
    GridFn g = GridFn::zeros(dim, n_interior);
    const int n = g.nodes_per_axis();
    const double h = g.h();
    if (dim == 1) {
        for (int i = 0; i < n; ++i) g.at(i) = s(dim, Point{i * h, 0.0});
    } else {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) g.at(ix, iy) = s(dim, Point{ix * h, iy * h});
    }
    return g.values;
}

}  // namespace pde_detail

// -div(f grad u) = g on (0,1)^2, u = 0 on the boundary. Second-order finite
// volumes with harmonic averaging of f at cell faces. f_grid holds f on the
// full grid (boundary included), row-major.
inline SolveOutput solve_diffusion(const ForwardProblem& prob, const std::vector<double>& f_grid) {
    prob.validate();
    require(prob.kind == ForwardKind::DiffusionCoefficient, "solve_diffusion: wrong problem kind");
    const int n = prob.grid_n;
    const int npa = n + 2;
    require(static_cast<int>(f_grid.size()) == npa * npa,
            "solve_diffusion: f_grid must cover the full grid");
    const double h = 1.0 / (n + 1);
    const double ih2 = 1.0 / (h * h);
    const auto F = [&](int ix, int iy) { return f_grid[ix + npa * iy]; };

    // face coefficients per interior node
    std::vector<double> fe(n * n), fw(n * n), fn_(n * n), fs(n * n), diag(n * n);
    for (int iy = 1; iy <= n; ++iy)
        for (int ix = 1; ix <= n; ++ix) {
            const int k = (ix - 1) + n * (iy - 1);
            fw[k] = pde_detail::harmonic_mean(F(ix, iy), F(ix - 1, iy));
            fe[k] = pde_detail::harmonic_mean(F(ix, iy), F(ix + 1, iy));
            fs[k] = pde_detail::harmonic_mean(F(ix, iy), F(ix, iy - 1));
            fn_[k] = pde_detail::harmonic_mean(F(ix, iy), F(ix, iy + 1));
            diag[k] = (fe[k] + fw[k] + fn_[k] + fs[k]) * ih2;
        }
    const auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int iy = 1; iy <= n; ++iy)
            for (int ix = 1; ix <= n; ++ix) {
                const int k = (ix - 1) + n * (iy - 1);
                double acc = diag[k] * x[k];
                if (ix > 1) acc -= fw[k] * ih2 * x[k - 1];
                if (ix < n) acc -= fe[k] * ih2 * x[k + 1];
                if (iy > 1) acc -= fs[k] * ih2 * x[k - n];
                if (iy < n) acc -= fn_[k] * ih2 * x[k + n];
                y[k] = acc;
            }
    };

    GridFn rhs_g = GridFn::zeros(2, n);
    rhs_g.values = pde_detail::sample_source(prob.source, 2, n);
    std::vector<double> b(static_cast<std::size_t>(n) * n);
    for (int iy = 1; iy <= n; ++iy)
        for (int ix = 1; ix <= n; ++ix) b[(ix - 1) + n * (iy - 1)] = rhs_g.at(ix, iy);

    std::vector<double> u;
    pde_detail::pcg(apply, diag, b, u);

    SolveOutput out;
    out.grid = GridFn::zeros(2, n);
    for (int iy = 1; iy <= n; ++iy)
        for (int ix = 1; ix <= n; ++ix) out.grid.at(ix, iy) = u[(ix - 1) + n * (iy - 1)];
    return out;
}

// -Laplace u + f u = g with zero Dirichlet data, d in {1,2}; centered
// second-order differences.
inline SolveOutput solve_potential(const ForwardProblem& prob, const std::vector<double>& f_grid) {
    prob.validate();
    require(prob.kind == ForwardKind::EllipticPotential, "solve_potential: wrong problem kind");
    const int n = prob.grid_n;
    const int d = prob.dim;
    const int npa = n + 2;
    require(static_cast<int>(f_grid.size()) == (d == 1 ? npa : npa * npa),
            "solve_potential: f_grid must cover the full grid");
    const double h = 1.0 / (n + 1);
    const double ih2 = 1.0 / (h * h);

    const std::vector<double> g_all = pde_detail::sample_source(prob.source, d, n);
    SolveOutput out;
    out.grid = GridFn::zeros(d, n);

    if (d == 1) {
        std::vector<double> diag(n), b(n);
        for (int i = 1; i <= n; ++i) {
            diag[i - 1] = 2.0 * ih2 + f_grid[i];
            b[i - 1] = g_all[i];
        }
        const auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
            for (int i = 0; i < n; ++i) {
                double acc = diag[i] * x[i];
                if (i > 0) acc -= ih2 * x[i - 1];
                if (i < n - 1) acc -= ih2 * x[i + 1];
                y[i] = acc;
            }
        };
        std::vector<double> u;
        pde_detail::pcg(apply, diag, b, u);
        for (int i = 1; i <= n; ++i) out.grid.at(i) = u[i - 1];
        return out;
    }

    std::vector<double> diag(static_cast<std::size_t>(n) * n), b(static_cast<std::size_t>(n) * n);
    for (int iy = 1; iy <= n; ++iy)
        for (int ix = 1; ix <= n; ++ix) {
            const int k = (ix - 1) + n * (iy - 1);
            diag[k] = 4.0 * ih2 + f_grid[ix + npa * iy];
            b[k] = g_all[ix + npa * iy];
        }
    const auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int iy = 1; iy <= n; ++iy)
            for (int ix = 1; ix <= n; ++ix) {
                const int k = (ix - 1) + n * (iy - 1);
                double acc = diag[k] * x[k];
                if (ix > 1) acc -= ih2 * x[k - 1];
                if (ix < n) acc -= ih2 * x[k + 1];
                if (iy > 1) acc -= ih2 * x[k - n];
                if (iy < n) acc -= ih2 * x[k + n];
                y[k] = acc;
            }
    };
    std::vector<double> u;
    pde_detail::pcg(apply, diag, b, u);
    for (int iy = 1; iy <= n; ++iy)
        for (int ix = 1; ix <= n; ++ix) out.grid.at(ix, iy) = u[(ix - 1) + n * (iy - 1)];
    return out;
}

// Caputo-time subdiffusion d_t^a u - Laplace u + f u = h_src with constant
// Dirichlet data m_g and initial state u0; L1 scheme on a uniform time mesh,
// centered differences in space. Returns the terminal slice u(., T).
// Internally solves for v = u - m_g (zero boundary; the Caputo derivative of
// a constant vanishes, so only the source picks up -f m_g).
inline SolveOutput solve_subdiffusion(const ForwardProblem& prob,
                                      const std::vector<double>& f_grid) {
    prob.validate();
    require(prob.kind == ForwardKind::SubdiffusionPotential,
            "solve_subdiffusion: wrong problem kind");
    const int n = prob.grid_n;
    const int d = prob.dim;
    const int npa = n + 2;
    const std::size_t nfull = (d == 1) ? static_cast<std::size_t>(npa)
                                       : static_cast<std::size_t>(npa) * npa;
    require(f_grid.size() == nfull, "solve_subdiffusion: f_grid must cover the full grid");
    const double h = 1.0 / (n + 1);
    const double ih2 = 1.0 / (h * h);
    const double a = prob.frac_order;
    const int M = prob.time_steps;
    const double dt = prob.T / M;
    const double c0 = std::pow(dt, -a) / std::tgamma(2.0 - a);

    const std::size_t nin = (d == 1) ? static_cast<std::size_t>(n)
                                     : static_cast<std::size_t>(n) * n;
    const auto interior_of = [&](const std::vector<double>& full, std::vector<double>& in) {
        if (d == 1) {
            for (int i = 1; i <= n; ++i) in[i - 1] = full[i];
        } else {
            for (int iy = 1; iy <= n; ++iy)
                for (int ix = 1; ix <= n; ++ix) in[(ix - 1) + n * (iy - 1)] = full[ix + npa * iy];
        }
    };

    std::vector<double> f_in(nin), src_in(nin), u0_in(nin);
    interior_of(f_grid, f_in);
    {
        const std::vector<double> s_all = pde_detail::sample_source(prob.source, d, n);
        interior_of(s_all, src_in);
        const std::vector<double> u0_all = pde_detail::sample_source(prob.u0, d, n);
        interior_of(u0_all, u0_in);
        // compatibility u0 = m_g on the boundary
        const GridFn probe = [&] {
            GridFn g = GridFn::zeros(d, n);
            g.values = u0_all;
            return g;
        }();
        double worst = 0.0;
        const int last = npa - 1;
        if (d == 1) {
            worst = std::max(std::abs(probe.at(0) - prob.boundary_value),
                             std::abs(probe.at(last) - prob.boundary_value));
        } else {
            for (int i = 0; i < npa; ++i)
                for (int j : {0, last})
                    worst = std::max({worst, std::abs(probe.at(i, j) - prob.boundary_value),
                                      std::abs(probe.at(j, i) - prob.boundary_value)});
        }
        require(worst <= 1e-9, "solve_subdiffusion: u0 must equal m_g on the boundary");
    }

    std::vector<double> diag(nin), rhs(nin);
    for (std::size_t k = 0; k < nin; ++k)
        diag[k] = c0 + (d == 1 ? 2.0 : 4.0) * ih2 + f_in[k];
    const auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        if (d == 1) {
            for (int i = 0; i < n; ++i) {
                double acc = diag[i] * x[i];
                if (i > 0) acc -= ih2 * x[i - 1];
                if (i < n - 1) acc -= ih2 * x[i + 1];
                y[i] = acc;
            }
        } else {
            for (int iy = 1; iy <= n; ++iy)
                for (int ix = 1; ix <= n; ++ix) {
                    const int k = (ix - 1) + n * (iy - 1);
                    double acc = diag[k] * x[k];
                    if (ix > 1) acc -= ih2 * x[k - 1];
                    if (ix < n) acc -= ih2 * x[k + 1];
                    if (iy > 1) acc -= ih2 * x[k - n];
                    if (iy < n) acc -= ih2 * x[k + n];
                    y[k] = acc;
                }
        }
    };

    // L1 weights b_j = (j+1)^{1-a} - j^{1-a}
    std::vector<double> bw(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j)
        bw[j] = std::pow(j + 1.0, 1.0 - a) - std::pow(static_cast<double>(j), 1.0 - a);

    std::vector<std::vector<double>> v(static_cast<std::size_t>(M) + 1);
    v[0].resize(nin);
    for (std::size_t k = 0; k < nin; ++k) v[0][k] = u0_in[k] - prob.boundary_value;

    std::vector<double> vn;
    for (int step = 1; step <= M; ++step) {
        for (std::size_t k = 0; k < nin; ++k) {
            double hist = bw[step - 1] * v[0][k];
            for (int kk = 1; kk <= step - 1; ++kk)
                hist += (bw[step - kk - 1] - bw[step - kk]) * v[kk][k];
            rhs[k] = src_in[k] - f_in[k] * prob.boundary_value + c0 * hist;
        }
        pde_detail::pcg(apply, diag, rhs, vn);
        v[static_cast<std::size_t>(step)] = vn;
    }

    SolveOutput out;
    out.grid = GridFn::zeros(d, n);
    for (double& val : out.grid.values) val = prob.boundary_value;
    if (d == 1) {
        for (int i = 1; i <= n; ++i) out.grid.at(i) = v[M][i - 1] + prob.boundary_value;
    } else {
        for (int iy = 1; iy <= n; ++iy)
            for (int ix = 1; ix <= n; ++ix)
                out.grid.at(ix, iy) = v[M][(ix - 1) + n * (iy - 1)] + prob.boundary_value;
    }
    return out;
}

// f = phi(F) on the grid, dispatched to the matching solver. The linear
// surrogate kind bypasses the link and returns F itself (exact off-grid
// evaluation), which is what the conjugate-Gaussian oracles assume.
inline SolveOutput forward_apply(const ForwardProblem& prob, const LinkSpec& link,
                                 const SpectralField& field) {
    prob.validate();
    require(field.dim() == prob.dim, "forward_apply: field dimension mismatch");
    SolveOutput out;
    if (prob.kind == ForwardKind::Linear) {
        out.grid = evaluate_on_grid(field, prob.grid_n);
        out.exact_field = std::make_shared<const SpectralField>(field);
    } else {
        GridFn fvals = evaluate_on_grid(field, prob.grid_n);
        for (double& v : fvals.values) v = link.apply(v);
        switch (prob.kind) {
            case ForwardKind::DiffusionCoefficient: out = solve_diffusion(prob, fvals.values); break;
            case ForwardKind::EllipticPotential: out = solve_potential(prob, fvals.values); break;
            case ForwardKind::SubdiffusionPotential:
                out = solve_subdiffusion(prob, fvals.values);
                break;
            default: break;
        }
    }
    if (prob.u_bound && out.max_abs() > *prob.u_bound)
        throw SolverError("forward_apply: configured uniform bound exceeded", out.max_abs(), 0);
    return out;
}

}  // namespace clab
