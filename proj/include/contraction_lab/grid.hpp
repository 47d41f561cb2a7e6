#pragma once

#include <cmath>
#include <vector>

#include "contraction_lab/common.hpp"
#include "contraction_lab/spectral.hpp"

namespace clab {

// Values on a uniform tensor grid over [0,1]^d including the boundary nodes;
// node i sits at i*h with h = 1/(n_interior+1). Row-major: ix + (n+2)*iy.
struct GridFn {
    int dim = 1;
    int n_interior = 0;
    std::vector<double> values;

    int nodes_per_axis() const { return n_interior + 2; }
    double h() const { return 1.0 / (n_interior + 1); }

    double& at(int ix, int iy = 0) {
        return values[static_cast<std::size_t>(ix) +
                      static_cast<std::size_t>(nodes_per_axis()) * iy];
    }
    double at(int ix, int iy = 0) const {
        return values[static_cast<std::size_t>(ix) +
                      static_cast<std::size_t>(nodes_per_axis()) * iy];
    }

    static GridFn zeros(int dim, int n_interior) {
        GridFn g;
        g.dim = dim;
        g.n_interior = n_interior;
        const std::size_t npa = static_cast<std::size_t>(n_interior + 2);
        g.values.assign(dim == 1 ? npa : npa * npa, 0.0);
        return g;
    }

    // multilinear interpolation
    double eval(const Point& x) const {
        check_in_cube(dim, x);
        const int n = nodes_per_axis();
        const double hh = h();
        const auto locate = [&](double c, int& i0, double& t) {
            double s = c / hh;
            i0 = static_cast<int>(std::floor(s));
            if (i0 > n - 2) i0 = n - 2;
            if (i0 < 0) i0 = 0;
            t = s - i0;
        };
        int ix;
        double tx;
        locate(x[0], ix, tx);
        if (dim == 1) return (1.0 - tx) * at(ix) + tx * at(ix + 1);
        int iy;
        double ty;
        locate(x[1], iy, ty);
        return (1.0 - tx) * (1.0 - ty) * at(ix, iy) + tx * (1.0 - ty) * at(ix + 1, iy) +
               (1.0 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

// trapezoid weights per axis node
inline double trap_weight(int i, int last) { return (i == 0 || i == last) ? 0.5 : 1.0; }

inline double l2_inner(const GridFn& a, const GridFn& b) {
    require(a.dim == b.dim && a.n_interior == b.n_interior, "l2_inner: grid mismatch");
    const int n = a.nodes_per_axis();
    const double h = a.h();
    double acc = 0.0;
    if (a.dim == 1) {
        for (int i = 0; i < n; ++i) acc += trap_weight(i, n - 1) * a.at(i) * b.at(i);
        return acc * h;
    }
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            acc += trap_weight(ix, n - 1) * trap_weight(iy, n - 1) * a.at(ix, iy) * b.at(ix, iy);
    return acc * h * h;
}

inline double l2_norm(const GridFn& a) { return std::sqrt(std::max(0.0, l2_inner(a, a))); }

inline double l2_distance(const GridFn& a, const GridFn& b) {
    require(a.dim == b.dim && a.n_interior == b.n_interior, "l2_distance: grid mismatch");
    GridFn d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return l2_norm(d);
}

// Quadrature over [0,1]^d of a nodewise functional of several grids, using the
// tensor trapezoid rule on the common grid.
template <class F>
inline double quad_nodewise(const GridFn& a, const GridFn& b, const F& f) {
    require(a.dim == b.dim && a.n_interior == b.n_interior, "quad_nodewise: grid mismatch");
    const int n = a.nodes_per_axis();
    const double h = a.h();
    double acc = 0.0;
    if (a.dim == 1) {
        for (int i = 0; i < n; ++i) acc += trap_weight(i, n - 1) * f(a.at(i), b.at(i));
        return acc * h;
    }
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            acc += trap_weight(ix, n - 1) * trap_weight(iy, n - 1) * f(a.at(ix, iy), b.at(ix, iy));
    return acc * h * h;
}

// Evaluate a spectral field on the full uniform grid, using factored sine
// tables (separable basis) instead of per-node mode sums.
inline GridFn evaluate_on_grid(const SpectralField& f, int n_interior) {
    const int d = f.dim();
    GridFn out = GridFn::zeros(d, n_interior);
    const int n = out.nodes_per_axis();
    const double h = out.h();
    const int modes = f.basis->modes_per_axis;
    const double pi = 3.14159265358979323846;

    std::vector<double> sins(static_cast<std::size_t>(modes + 1) * n);
    for (int k = 1; k <= modes; ++k)
        for (int i = 0; i < n; ++i)
            sins[static_cast<std::size_t>(k) * n + i] = std::sin(k * pi * i * h);

    if (d == 1) {
        for (int j = 1; j <= f.size(); ++j) {
            const double c = f.coeffs[static_cast<std::size_t>(j - 1)];
            if (c == 0.0) continue;
            const int k = f.basis->ordering[static_cast<std::size_t>(j - 1)][0];
            for (int i = 0; i < n; ++i)
                out.at(i) += std::sqrt(2.0) * c * sins[static_cast<std::size_t>(k) * n + i];
        }
        return out;
    }
    // w[k1][iy] = sum_{k2} c_{k1,k2} sin(k2 pi y_iy)
    std::vector<double> w(static_cast<std::size_t>(modes + 1) * n, 0.0);
    for (int j = 1; j <= f.size(); ++j) {
        const double c = f.coeffs[static_cast<std::size_t>(j - 1)];
        if (c == 0.0) continue;
        const auto& kk = f.basis->ordering[static_cast<std::size_t>(j - 1)];
        for (int iy = 0; iy < n; ++iy)
            w[static_cast<std::size_t>(kk[0]) * n + iy] +=
                c * sins[static_cast<std::size_t>(kk[1]) * n + iy];
    }
    for (int k1 = 1; k1 <= modes; ++k1)
        for (int iy = 0; iy < n; ++iy) {
            const double wy = 2.0 * w[static_cast<std::size_t>(k1) * n + iy];
            if (wy == 0.0) continue;
            for (int ix = 0; ix < n; ++ix)
                out.at(ix, iy) += wy * sins[static_cast<std::size_t>(k1) * n + ix];
        }
    return out;
}

}  // namespace clab
