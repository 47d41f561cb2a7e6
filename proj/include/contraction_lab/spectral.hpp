#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "contraction_lab/common.hpp"
#include "contraction_lab/rng.hpp"

namespace clab {

// Dirichlet-Laplacian sine basis on (0,1)^d, L2-orthonormal:
//   d=1:  phi_k(x)    = sqrt(2) sin(k pi x)
//   d=2:  phi_kl(x,y) = 2 sin(k pi x) sin(l pi y)
// Flat index j = 1..J walks the multi-indices sorted by ascending eigenvalue
// pi^2 |k|^2, ties broken lexicographically.
struct BasisSpec {
    int dim = 1;
    int modes_per_axis = 1;
    std::vector<std::array<int, 2>> ordering;  // ordering[j-1] = (k1, k2); k2 = 0 when dim == 1

    static BasisSpec make(int dim, int modes_per_axis) {
        require(dim == 1 || dim == 2, "BasisSpec: dim must be 1 or 2");
        require(modes_per_axis >= 1, "BasisSpec: modes_per_axis must be >= 1");
        BasisSpec b;
        b.dim = dim;
        b.modes_per_axis = modes_per_axis;
        if (dim == 1) {
            b.ordering.reserve(modes_per_axis);
            for (int k = 1; k <= modes_per_axis; ++k) b.ordering.push_back({k, 0});
        } else {
            b.ordering.reserve(static_cast<std::size_t>(modes_per_axis) * modes_per_axis);
            for (int k = 1; k <= modes_per_axis; ++k)
                for (int l = 1; l <= modes_per_axis; ++l) b.ordering.push_back({k, l});
            std::sort(b.ordering.begin(), b.ordering.end(),
                      [](const std::array<int, 2>& a, const std::array<int, 2>& c) {
                          const long ea = static_cast<long>(a[0]) * a[0] + static_cast<long>(a[1]) * a[1];
                          const long ec = static_cast<long>(c[0]) * c[0] + static_cast<long>(c[1]) * c[1];
                          if (ea != ec) return ea < ec;
                          return a < c;
                      });
        }
        return b;
    }

    int size() const { return static_cast<int>(ordering.size()); }

    // Laplacian eigenvalue of mode j (1-based)
    double eigenvalue(int j) const {
        const auto& k = ordering[static_cast<std::size_t>(j - 1)];
        const double pi2 = 9.869604401089358;
        return pi2 * (static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
    }

    double eval_mode(int j, const Point& x) const {
        const double pi = 3.14159265358979323846;
        const auto& k = ordering[static_cast<std::size_t>(j - 1)];
        if (dim == 1) return std::sqrt(2.0) * std::sin(k[0] * pi * x[0]);
        return 2.0 * std::sin(k[0] * pi * x[0]) * std::sin(k[1] * pi * x[1]);
    }
};

inline std::shared_ptr<const BasisSpec> make_basis(int dim, int modes_per_axis) {
    return std::make_shared<const BasisSpec>(BasisSpec::make(dim, modes_per_axis));
}

// Coefficient vector on a shared basis; immutable by convention after construction.
struct SpectralField {
    std::shared_ptr<const BasisSpec> basis;
    std::vector<double> coeffs;

    SpectralField() = default;
    SpectralField(std::shared_ptr<const BasisSpec> b, std::vector<double> c)
        : basis(std::move(b)), coeffs(std::move(c)) {
        require(basis != nullptr, "SpectralField: null basis");
        require(static_cast<int>(coeffs.size()) == basis->size(),
                "SpectralField: coefficient count does not match basis size");
    }

    int dim() const { return basis->dim; }
    int size() const { return basis->size(); }
};

inline SpectralField zero_field(std::shared_ptr<const BasisSpec> basis) {
    std::vector<double> c(static_cast<std::size_t>(basis->size()), 0.0);
    return SpectralField(std::move(basis), std::move(c));
}

inline void check_in_cube(int dim, const Point& x) {
    for (int a = 0; a < dim; ++a) {
        if (!(x[a] >= 0.0 && x[a] <= 1.0))
            throw std::domain_error("evaluate: point outside the closed unit cube");
    }
}

inline double evaluate(const SpectralField& f, const Point& x) {
    check_in_cube(f.dim(), x);
    double s = 0.0;
    const int J = f.size();
    for (int j = 1; j <= J; ++j) {
        const double c = f.coeffs[static_cast<std::size_t>(j - 1)];
        if (c != 0.0) s += c * f.basis->eval_mode(j, x);
    }
    return s;
}

inline std::vector<double> evaluate(const SpectralField& f, std::span<const Point> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& x : points) out.push_back(evaluate(f, x));
    return out;
}

// Sequence-space Sobolev norm (sum_j j^{2s/d} c_j^2)^{1/2}; s = 0 is L2,
// negative s gives the dual norm.
inline double norm_hs(const SpectralField& f, double s) {
    const double d = static_cast<double>(f.dim());
    double acc = 0.0;
    const int J = f.size();
    for (int j = 1; j <= J; ++j) {
        const double c = f.coeffs[static_cast<std::size_t>(j - 1)];
        if (c != 0.0) acc += std::pow(static_cast<double>(j), 2.0 * s / d) * c * c;
    }
    return std::sqrt(acc);
}

inline SpectralField truncate_kl(const SpectralField& f, int m) {
    require(m >= 1 && m <= f.size(), "truncate_kl: m out of range [1, J]");
    std::vector<double> c = f.coeffs;
    for (std::size_t j = static_cast<std::size_t>(m); j < c.size(); ++j) c[j] = 0.0;
    return SpectralField(f.basis, std::move(c));
}

// Deterministic rough truth: c_j = s_j j^{-beta/d - 1/2 - eps} with random signs.
// Lies in H^beta but just barely (eps = 0.05), and outside H^{beta + 0.2 d}.
inline SpectralField synthesize_truth(double beta, int d, int J, std::uint64_t seed) {
    require(beta > 0.0, "synthesize_truth: beta must be positive");
    require(d == 1 || d == 2, "synthesize_truth: d must be 1 or 2");
    const int modes = (d == 1) ? J : static_cast<int>(std::llround(std::sqrt(static_cast<double>(J))));
    require((d == 1 ? modes : modes * modes) == J,
            "synthesize_truth: J must be a perfect d-th power of the modes per axis");
    auto basis = make_basis(d, modes);
    Rng rng(seed);
    const double expo = -beta / d - 0.5 - 0.05;
    std::vector<double> c(static_cast<std::size_t>(J));
    for (int j = 1; j <= J; ++j)
        c[static_cast<std::size_t>(j - 1)] = rng.sign() * std::pow(static_cast<double>(j), expo);
    return SpectralField(std::move(basis), std::move(c));
}

}  // namespace clab
