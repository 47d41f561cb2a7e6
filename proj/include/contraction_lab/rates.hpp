#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "contraction_lab/common.hpp"

namespace clab {

// Model constants of the rate system: prior smoothness alpha, truth
// smoothness beta, dimension d, dual-norm order kappa (the paper's k), and
// the Lipschitz growth exponent l of L_G(M) = C_L M^l.
struct RateConstants {
    double alpha = 3.0;
    double beta = 1.0;
    double d = 1.0;
    double kappa = 0.0;
    double l = 0.0;

    void validate() const {
        require(alpha > 0.0 && beta > 0.0 && d > 0.0, "RateConstants: alpha, beta, d must be > 0");
        require(kappa >= 0.0 && l >= 0.0, "RateConstants: kappa and l must be >= 0");
        if (2.0 * alpha + 2.0 * kappa - d <= 0.0)
            throw std::invalid_argument("RateConstants: ill-posed, 2 alpha + 2 kappa - d <= 0");
    }
};

// Exponent tuple: contraction delta_N = N^b, truncation m(N) = N^c, prior
// rescale N^{-h}, sieve radius N^rho.
struct RateParams {
    double b = -0.1;
    double c = 0.1;
    double h = 0.05;
    double rho = 0.0;
    RateConstants consts;
};

enum class P3Variant { P3, P3prime };

struct ConstraintReport {
    double p1 = 0.0;  // >= 0 required
    double p2 = 0.0;  // >= 0 required
    double p3 = 0.0;  // >= 0 required (variant-dependent)
    double p4 = 0.0;  // == 0 required
    double p5 = 0.0;  // >= 0 required
    P3Variant variant = P3Variant::P3;
    bool feasible = false;

    static constexpr double tol = 1e-12;
};

// Signed residuals of the feasibility system; inequalities are written so a
// nonnegative residual means satisfied, and the equality residual must vanish.
inline ConstraintReport check_constraints(const RateParams& p, P3Variant variant = P3Variant::P3) {
    p.consts.validate();
    const double a = p.consts.alpha, be = p.consts.beta, d = p.consts.d, k = p.consts.kappa,
                 l = p.consts.l;
    ConstraintReport r;
    r.variant = variant;
    r.p1 = p.b + p.c * (k + be) / d;
    r.p2 = (1.0 + 2.0 * p.b) - (p.c * (2.0 * (a - be) / d + 1.0) + 2.0 * p.h);
    double p3_lhs = -(p.b + p.h) * (2.0 * d / (2.0 * a + 2.0 * k - d));
    if (variant == P3Variant::P3prime) p3_lhs += 2.0 * p.rho * l * d / (2.0 * a + 2.0 * k - d);
    r.p3 = (1.0 + 2.0 * p.b) - p3_lhs;
    r.p4 = (p.b + 0.5) - (p.rho + p.h);
    r.p5 = (1.0 + 2.0 * p.b) - ((p.b - p.rho) * (-d / (a + k)) + p.rho * l * d / (a + k));
    r.feasible = r.p1 >= -ConstraintReport::tol && r.p2 >= -ConstraintReport::tol &&
                 r.p3 >= -ConstraintReport::tol && r.p5 >= -ConstraintReport::tol &&
                 std::abs(r.p4) <= ConstraintReport::tol;
    return r;
}

struct InfeasibleRateError : std::runtime_error {
    std::string binding;
    InfeasibleRateError(const std::string& msg, std::string which)
        : std::runtime_error(msg), binding(std::move(which)) {}
};

namespace rate_detail {

// With rho pinned by (P4), feasibility at a given b reduces to an interval
// condition on c plus the c-free checks (P3), (P5).
struct BProbe {
    bool ok = false;
    double c = 0.0;
    std::string binding;
};

inline BProbe probe_b(const RateConstants& k, double h, double b, P3Variant variant) {
    BProbe out;
    const double rho = b + 0.5 - h;
    if (rho < 0.0) {
        out.binding = "rho >= 0";
        return out;
    }
    const double c_lo = -b * k.d / (k.kappa + k.beta);            // from (P1)
    const double c_hi = (1.0 + 2.0 * b - 2.0 * h) /
                        (2.0 * (k.alpha - k.beta) / k.d + 1.0);   // from (P2)
    if (!(c_hi > 0.0) || c_lo > c_hi) {
        out.binding = "(P1)/(P2) window empty";
        return out;
    }
    // midpoint keeps both inequality residuals strictly positive
    double c = 0.5 * (std::max(c_lo, 0.0) + c_hi);
    if (c <= 0.0) {
        out.binding = "c > 0";
        return out;
    }
    RateParams p{b, c, h, rho, k};
    const ConstraintReport r = check_constraints(p, variant);
    if (!r.feasible) {
        out.binding = (r.p3 < -ConstraintReport::tol) ? "(P3)" : "(P5)";
        return out;
    }
    out.ok = true;
    out.c = c;
    return out;
}

}  // namespace rate_detail

// Minimal (best) contraction exponent b under the system: grid search at 1e-3
// over b in (h - 1/2, 0), then bisection refinement to 1e-6.
inline RateParams solve_best_rate(const RateConstants& consts, double h,
                                  P3Variant variant = P3Variant::P3) {
    consts.validate();
    require(h > 0.0 && h < 0.5, "solve_best_rate: h must lie in (0, 1/2)");

    const double b_floor = h - 0.5 + 1e-9;
    double best_b = std::numeric_limits<double>::quiet_NaN();
    std::string last_binding = "none";
    for (double b = b_floor; b < 0.0; b += 1e-3) {
        const auto probe = rate_detail::probe_b(consts, h, b, variant);
        if (probe.ok) {
            best_b = b;
            break;
        }
        last_binding = probe.binding;
    }
    if (std::isnan(best_b)) {
        // the supremum b -> 0- is always feasible when (P3)/(P5) allow it
        const auto probe = rate_detail::probe_b(consts, h, -1e-9, variant);
        if (probe.ok)
            best_b = -1e-9;
        else
            throw InfeasibleRateError("solve_best_rate: no feasible b on the search box",
                                      last_binding);
    }

    // bisection: lo infeasible, hi feasible
    double hi = best_b;
    double lo = std::max(b_floor - 1e-9, best_b - 1e-3);
    if (rate_detail::probe_b(consts, h, lo, variant).ok) {
        hi = lo;  // feasible down to the rho >= 0 floor
    } else {
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            if (rate_detail::probe_b(consts, h, mid, variant).ok)
                hi = mid;
            else
                lo = mid;
        }
    }
    const auto probe = rate_detail::probe_b(consts, h, hi, variant);
    RateParams out{hi, probe.c, h, hi + 0.5 - h, consts};
    return out;
}

}  // namespace clab
