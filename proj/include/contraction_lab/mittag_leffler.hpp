#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <mpfr.h>

#include "contraction_lab/common.hpp"

namespace clab {
namespace ml_detail {

// The alternating series suffers catastrophic cancellation for z < 0 (the
// largest term can exceed the sum by tens to thousands of digits), so the
// partial sums are accumulated in MPFR with precision chosen from the
// estimated peak-term magnitude.

// ln of the largest series term ~ max_n ( n ln|z| - lnGamma(a n + b) );
// stationary point at digamma(a n + b) = ln|z| / a, i.e. a n + b ~ e^{ln|z|/a}.
inline double peak_log_term(double a, double b, double az) {
    if (az <= 1.0) return 0.0;
    const double xstar = std::max(b + a, std::exp(std::log(az) / a));
    const double nstar = (xstar - b) / a;
    const double v = nstar * std::log(az) - std::lgamma(xstar);
    return std::max(0.0, v);
}

inline double peak_term_index(double a, double b, double az) {
    if (az <= 1.0) return 0.0;
    const double xstar = std::max(b + a, std::exp(std::log(az) / a));
    return std::max(0.0, (xstar - b) / a);
}

inline double series(double a, double b, double z) {
    const double az = std::abs(z);
    const double maxln = peak_log_term(a, b, az);
    // 1.45 bits per nat, plus guard digits for the final 1e-10..1e-12 target
    const long bits = 96 + static_cast<long>(1.45 * (maxln + 120.0));
    if (bits > (1L << 15))
        throw std::invalid_argument("mittag_leffler: (a, z) outside the supported range "
                                    "(series cancellation too severe)");
    const double npeak = peak_term_index(a, b, az);
    const long max_terms = 1000000;

    mpfr_t sum, term, zp, x, g;
    mpfr_inits2(bits, sum, term, zp, x, g, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_zero(sum, 1);
    mpfr_set_d(zp, 1.0, MPFR_RNDN);  // z^n

    mpfr_t tiny;  // stop once |term| < 2^-(bits-40) * max(1, |sum|)
    mpfr_init2(tiny, 64);

    long n = 0;
    for (; n < max_terms; ++n) {
        // form a*n + b in extended precision: double rounding of the Gamma
        // argument would be amplified by the peak term magnitude
        mpfr_set_d(x, a, MPFR_RNDN);
        mpfr_mul_ui(x, x, static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_add_d(x, x, b, MPFR_RNDN);
        mpfr_gamma(g, x, MPFR_RNDN);
        mpfr_div(term, zp, g, MPFR_RNDN);
        mpfr_add(sum, sum, term, MPFR_RNDN);
        mpfr_mul_d(zp, zp, z, MPFR_RNDN);

        if (static_cast<double>(n) > npeak + 4.0) {
            mpfr_abs(tiny, sum, MPFR_RNDN);
            if (mpfr_cmp_d(tiny, 1.0) < 0) mpfr_set_d(tiny, 1.0, MPFR_RNDN);
            mpfr_mul_2si(tiny, tiny, -(bits - 40), MPFR_RNDN);
            mpfr_abs(x, term, MPFR_RNDN);
            if (mpfr_cmp(x, tiny) < 0) break;
        }
    }
    const double out = mpfr_get_d(sum, MPFR_RNDN);
    mpfr_clears(sum, term, zp, x, g, static_cast<mpfr_ptr>(nullptr));
    mpfr_clear(tiny);
    if (n >= max_terms)
        throw std::invalid_argument("mittag_leffler: series did not converge in the term budget");
    if (!std::isfinite(out))
        throw std::invalid_argument("mittag_leffler: result exceeds double range");
    return out;
}

// ---- adaptive Gauss-Kronrod (G7/K15) ----------------------------------------

inline const double gk_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline const double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline const double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double lo, double hi, double& integral, double& err) {
    const double c = 0.5 * (lo + hi);
    const double hw = 0.5 * (hi - lo);
    double resg = 0.0, resk = 0.0;
    const double fc = f(c);
    resk = gk_wk[7] * fc;
    resg = gk_wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = hw * gk_x[i];
        const double fsum = f(c - dx) + f(c + dx);
        resk += gk_wk[i] * fsum;
        if (i % 2 == 1) resg += gk_wg[i / 2] * fsum;
    }
    integral = resk * hw;
    err = std::abs(resk - resg) * hw;
}

template <class F>
inline double adaptive_gk(const F& f, std::vector<double> pts, double abstol) {
    std::sort(pts.begin(), pts.end());
    struct Seg {
        double lo, hi, val, err;
    };
    std::vector<Seg> segs;
    double total = 0.0, toterr = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i + 1] > pts[i])) continue;
        Seg s{pts[i], pts[i + 1], 0.0, 0.0};
        gk15(f, s.lo, s.hi, s.val, s.err);
        total += s.val;
        toterr += s.err;
        segs.push_back(s);
    }
    int budget = 4000;
    while (toterr > abstol && budget-- > 0) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;
        const Seg s = segs[worst];
        if (s.hi - s.lo < 1e-300) break;
        const double mid = 0.5 * (s.lo + s.hi);
        Seg a{s.lo, mid, 0.0, 0.0}, bseg{mid, s.hi, 0.0, 0.0};
        gk15(f, a.lo, a.hi, a.val, a.err);
        gk15(f, bseg.lo, bseg.hi, bseg.val, bseg.err);
        total += a.val + bseg.val - s.val;
        toterr += a.err + bseg.err - s.err;
        segs[worst] = a;
        segs.push_back(bseg);
    }
    return total;
}

// Integral representation for z < 0 and 0 < a < 1 (no residue term on the
// negative axis since |arg z| = pi > a pi):
//   E_{a,b}(z) = 1/(a pi) Int_0^inf r^{(1-b)/a} e^{-r^{1/a}}
//                [ r sin(pi(1-b)) - z sin(pi(1-b+a)) ]
//                / ( r^2 - 2 r z cos(a pi) + z^2 ) dr,
// valid for b < 1 + a; larger b is reduced first via
//   E_{a,b}(z) = ( E_{a,b-a}(z) - 1/Gamma(b-a) ) / z.
inline double integral_rep_core(double a, double b, double z) {
    const double pi = 3.14159265358979323846;
    const double s1 = std::sin(pi * (1.0 - b));
    const double s2 = std::sin(pi * (1.0 - b + a));
    const double cs = std::cos(pi * a);
    const auto K = [&](double r) -> double {
        if (r <= 0.0) return 0.0;
        const double num = r * s1 - z * s2;
        const double den = (r - z * cs) * (r - z * cs) + z * z * (1.0 - cs * cs);
        const double pw = (1.0 - b) / a;
        return std::pow(r, pw) * std::exp(-std::pow(r, 1.0 / a)) * num / den / (a * pi);
    };

    const double rmax = std::pow(745.0, a);
    std::vector<double> pts{0.0, std::min(1.0, rmax), std::min(std::abs(z), rmax), rmax};
    if (cs < 0.0) {
        // Lorentzian peak of the denominator at r0 = z cos(a pi) > 0
        const double r0 = z * cs;
        const double gam = std::abs(z) * std::sqrt(std::max(1e-300, 1.0 - cs * cs));
        for (double w : {8.0, 1.0})
            for (double sgn : {-1.0, 1.0}) {
                const double p = r0 + sgn * w * gam;
                if (p > 0.0 && p < rmax) pts.push_back(p);
            }
    }
    return adaptive_gk(K, std::move(pts), 1e-13);
}

inline double integral_rep(double a, double b, double z) {
    // reduce b into (0, 1 + a] so the r -> 0 endpoint stays integrable
    if (b >= 1.0 + a) {
        const double bm = b - a;
        return (integral_rep(a, bm, z) - 1.0 / std::tgamma(bm)) / z;
    }
    return integral_rep_core(a, b, z);
}

}  // namespace ml_detail

// E_{a,b}(z) = sum_{n>=0} z^n / Gamma(a n + b), for a in (0,2), b > 0,
// |z| <= 50. Series for |z| <= 4 (and for a >= 1 throughout); integral
// representation for z < -4 with a < 1.
inline double mittag_leffler(double a, double b, double z) {
    if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("mittag_leffler: a must be in (0,2)");
    if (!(b > 0.0)) throw std::invalid_argument("mittag_leffler: b must be positive");
    if (!(std::abs(z) <= 50.0))
        throw std::invalid_argument("mittag_leffler: |z| <= 50 is the supported range");
    if (a == 1.0 && b == 1.0) return std::exp(z);
    if (z >= -4.0) return ml_detail::series(a, b, z);
    if (a < 1.0) return ml_detail::integral_rep(a, b, z);
    return ml_detail::series(a, b, z);  // mild cancellation for a >= 1
}

}  // namespace clab
