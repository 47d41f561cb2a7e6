#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "contraction_lab/spectral.hpp"

namespace clab {

// Whittle-Matern-type Gaussian prior in coefficient space. Marginal standard
// deviations tau_j = N^{-h} j^{-alpha/d}; h = 0 recovers the base prior.
// Optional conditioning restricts draws to the H^1 ball of radius cond_radius.
struct PriorSpec {
    double alpha = 3.0;
    double h = 0.0;
    int N = 1;
    std::shared_ptr<const BasisSpec> basis;
    std::optional<double> cond_radius;  // H^1 ball radius M
    static constexpr double cond_norm_order = 1.0;

    void validate() const {
        require(basis != nullptr, "PriorSpec: null basis");
        require(alpha > basis->dim / 2.0, "PriorSpec: alpha must exceed d/2");
        require(h >= 0.0, "PriorSpec: h must be >= 0");
        require(N >= 1, "PriorSpec: N must be >= 1");
        if (cond_radius) require(*cond_radius > 0.0, "PriorSpec: cond_radius must be positive");
    }

    double tau(int j) const {
        return std::pow(static_cast<double>(N), -h) *
               std::pow(static_cast<double>(j), -alpha / basis->dim);
    }

    std::vector<double> tau_all() const {
        std::vector<double> t(static_cast<std::size_t>(basis->size()));
        for (int j = 1; j <= basis->size(); ++j) t[static_cast<std::size_t>(j - 1)] = tau(j);
        return t;
    }
};

// Logistic link phi(z) = lo + (hi-lo) / (1 + e^{-z}), a smooth increasing
// bijection from R onto (lo, hi).
struct LinkSpec {
    double lambda_lo = 1.0;
    double lambda_hi = 3.0;

    void validate() const {
        require(lambda_lo > 0.0 && lambda_lo < lambda_hi,
                "LinkSpec: requires 0 < lambda_lo < lambda_hi");
    }

    double apply(double z) const {
        // evaluate from the stable side; nudge off the endpoints where rounding
        // would pin the (mathematically interior) value onto them
        double v;
        if (z >= 0.0) {
            const double e = std::exp(-z);
            v = (lambda_lo * e + lambda_hi) / (1.0 + e);
        } else {
            const double e = std::exp(z);
            v = (lambda_lo + lambda_hi * e) / (1.0 + e);
        }
        if (v >= lambda_hi) v = std::nextafter(lambda_hi, lambda_lo);
        if (v <= lambda_lo) v = std::nextafter(lambda_lo, lambda_hi);
        return v;
    }

    double invert(double value) const {
        if (!(value > lambda_lo && value < lambda_hi))
            throw std::domain_error("link_invert: value outside (lambda_lo, lambda_hi)");
        return std::log((value - lambda_lo) / (lambda_hi - value));
    }

    // sup |phi'| and sup |phi''|, used by diagnostics
    double dphi_max() const { return 0.25 * (lambda_hi - lambda_lo); }
    double d2phi_max() const { return (lambda_hi - lambda_lo) / (6.0 * std::sqrt(3.0)); }
};

inline double link_invert(const LinkSpec& link, double value) { return link.invert(value); }

inline std::vector<double> link_apply(const LinkSpec& link, const SpectralField& f,
                                      std::span<const Point> points) {
    std::vector<double> out = evaluate(f, points);
    for (double& v : out) v = link.apply(v);
    return out;
}

namespace detail {
inline SpectralField draw_unconditioned(const PriorSpec& spec, const std::vector<double>& tau,
                                        Rng& rng) {
    std::vector<double> c(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) c[j] = tau[j] * rng.normal();
    return SpectralField(spec.basis, std::move(c));
}
}  // namespace detail

// i.i.d. prior draws; with cond_radius set, rejection-samples the H^1 ball.
// Throws InfeasibleConditioningError if the empirical acceptance rate drops
// below 1e-4 over a 10^5-draw window.
inline std::vector<SpectralField> sample_prior(const PriorSpec& spec, int count,
                                               std::uint64_t seed) {
    spec.validate();
    require(count >= 1, "sample_prior: count must be >= 1");
    const std::vector<double> tau = spec.tau_all();
    Rng rng(seed);
    std::vector<SpectralField> out;
    out.reserve(static_cast<std::size_t>(count));
    long attempts = 0;
    long accepted = 0;
    while (static_cast<int>(out.size()) < count) {
        SpectralField f = detail::draw_unconditioned(spec, tau, rng);
        ++attempts;
        if (!spec.cond_radius || norm_hs(f, PriorSpec::cond_norm_order) <= *spec.cond_radius) {
            ++accepted;
            out.push_back(std::move(f));
        }
        if (attempts % 100000 == 0) {
            const double rate = static_cast<double>(accepted) / static_cast<double>(attempts);
            if (rate < 1e-4)
                throw InfeasibleConditioningError(
                    "sample_prior: conditioning acceptance rate below 1e-4", rate);
        }
    }
    return out;
}

// Unnormalized log-density -1/2 sum c_j^2 / tau_j^2; -inf outside the
// conditioning ball when conditioning is active.
inline double prior_logdensity(const PriorSpec& spec, const SpectralField& field) {
    spec.validate();
    require(field.basis->size() == spec.basis->size() && field.dim() == spec.basis->dim,
            "prior_logdensity: field not on the prior basis");
    if (spec.cond_radius &&
        norm_hs(field, PriorSpec::cond_norm_order) > *spec.cond_radius)
        return -std::numeric_limits<double>::infinity();
    double q = 0.0;
    for (int j = 1; j <= field.size(); ++j) {
        const double t = spec.tau(j);
        const double c = field.coeffs[static_cast<std::size_t>(j - 1)];
        q += c * c / (t * t);
    }
    return -0.5 * q;
}

}  // namespace clab
