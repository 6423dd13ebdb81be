#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with an optional endpoint
// substitution for integrable power singularities, and the sin^2(kz) z^-beta
// modulation integral built on it.

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "vnw/errors.hpp"

namespace vnw::quad {

struct QuadConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_depth = 60;
    // Split [0, r] at multiples of pi/(2k) before adapting.
    bool panel_per_halfperiod = true;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_depth < 1) {
            throw DomainError("QuadConfig: tolerances must be positive and max_depth >= 1");
        }
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;

    QuadResult& operator+=(const QuadResult& other) {
        value += other.value;
        error += other.error;
        return *this;
    }
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
    double kronrod;
    double gauss;
    double abs_integral;
};

template <typename F>
PanelEstimate gauss_kronrod15(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kronrod_weights[7];
    double gauss = fc * gauss_weights[3];
    double abs_integral = std::abs(fc) * kronrod_weights[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        kronrod += kronrod_weights[j] * (f1 + f2);
        abs_integral += kronrod_weights[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += gauss_weights[j / 2] * (f1 + f2);
    }
    return {kronrod * half, gauss * half, abs_integral * std::abs(half)};
}

template <typename F>
QuadResult adapt(F& f, double lo, double hi, double abs_tol, const QuadConfig& cfg, int depth) {
    const PanelEstimate est = gauss_kronrod15(f, lo, hi);
    if (!std::isfinite(est.kronrod)) {
        throw ConvergenceError("quadrature: non-finite integrand on [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]",
                               std::numeric_limits<double>::infinity());
    }
    const double err = std::abs(est.kronrod - est.gauss);
    const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * est.abs_integral;
    if (err <= std::max(abs_tol, cfg.rel_tol * std::abs(est.kronrod)) || err <= roundoff) {
        return {est.kronrod, err};
    }
    if (depth >= cfg.max_depth) {
        throw ConvergenceError("quadrature: tolerance not reached within max_depth on [" +
                                   std::to_string(lo) + ", " + std::to_string(hi) +
                                   "], achieved error " + std::to_string(err),
                               err);
    }
    const double mid = 0.5 * (lo + hi);
    QuadResult left = adapt(f, lo, mid, 0.5 * abs_tol, cfg, depth + 1);
    left += adapt(f, mid, hi, 0.5 * abs_tol, cfg, depth + 1);
    return left;
}

}  // namespace detail

// Integral of f over [lo, hi] within max(abs_tol, rel_tol |I|).
//
// lo_power declares f(z) ~ (z - lo)^lo_power near lo (lo_power > -1). When it
// is nonzero the panel is mapped through z = lo + t^{1/(1+lo_power)}, which
// turns the leading behavior into a constant, and f is never sampled at lo.
template <typename F>
QuadResult integrate_generic(F&& f, double lo, double hi, const QuadConfig& cfg = {},
                             double lo_power = 0.0) {
    cfg.validate();
    if (!(lo < hi)) throw DomainError("integrate_generic: require lo < hi");
    if (!(lo_power > -1.0)) throw DomainError("integrate_generic: endpoint power must exceed -1");

    QuadResult result;
    if (lo_power == 0.0) {
        result = detail::adapt(f, lo, hi, cfg.abs_tol, cfg, 0);
    } else {
        const double m = 1.0 / (1.0 + lo_power);
        auto mapped = [&](double t) {
            const double s = std::pow(t, m);
            return f(lo + s) * m * s / t;
        };
        const double t_hi = std::pow(hi - lo, 1.0 + lo_power);
        result = detail::adapt(mapped, 0.0, t_hi, cfg.abs_tol, cfg, 0);
    }
    if (!std::isfinite(result.value)) {
        throw ConvergenceError("integrate_generic: non-finite integral",
                               std::numeric_limits<double>::infinity());
    }
    return result;
}

// Integral of sin^2(kz) z^-beta over [0, r] for 0 <= beta < 3.
QuadResult integrate_modulation(double k, double beta, double r, const QuadConfig& cfg = {});

// Same integrand over [lo, hi] with 0 < lo (no endpoint treatment).
QuadResult integrate_modulation_segment(double k, double beta, double lo, double hi,
                                        const QuadConfig& cfg = {});

}  // namespace vnw::quad
