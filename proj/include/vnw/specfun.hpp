#pragma once

// Special functions behind the closed-form modulation integral: the lower
// incomplete gamma function of complex argument, the cosine integral, the
// gamma function and Pochhammer symbols.
//
// All functions are templated on the real scalar. Power series whose terms
// alternate in phase (imaginary argument for gamma, any argument for Ci) are
// accumulated in a wider type: at |x| = 30 the largest term is ~1e12 times the
// result, which would leave only four correct digits in double.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "vnw/errors.hpp"

namespace vnw::specfun {

struct EvalConfig {
    double series_tol = 1e-14;
    int max_terms = 500;
    // Cap on the number of terms M of the inverse-power expansion. Summation
    // stops earlier once a term falls below series_tol relative to the sum.
    int asymptotic_order = 20;
    // |x| (or u for Ci) above which the inverse-power expansion is used.
    double switchover_modulus = 30.0;

    void validate() const {
        if (!(series_tol > 0.0) || max_terms < 1 || asymptotic_order < 1 ||
            !(switchover_modulus > 0.0)) {
            throw DomainError("EvalConfig: tolerances and orders must be positive");
        }
    }
};

template <typename Real>
inline constexpr Real euler_gamma = Real(0.57721566490153286061L);

namespace detail {

#if defined(__SIZEOF_FLOAT128__)
using wide_t = __float128;
#else
using wide_t = long double;
#endif

template <typename Real>
Real magnitude(wide_t re, wide_t im) {
    return std::hypot(static_cast<Real>(re), static_cast<Real>(im));
}

}  // namespace detail

// a (a+1) ... (a+n-1); 1 for n = 0.
template <typename Real>
Real pochhammer(Real a, int n) {
    if (n < 0) throw DomainError("pochhammer: n must be nonnegative");
    Real product = Real(1);
    for (int i = 0; i < n; ++i) product *= a + Real(i);
    return product;
}

// Lanczos approximation (g = 7, nine coefficients) with reflection below 1/2.
template <typename Real>
Real gamma(Real x) {
    static constexpr double coeffs[9] = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr Real pi = std::numbers::pi_v<Real>;
    if (x < Real(0.5)) {
        return pi / (std::sin(pi * x) * gamma(Real(1) - x));
    }
    x -= Real(1);
    Real series = Real(coeffs[0]);
    for (int i = 1; i < 9; ++i) series += Real(coeffs[i]) / (x + Real(i));
    const Real t = x + Real(7.5);
    return std::sqrt(Real(2) * pi) * std::pow(t, x + Real(0.5)) * std::exp(-t) * series;
}

// gamma(a, x) = e^{-x} sum_n x^{a+n} / (a)_{n+1}. Valid for any a > 0.
template <typename Real>
std::complex<Real> lower_incomplete_gamma_series(Real a, std::complex<Real> x,
                                                 const EvalConfig& cfg = {}) {
    using detail::wide_t;
    if (x == std::complex<Real>(0)) return {};
    if (x.imag() < Real(0)) return std::conj(lower_incomplete_gamma_series(a, std::conj(x), cfg));

    const wide_t xr = x.real();
    const wide_t xi = x.imag();
    const wide_t wa = a;
    const Real modulus = std::abs(x);

    wide_t term_re = wide_t(1) / wa;
    wide_t term_im = 0;
    wide_t sum_re = term_re;
    wide_t sum_im = 0;
    bool converged = false;
    for (int n = 1; n <= cfg.max_terms; ++n) {
        const wide_t scale = wide_t(1) / (wa + wide_t(n));
        const wide_t re = (term_re * xr - term_im * xi) * scale;
        const wide_t im = (term_re * xi + term_im * xr) * scale;
        term_re = re;
        term_im = im;
        sum_re += term_re;
        sum_im += term_im;
        if (Real(n) > modulus &&
            detail::magnitude<Real>(term_re, term_im) <=
                Real(cfg.series_tol) * detail::magnitude<Real>(sum_re, sum_im)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("lower_incomplete_gamma: series did not converge within max_terms",
                               static_cast<double>(detail::magnitude<Real>(term_re, term_im)));
    }
    const std::complex<Real> sum(static_cast<Real>(sum_re), static_cast<Real>(sum_im));
    return std::exp(-x) * std::pow(x, a) * sum;
}

// gamma(a, x) = Gamma(a) - x^{a-1} e^{-x} sum_{m<M} (1-a)_m / (-x)^m.
template <typename Real>
std::complex<Real> lower_incomplete_gamma_asymptotic(Real a, std::complex<Real> x,
                                                     const EvalConfig& cfg = {}) {
    if (x.imag() < Real(0)) {
        return std::conj(lower_incomplete_gamma_asymptotic(a, std::conj(x), cfg));
    }
    std::complex<Real> term(1);
    std::complex<Real> sum(1);
    for (int m = 1; m < cfg.asymptotic_order; ++m) {
        term *= (Real(m) - a) / (-x);
        sum += term;
        if (std::abs(term) <= Real(cfg.series_tol) * std::abs(sum)) break;
    }
    return gamma(a) - std::pow(x, a - Real(1)) * std::exp(-x) * sum;
}

namespace detail {

// Branch dispatch without the (0, 1] domain restriction; a > 0.
template <typename Real>
std::complex<Real> lower_incomplete_gamma_any(Real a, std::complex<Real> x,
                                              const EvalConfig& cfg) {
    cfg.validate();
    if (!(a > Real(0))) throw DomainError("lower_incomplete_gamma: a must be positive");
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
        throw DomainError("lower_incomplete_gamma: non-finite argument");
    }
    std::complex<Real> value = std::abs(x) <= Real(cfg.switchover_modulus)
                                   ? lower_incomplete_gamma_series(a, x, cfg)
                                   : lower_incomplete_gamma_asymptotic(a, x, cfg);
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        throw ConvergenceError("lower_incomplete_gamma: non-finite result",
                               std::numeric_limits<double>::infinity());
    }
    return value;
}

}  // namespace detail

// Lower incomplete gamma function for a in (0, 1] and complex x, principal
// branch of x^a. Series for |x| <= switchover_modulus, inverse-power expansion
// beyond. gamma(a, conj x) == conj gamma(a, x) bit for bit.
template <typename Real>
std::complex<Real> lower_incomplete_gamma(Real a, std::complex<Real> x,
                                          const EvalConfig& cfg = {}) {
    if (!(a > Real(0) && a <= Real(1))) {
        throw DomainError("lower_incomplete_gamma: a must lie in (0, 1], got " + std::to_string(a));
    }
    return detail::lower_incomplete_gamma_any(a, x, cfg);
}

// Ci(u) = gamma + ln u + sum_{n>=1} (-1)^n u^{2n} / (2n (2n)!).
template <typename Real>
Real cosine_integral_series(Real u, const EvalConfig& cfg = {}) {
    using detail::wide_t;
    const wide_t w2 = wide_t(u) * wide_t(u);
    wide_t power = 1;  // (-1)^n u^{2n} / (2n)!
    wide_t sum = 0;
    bool converged = false;
    for (int n = 1; n <= cfg.max_terms; ++n) {
        power *= -w2 / (wide_t(2 * n - 1) * wide_t(2 * n));
        const wide_t term = power / wide_t(2 * n);
        sum += term;
        const Real abs_term = std::abs(static_cast<Real>(term));
        if (Real(2 * n) > u && abs_term <= Real(cfg.series_tol) * std::abs(static_cast<Real>(sum))) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("cosine_integral: series did not converge within max_terms",
                               std::abs(static_cast<double>(power)));
    }
    return euler_gamma<Real> + std::log(u) + static_cast<Real>(sum);
}

// Ci(u) = f(u) sin u - g(u) cos u with the auxiliary functions expanded in
// inverse powers, truncated at the smallest term or at max_terms.
template <typename Real>
Real cosine_integral_asymptotic(Real u, const EvalConfig& cfg = {}) {
    const Real inv2 = Real(1) / (u * u);
    Real f_term = Real(1);  // (-1)^m (2m)! / u^{2m}
    Real g_term = Real(1);  // (-1)^m (2m+1)! / u^{2m}
    Real f_sum = f_term;
    Real g_sum = g_term;
    for (int m = 1; m <= cfg.max_terms; ++m) {
        const Real f_next = -f_term * Real(2 * m - 1) * Real(2 * m) * inv2;
        const Real g_next = -g_term * Real(2 * m) * Real(2 * m + 1) * inv2;
        if (std::abs(g_next) >= std::abs(g_term)) break;
        f_term = f_next;
        g_term = g_next;
        f_sum += f_term;
        g_sum += g_term;
        if (std::abs(g_term) <= Real(cfg.series_tol) * std::abs(g_sum)) break;
    }
    return f_sum / u * std::sin(u) - g_sum * inv2 * std::cos(u);
}

template <typename Real>
Real cosine_integral(Real u, const EvalConfig& cfg = {}) {
    cfg.validate();
    if (!(u > Real(0)) || !std::isfinite(u)) {
        throw DomainError("cosine_integral: u must be positive and finite");
    }
    return u <= Real(cfg.switchover_modulus) ? cosine_integral_series(u, cfg)
                                             : cosine_integral_asymptotic(u, cfg);
}

}  // namespace vnw::specfun
