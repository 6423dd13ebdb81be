#include "vnw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vnw::quad {

namespace {

void check_modulation_args(double k, double beta) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("integrate_modulation: k must be positive");
    if (!(beta >= 0.0)) throw DomainError("integrate_modulation: beta must be nonnegative");
    if (!(beta < 3.0)) {
        throw DomainError("integrate_modulation: integral diverges at the origin for beta >= 3");
    }
}

// Panel [lo, hi] with 0 < lo; each panel is split at multiples of pi/(2k).
QuadResult integrate_panels(double k, double beta, double lo, double hi, const QuadConfig& cfg,
                            double total_width) {
    auto integrand = [k, beta](double z) {
        const double s = std::sin(k * z);
        return s * s * std::pow(z, -beta);
    };
    QuadResult total;
    if (!cfg.panel_per_halfperiod) {
        QuadConfig local = cfg;
        local.abs_tol = cfg.abs_tol * (hi - lo) / total_width;
        return integrate_generic(integrand, lo, hi, local);
    }
    const double quarter = std::numbers::pi / (2.0 * k);
    double a = lo;
    long j = static_cast<long>(std::floor(lo / quarter)) + 1;
    while (a < hi) {
        const double b = std::min(hi, static_cast<double>(j) * quarter);
        if (b > a) {
            QuadConfig local = cfg;
            local.abs_tol = cfg.abs_tol * (b - a) / total_width;
            total += integrate_generic(integrand, a, b, local);
        }
        a = b;
        ++j;
    }
    return total;
}

}  // namespace

QuadResult integrate_modulation(double k, double beta, double r, const QuadConfig& cfg) {
    check_modulation_args(k, beta);
    cfg.validate();
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("integrate_modulation: r must be >= 0");
    if (r == 0.0) return {};

    // First panel in u = z^{3-beta}: sin^2(kz) z^-beta dz = (sin(kz)/z)^2 du / (3 - beta).
    const double first = std::min(r, std::numbers::pi / (2.0 * k));
    const double power = 3.0 - beta;
    auto integrand = [k, power](double u) {
        const double z = std::pow(u, 1.0 / power);
        const double kz = k * z;
        const double sinc = kz < 1e-8 ? k * (1.0 - kz * kz / 6.0) : std::sin(kz) / z;
        return sinc * sinc / power;
    };
    QuadConfig local = cfg;
    local.abs_tol = cfg.abs_tol * first / r;
    QuadResult total = integrate_generic(integrand, 0.0, std::pow(first, power), local);
    if (r > first) total += integrate_panels(k, beta, first, r, cfg, r);
    return total;
}

QuadResult integrate_modulation_segment(double k, double beta, double lo, double hi,
                                        const QuadConfig& cfg) {
    check_modulation_args(k, beta);
    cfg.validate();
    if (!(lo > 0.0)) throw DomainError("integrate_modulation_segment: lo must be positive");
    if (!(hi >= lo)) throw DomainError("integrate_modulation_segment: require hi >= lo");
    if (hi == lo) return {};
    return integrate_panels(k, beta, lo, hi, cfg, hi - lo);
}

}  // namespace vnw::quad
