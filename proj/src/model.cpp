#include "vnw/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace vnw {

namespace {

constexpr double pi = std::numbers::pi;

[[noreturn]] void rethrow_at(long index) {
    const std::string where = " (grid index " + std::to_string(index) + ")";
    try {
        throw;
    } catch (const SingularPointError& e) {
        throw SingularPointError(e.what() + where);
    } catch (const DomainError& e) {
        throw DomainError(e.what() + where);
    } catch (const OverflowError& e) {
        throw OverflowError(e.what() + where);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.what() + where, e.achieved_error());
    } catch (const Error& e) {
        throw Error(e.what() + where);
    }
}

double checked_exp(double log_value, double r) {
    if (log_value > std::log(std::numeric_limits<double>::max())) {
        throw OverflowError("modulating function overflows at r = " + std::to_string(r) +
                            " (log f = " + std::to_string(log_value) + "); f grows without bound");
    }
    return std::exp(log_value);
}

}  // namespace

void ModelParams::validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("ModelParams: k must be positive and finite");
    if (!std::isfinite(a)) throw DomainError("ModelParams: a must be finite");
    if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("ModelParams: A must be positive and finite");
    if (!(beta >= 0.0 && beta < 3.0)) throw DomainError("ModelParams: beta must lie in [0, 3)");
}

bool closed_form_supported(double beta) { return beta >= 0.0 && beta <= 1.0; }

Path default_path(const ModelParams& p) {
    return closed_form_supported(p.beta) ? Path::closed_form : Path::quadrature;
}

void GridSpec::validate() const {
    if (!(r_min >= 0.0) || !std::isfinite(r_max) || !(r_max > r_min)) {
        throw DomainError("GridSpec: require 0 <= r_min < r_max");
    }
    if (n_points < 2) throw DomainError("GridSpec: n_points must be >= 2");
}

double GridSpec::operator[](long i) const {
    if (i == n_points - 1) return r_max;
    return r_min + (r_max - r_min) * static_cast<double>(i) / static_cast<double>(n_points - 1);
}

Eigen::ArrayXd GridSpec::radii() const {
    Eigen::ArrayXd r(n_points);
    for (long i = 0; i < n_points; ++i) r[i] = (*this)[i];
    return r;
}

std::string to_string(Quantity q) {
    switch (q) {
        case Quantity::potential: return "V";
        case Quantity::modulating_function: return "f";
        case Quantity::chi: return "chi";
        case Quantity::log_derivative: return "C";
        case Quantity::residual: return "residual";
    }
    return "?";
}

double node_guard(double k) { return 1e-6 * pi / k; }

double distance_to_node(double k, double r) {
    const double n = std::round(k * r / pi);
    return std::abs(r - n * pi / k);
}

Eigen::Array<bool, Eigen::Dynamic, 1> near_node_mask(const GridSpec& g, double k, double delta) {
    Eigen::Array<bool, Eigen::Dynamic, 1> mask(g.n_points);
    for (long i = 0; i < g.n_points; ++i) mask[i] = distance_to_node(k, g[i]) < delta;
    return mask;
}

double chi0(double k, double r) { return std::sin(k * r) / k; }
double chi0_prime(double k, double r) { return std::cos(k * r); }

double phi(const ModelParams& p, double r) {
    if (r > 0.0) return p.a * std::pow(r, -p.beta);
    if (r == 0.0 && p.beta == 0.0) return p.a;
    throw SingularPointError("phi: singular at r = 0 for beta > 0");
}

double phi_prime(const ModelParams& p, double r) {
    if (p.beta == 0.0) return 0.0;
    if (r > 0.0) return -p.a * p.beta * std::pow(r, -p.beta - 1.0);
    throw SingularPointError("phi': singular at r = 0 for beta > 0");
}

double log_derivative(const ModelParams& p, double r) {
    if (r == 0.0) {
        if (p.beta < 2.0) return 0.0;
        throw SingularPointError("log_derivative: no finite limit at r = 0 for beta >= 2");
    }
    const double s = std::sin(p.k * r);
    return phi(p, r) * s * s;
}

double log_derivative_prime(const ModelParams& p, double r) {
    if (r == 0.0) {
        // phi' sin^2 + k phi sin(2kr) ~ (2 - beta) a k^2 r^{1-beta}
        if (p.beta < 1.0) return 0.0;
        if (p.beta == 1.0) return p.a * p.k * p.k;
        throw SingularPointError("log_derivative': singular at r = 0 for beta > 1");
    }
    const double s = std::sin(p.k * r);
    return phi_prime(p, r) * s * s + p.k * phi(p, r) * std::sin(2.0 * p.k * r);
}

double potential(const ModelParams& p, double r) {
    if (p.a == 0.0) return 0.0;
    if (r == 0.0) {
        if (p.beta < 1.0) return 0.0;
        // -a k^2 from the middle term, +4 a k^2 from the last.
        if (p.beta == 1.0) return 3.0 * p.a * p.k * p.k;
        throw SingularPointError("potential: singular at r = 0 for beta > 1");
    }
    if (!(r > 0.0)) throw DomainError("potential: r must be nonnegative");
    const double s = std::sin(p.k * r);
    const double s2 = s * s;
    const double r_beta = std::pow(r, -p.beta);
    return p.a * p.a * s2 * s2 * r_beta * r_beta - p.a * p.beta * s2 * r_beta / r +
           2.0 * p.a * p.k * std::sin(2.0 * p.k * r) * r_beta;
}

double potential_from_logderivative(double C, double Cprime, double k, double r) {
    if (!(k > 0.0)) throw DomainError("potential_from_logderivative: k must be positive");
    if (!(r > 0.0) || distance_to_node(k, r) < node_guard(k)) {
        throw SingularPointError("potential_from_logderivative: r = " + std::to_string(r) +
                                 " is within the node guard of sin(kr); use potential()");
    }
    const double cot = std::cos(k * r) / std::sin(k * r);
    return C * C + Cprime + 2.0 * k * cot * C;
}

double modulation_integral_closed_form(const ModelParams& p, double r, const Numerics& num) {
    if (!closed_form_supported(p.beta)) {
        throw DomainError("modulation_integral: closed form unsupported for beta = " +
                          std::to_string(p.beta) + " (requires 0 <= beta <= 1)");
    }
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("modulation_integral: r must be >= 0");
    if (r == 0.0) return 0.0;
    const double k = p.k;
    if (p.beta == 0.0) return 0.5 * r - std::sin(2.0 * k * r) / (4.0 * k);
    if (p.beta == 1.0) {
        const double ci = specfun::cosine_integral(2.0 * k * r, num.special);
        return 0.5 * (std::log(k * r) - ci + specfun::euler_gamma<double> + std::numbers::ln2);
    }
    // r^eps/(2 eps) - (1/4)[g(eps, 2ikr)/(2ik)^eps + conj] with g the lower
    // incomplete gamma function; the bracket is twice the real part.
    const double eps = p.epsilon();
    const std::complex<double> x(0.0, 2.0 * k * r);
    const std::complex<double> g = specfun::lower_incomplete_gamma(eps, x, num.special);
    const std::complex<double> scaled = g / std::pow(std::complex<double>(0.0, 2.0 * k), eps);
    return std::pow(r, eps) / (2.0 * eps) - 0.5 * scaled.real();
}

double modulation_integral(const ModelParams& p, double r, Path path, const Numerics& num) {
    p.validate();
    if (path == Path::closed_form) return modulation_integral_closed_form(p, r, num);
    return quad::integrate_modulation(p.k, p.beta, r, num.quad).value;
}

double log_modulating_function(const ModelParams& p, double r, Path path, const Numerics& num) {
    return std::log(p.A) + p.a * modulation_integral(p, r, path, num);
}

double modulating_function(const ModelParams& p, double r, Path path, const Numerics& num) {
    if (p.a == 0.0) return p.A;
    return checked_exp(log_modulating_function(p, r, path, num), r);
}

double chi(const ModelParams& p, double r, Path path, const Numerics& num) {
    if (r == 0.0) return 0.0;
    return chi0(p.k, r) * modulating_function(p, r, path, num);
}

ChiDerivatives chi_derivatives_from_f(const ModelParams& p, double r, double f) {
    const double k = p.k;
    const double C = log_derivative(p, r);
    const double Cp = log_derivative_prime(p, r);
    const double c0 = chi0(k, r);
    const double c0p = chi0_prime(k, r);
    return {c0 * f, f * (c0p + C * c0), f * ((Cp + C * C) * c0 + 2.0 * C * c0p - k * k * c0)};
}

ChiDerivatives chi_derivatives(const ModelParams& p, double r, Path path, const Numerics& num) {
    return chi_derivatives_from_f(p, r, modulating_function(p, r, path, num));
}

double normalized_residual(const ModelParams& p, double r, const ChiDerivatives& d) {
    const double k2 = p.k * p.k;
    const double res = d.second + (k2 - potential(p, r)) * d.value;
    const double scale = std::max(k2 * std::abs(d.value), std::abs(d.second));
    if (scale > 0.0) return res / scale;
    return res;
}

ModulationEvaluator::ModulationEvaluator(const ModelParams& p, Path path, const Numerics& num)
    : params_(p), path_(path), num_(num), quarter_(pi / (2.0 * p.k)), boundary_values_{0.0} {
    p.validate();
    if (path == Path::closed_form && !closed_form_supported(p.beta)) {
        throw DomainError("ModulationEvaluator: closed form unsupported for beta = " +
                          std::to_string(p.beta));
    }
}

double ModulationEvaluator::boundary_value(std::size_t j) {
    while (boundary_values_.size() <= j) {
        const std::size_t i = boundary_values_.size();
        const double hi = static_cast<double>(i) * quarter_;
        const double increment =
            i == 1 ? quad::integrate_modulation(params_.k, params_.beta, hi, num_.quad).value
                   : quad::integrate_modulation_segment(params_.k, params_.beta,
                                                        static_cast<double>(i - 1) * quarter_, hi,
                                                        num_.quad)
                         .value;
        boundary_values_.push_back(boundary_values_.back() + increment);
    }
    return boundary_values_[j];
}

double ModulationEvaluator::operator()(double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("ModulationEvaluator: r must be >= 0");
    if (r == 0.0) return 0.0;
    if (path_ == Path::closed_form) return modulation_integral_closed_form(params_, r, num_);
    const auto j = static_cast<std::size_t>(std::floor(r / quarter_));
    if (j == 0) return quad::integrate_modulation(params_.k, params_.beta, r, num_.quad).value;
    const double base = static_cast<double>(j) * quarter_;
    const double value = boundary_value(j);
    if (r <= base) return value;
    return value +
           quad::integrate_modulation_segment(params_.k, params_.beta, base, r, num_.quad).value;
}

SampledFunction sample(const ModelParams& p, const GridSpec& g, Quantity quantity, Path path,
                       const Numerics& num) {
    p.validate();
    g.validate();
    SampledFunction out{g, Eigen::VectorXd(g.n_points), quantity};
    ModulationEvaluator modulation(p, path, num);
    auto f_at = [&](double r) {
        if (p.a == 0.0) return p.A;
        return checked_exp(modulation.log_f(r), r);
    };
    for (long i = 0; i < g.n_points; ++i) {
        const double r = g[i];
        try {
            switch (quantity) {
                case Quantity::potential: out.values[i] = potential(p, r); break;
                case Quantity::log_derivative: out.values[i] = log_derivative(p, r); break;
                case Quantity::modulating_function: out.values[i] = f_at(r); break;
                case Quantity::chi: out.values[i] = r == 0.0 ? 0.0 : chi0(p.k, r) * f_at(r); break;
                case Quantity::residual:
                    out.values[i] =
                        r == 0.0 ? 0.0
                                 : normalized_residual(p, r, chi_derivatives_from_f(p, r, f_at(r)));
                    break;
            }
        } catch (const Error&) {
            rethrow_at(i);
        }
    }
    return out;
}

}  // namespace vnw
