#pragma once

// The construction pipeline in reduced units (2m/hbar^2 = 1, E = k^2):
//
//   phi(r) = a r^-beta,   C(r) = f'/f = phi(r) sin^2(kr),
//   V = C^2 + C' + 2k ctg(kr) C,   f = A exp(a I(r)),   chi = sin(kr)/k * f,
//
// with I(r) = int_0^r sin^2(kz) z^-beta dz evaluated either by quadrature or
// in closed form (elementary for beta = 0, cosine integral for beta = 1,
// incomplete gamma of imaginary argument for 0 < beta < 1).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vnw/quadrature.hpp"
#include "vnw/specfun.hpp"

namespace vnw {

struct ModelParams {
    double k = 1.0;     // wavenumber of the embedded level, E = k^2
    double a = -1.0;    // coupling, units length^{beta-1}
    double beta = 0.5;  // decay exponent of phi
    double A = 1.0;     // normalization of f

    void validate() const;
    double epsilon() const { return 1.0 - beta; }
};

enum class Path { quadrature, closed_form };

// closed_form when beta lies in [0, 1], quadrature otherwise.
Path default_path(const ModelParams& p);
bool closed_form_supported(double beta);

struct Numerics {
    specfun::EvalConfig special{};
    quad::QuadConfig quad{};
};

struct GridSpec {
    double r_min = 0.0;
    double r_max = 1.0;
    long n_points = 2;

    void validate() const;
    double step() const { return (r_max - r_min) / static_cast<double>(n_points - 1); }
    double operator[](long i) const;
    Eigen::ArrayXd radii() const;
};

enum class Quantity { potential, modulating_function, chi, log_derivative, residual };

std::string to_string(Quantity q);

struct SampledFunction {
    GridSpec grid;
    Eigen::VectorXd values;
    Quantity label = Quantity::chi;
};

struct ChiDerivatives {
    double value;
    double first;
    double second;
};

// Half-width of the window around r = n pi / k inside which the ctg form of
// the potential is refused.
double node_guard(double k);
double distance_to_node(double k, double r);
// true where a grid point lies within delta of a zero of sin(kr).
Eigen::Array<bool, Eigen::Dynamic, 1> near_node_mask(const GridSpec& g, double k, double delta);

double chi0(double k, double r);
double chi0_prime(double k, double r);

double phi(const ModelParams& p, double r);
double phi_prime(const ModelParams& p, double r);

double log_derivative(const ModelParams& p, double r);
double log_derivative_prime(const ModelParams& p, double r);

// a^2 sin^4(kr)/r^{2 beta} - a beta sin^2(kr)/r^{1+beta} + 2ak sin(2kr)/r^beta.
double potential(const ModelParams& p, double r);

// C^2 + C' + 2k ctg(kr) C. Refused within node_guard(k) of a node.
double potential_from_logderivative(double C, double Cprime, double k, double r);

double modulation_integral(const ModelParams& p, double r, Path path, const Numerics& num = {});
double modulation_integral_closed_form(const ModelParams& p, double r, const Numerics& num = {});

double log_modulating_function(const ModelParams& p, double r, Path path, const Numerics& num = {});
double modulating_function(const ModelParams& p, double r, Path path, const Numerics& num = {});
double chi(const ModelParams& p, double r, Path path, const Numerics& num = {});
ChiDerivatives chi_derivatives(const ModelParams& p, double r, Path path, const Numerics& num = {});

// Derivatives of chi given f(r); no further integration.
ChiDerivatives chi_derivatives_from_f(const ModelParams& p, double r, double f);

// (chi'' + (k^2 - V) chi) / max(k^2 |chi|, |chi''|); 0 where both vanish.
double normalized_residual(const ModelParams& p, double r, const ChiDerivatives& d);

// I(r) for many radii with one object. The quadrature path caches I at the
// panel boundaries j pi/(2k), so each evaluation integrates at most one panel.
// Not thread-safe; create one per thread.
class ModulationEvaluator {
public:
    ModulationEvaluator(const ModelParams& p, Path path, const Numerics& num = {});

    double operator()(double r);
    double log_f(double r) { return std::log(params_.A) + params_.a * (*this)(r); }
    Path path() const { return path_; }

private:
    double boundary_value(std::size_t j);

    ModelParams params_;
    Path path_;
    Numerics num_;
    double quarter_;
    std::vector<double> boundary_values_;  // I(j * quarter_)
};

SampledFunction sample(const ModelParams& p, const GridSpec& g, Quantity quantity, Path path,
                       const Numerics& num = {});

// Elementwise forms over Eigen arrays.
template <typename Derived>
auto potential(const ModelParams& p, const Eigen::ArrayBase<Derived>& r) {
    return r.unaryExpr([p](double x) { return potential(p, x); });
}

template <typename Derived>
auto log_derivative(const ModelParams& p, const Eigen::ArrayBase<Derived>& r) {
    return r.unaryExpr([p](double x) { return log_derivative(p, x); });
}

template <typename Derived>
auto chi0(double k, const Eigen::ArrayBase<Derived>& r) {
    return (k * r).sin() / k;
}

}  // namespace vnw
