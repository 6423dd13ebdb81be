#pragma once

// Decay law of chi predicted from (a, beta), empirical envelope fits of
// sampled chi, and norm/moment integrals with analytic tail bounds.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vnw/model.hpp"

namespace vnw {

enum class DecayKind { stretched_exponential, power_law, pure_exponential, growing, bounded_nondecaying };

std::string to_string(DecayKind kind);

// Value of finite_moments_up_to when every moment converges.
inline constexpr int all_moments = std::numeric_limits<int>::max();

struct DecayClassification {
    DecayKind kind = DecayKind::bounded_nondecaying;
    std::optional<double> exponent_p;  // power of r inside exp
    std::optional<double> rate_c;      // exp(-c r^p)
    std::optional<double> power_q;     // r^-q
    bool normalizable = false;
    // Largest n with int chi^2 r^n dr < inf; -1 when even the norm diverges.
    int finite_moments_up_to = -1;
    // Dominant large-r behavior of the potential.
    std::string potential_asymptotics;
};

DecayClassification classify(const ModelParams& p);

enum class EnvelopeModel { stretched_exp, power };

std::string to_string(EnvelopeModel model);

struct EnvelopePoint {
    double r;
    double log_envelope;
};

struct EnvelopeFit {
    EnvelopeModel model = EnvelopeModel::stretched_exp;
    std::optional<double> fitted_p;
    std::optional<double> fitted_c;
    std::optional<double> fitted_q;
    double log_amplitude = 0.0;  // constant term of the log-space fit
    double residual_rms = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    long n_extrema = 0;
};

// Start of the default fit window: ten half periods.
double default_window_start(double k);

// Local maxima of |chi| inside [r_lo, r_hi], refined by a parabola through
// ln|chi| at the three samples around each maximum.
std::vector<EnvelopePoint> extract_envelope(const SampledFunction& chi, double r_lo, double r_hi);

// Least squares in log space: ln env = b - c r^p (grid over p, linear solve
// for b and c, Brent refinement of p) or ln env = b - q ln r.
EnvelopeFit fit_envelope(const SampledFunction& chi, EnvelopeModel model, double r_lo, double r_hi);

enum class MomentStatus { finite, diverging, marginal };

std::string to_string(MomentStatus status);

struct MomentResult {
    int n = 0;
    MomentStatus status = MomentStatus::diverging;
    double partial = 0.0;     // int_0^{r_cut} chi^2 r^n dr
    double tail_bound = 0.0;  // upper bound on int_{r_cut}^inf; inf unless finite
};

// int_0^{r_cut} chi^2 r^n dr by quadrature over half-period panels.
double partial_moment(const ModelParams& p, int n, double r_cut, const Numerics& num = {});

// Status of the n-th moment straight from the classification table.
MomentStatus moment_status(const ModelParams& p, int n);

// n = 0..n_max; requires r_cut >= 50/k.
std::vector<MomentResult> norm_and_moments(const ModelParams& p, int n_max, double r_cut,
                                           const Numerics& num = {});

}  // namespace vnw
