#include "vnw/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

namespace vnw {

namespace {

std::string number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct LinearFit {
    double intercept;
    double slope;
    double sse;
};

// y = intercept + slope * x
LinearFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd design(x.size(), 2);
    design.col(0).setOnes();
    design.col(1) = x;
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
    const double sse = (design * coef - y).squaredNorm();
    return {coef[0], coef[1], sse};
}

}  // namespace

std::string to_string(DecayKind kind) {
    switch (kind) {
        case DecayKind::stretched_exponential: return "stretched_exponential";
        case DecayKind::power_law: return "power_law";
        case DecayKind::pure_exponential: return "pure_exponential";
        case DecayKind::growing: return "growing";
        case DecayKind::bounded_nondecaying: return "bounded_nondecaying";
    }
    return "?";
}

std::string to_string(EnvelopeModel model) {
    return model == EnvelopeModel::stretched_exp ? "stretched_exp" : "power";
}

std::string to_string(MomentStatus status) {
    switch (status) {
        case MomentStatus::finite: return "finite";
        case MomentStatus::diverging: return "diverging";
        case MomentStatus::marginal: return "marginal";
    }
    return "?";
}

DecayClassification classify(const ModelParams& p) {
    p.validate();
    DecayClassification out;
    const double abs_a = std::abs(p.a);

    if (p.a == 0.0) {
        out.potential_asymptotics = "V(r) = 0";
    } else {
        out.potential_asymptotics = "V(r) ~ " + number(2.0 * p.a * p.k) + " sin(" +
                                    number(2.0 * p.k) + " r) / r^" + number(p.beta);
    }

    if (p.a > 0.0) {
        out.kind = DecayKind::growing;
    } else if (p.a == 0.0 || p.beta > 1.0) {
        out.kind = DecayKind::bounded_nondecaying;
    } else if (p.beta == 0.0) {
        out.kind = DecayKind::pure_exponential;
        out.exponent_p = 1.0;
        out.rate_c = abs_a / 2.0;
        out.normalizable = true;
        out.finite_moments_up_to = all_moments;
    } else if (p.beta < 1.0) {
        out.kind = DecayKind::stretched_exponential;
        out.exponent_p = 1.0 - p.beta;
        out.rate_c = abs_a / (2.0 * (1.0 - p.beta));
        out.normalizable = true;
        out.finite_moments_up_to = all_moments;
    } else {
        out.kind = DecayKind::power_law;
        out.power_q = abs_a / 2.0;
        out.normalizable = abs_a > 1.0;
        // chi^2 r^n ~ r^{n - |a|}: largest integer n strictly below |a| - 1.
        out.finite_moments_up_to = std::max(-1, static_cast<int>(std::ceil(abs_a - 1.0)) - 1);
    }
    return out;
}

double default_window_start(double k) { return 10.0 * std::numbers::pi / k; }

std::vector<EnvelopePoint> extract_envelope(const SampledFunction& chi, double r_lo, double r_hi) {
    const GridSpec& g = chi.grid;
    if (!(r_lo < r_hi) || r_lo < g.r_min || r_hi > g.r_max) {
        throw DomainError("extract_envelope: window must lie inside the sampled range");
    }
    const double h = g.step();
    std::vector<EnvelopePoint> points;
    const auto& v = chi.values;
    for (long i = 1; i + 1 < g.n_points; ++i) {
        const double r = g[i];
        if (r < r_lo || r > r_hi) continue;
        const double mid = std::abs(v[i]);
        if (!(mid >= std::abs(v[i - 1]) && mid > std::abs(v[i + 1]))) continue;
        if (!(mid > 0.0) || !(std::abs(v[i - 1]) > 0.0) || !(std::abs(v[i + 1]) > 0.0)) {
            throw ConsistencyError("extract_envelope: non-positive envelope near r = " +
                                   std::to_string(r));
        }
        const double ym = std::log(std::abs(v[i - 1]));
        const double y0 = std::log(mid);
        const double yp = std::log(std::abs(v[i + 1]));
        const double curvature = ym - 2.0 * y0 + yp;
        double shift = 0.0;
        double peak = y0;
        if (curvature < 0.0) {
            shift = 0.5 * (ym - yp) / curvature;
            peak = y0 - 0.25 * (ym - yp) * shift;
        }
        points.push_back({r + shift * h, peak});
    }
    return points;
}

EnvelopeFit fit_envelope(const SampledFunction& chi, EnvelopeModel model, double r_lo, double r_hi) {
    const std::vector<EnvelopePoint> env = extract_envelope(chi, r_lo, r_hi);
    constexpr std::size_t min_points = 20;
    if (env.size() < min_points) {
        throw InsufficientDataError("fit_envelope: " + std::to_string(env.size()) +
                                    " extrema in window, need at least 20");
    }
    const auto n = static_cast<long>(env.size());
    Eigen::VectorXd r(n), y(n);
    for (long i = 0; i < n; ++i) {
        r[i] = env[i].r;
        y[i] = env[i].log_envelope;
    }

    EnvelopeFit out;
    out.model = model;
    out.r_lo = r_lo;
    out.r_hi = r_hi;
    out.n_extrema = n;

    if (model == EnvelopeModel::power) {
        const LinearFit line = fit_line(r.array().log().matrix(), y);
        out.fitted_q = -line.slope;
        out.log_amplitude = line.intercept;
        out.residual_rms = std::sqrt(line.sse / static_cast<double>(n));
        return out;
    }

    // Variable projection: for fixed p the model is linear in (b, c).
    auto fit_at = [&](double p) { return fit_line(r.array().pow(p).matrix(), y); };
    constexpr double p_min = 0.01;
    constexpr double p_max = 2.0;
    constexpr double p_step = 0.01;
    double best_p = p_min;
    double best_sse = std::numeric_limits<double>::infinity();
    for (double p = p_min; p <= p_max + 1e-12; p += p_step) {
        const double sse = fit_at(p).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_p = p;
        }
    }
    const double lo = std::max(p_min / 2.0, best_p - p_step);
    const double hi = best_p + p_step;
    const auto refined = boost::math::tools::brent_find_minima(
        [&](double p) { return fit_at(p).sse; }, lo, hi, 50);
    const double p = refined.second <= best_sse ? refined.first : best_p;
    const LinearFit line = fit_at(p);
    out.fitted_p = p;
    out.fitted_c = -line.slope;
    out.log_amplitude = line.intercept;
    out.residual_rms = std::sqrt(line.sse / static_cast<double>(n));
    return out;
}

double partial_moment(const ModelParams& p, int n, double r_cut, const Numerics& num) {
    p.validate();
    if (n < 0) throw DomainError("partial_moment: n must be nonnegative");
    if (!(r_cut > 0.0)) throw DomainError("partial_moment: r_cut must be positive");
    ModulationEvaluator modulation(p, default_path(p), num);
    const double k = p.k;
    auto integrand = [&](double r) {
        const double s = std::sin(k * r) / k;
        const double log_f2 = 2.0 * modulation.log_f(r);
        if (log_f2 > 700.0) throw OverflowError("partial_moment: chi^2 overflows");
        return s * s * std::exp(log_f2) * std::pow(r, n);
    };
    quad::QuadConfig cfg = num.quad;
    cfg.rel_tol = std::max(cfg.rel_tol, 1e-10);
    const double quarter = std::numbers::pi / (2.0 * k);
    double total = 0.0;
    double a = 0.0;
    for (long j = 1; a < r_cut; ++j) {
        const double b = std::min(r_cut, static_cast<double>(j) * quarter);
        if (b > a) {
            quad::QuadConfig local = cfg;
            local.abs_tol = cfg.abs_tol * (b - a) / r_cut;
            total += quad::integrate_generic(integrand, a, b, local).value;
        }
        a = b;
    }
    if (!std::isfinite(total)) throw OverflowError("partial_moment: integral overflows");
    return total;
}

MomentStatus moment_status(const ModelParams& p, int n) {
    const DecayClassification cls = classify(p);
    switch (cls.kind) {
        case DecayKind::stretched_exponential:
        case DecayKind::pure_exponential: return MomentStatus::finite;
        case DecayKind::power_law: {
            const double threshold = std::abs(p.a) - 1.0;
            if (static_cast<double>(n) < threshold) return MomentStatus::finite;
            if (static_cast<double>(n) == threshold) return MomentStatus::marginal;
            return MomentStatus::diverging;
        }
        case DecayKind::growing:
        case DecayKind::bounded_nondecaying: return MomentStatus::diverging;
    }
    return MomentStatus::diverging;
}

namespace {

// For r >= R: int_R^r sin^2(kz) z^-beta dz >= (r^eps - R^eps)/(2 eps) - R^-beta/(2k)
// (beta < 1), or >= ln(r/R)/2 - 1/(2kR) (beta = 1), by the second mean value
// theorem on the cos(2kz) part. With chi^2 <= f^2/k^2 this bounds the tail.
double tail_bound(const ModelParams& p, int n, double R, double I_R) {
    const double abs_a = std::abs(p.a);
    const double k = p.k;
    const double log_k = 2.0 * std::log(p.A) - 2.0 * std::log(k) + 2.0 * p.a * I_R +
                         abs_a * std::pow(R, -p.beta) / k;
    if (p.beta < 1.0) {
        const double eps = 1.0 - p.beta;
        const double u_R = abs_a / eps * std::pow(R, eps);
        const double s = (n + 1.0) / eps;
        const double q = boost::math::gamma_q(s, u_R);
        if (q == 0.0) return 0.0;
        const double log_tail = log_k + u_R - std::log(eps) + s * std::log(eps / abs_a) +
                                std::log(q) + boost::math::lgamma(s);
        return std::exp(log_tail);
    }
    // beta = 1: f^2 <= K (r/R)^-|a|, integral R^{n+1}/(|a| - n - 1).
    return std::exp(log_k) * std::pow(R, n + 1.0) / (abs_a - n - 1.0);
}

}  // namespace

std::vector<MomentResult> norm_and_moments(const ModelParams& p, int n_max, double r_cut,
                                           const Numerics& num) {
    p.validate();
    if (n_max < 0) throw DomainError("norm_and_moments: n_max must be nonnegative");
    if (!(r_cut >= 50.0 / p.k)) throw DomainError("norm_and_moments: r_cut must be at least 50/k");

    std::vector<MomentResult> out;
    double I_R = 0.0;
    if (p.a < 0.0 && p.beta <= 1.0) I_R = modulation_integral(p, r_cut, default_path(p), num);
    for (int n = 0; n <= n_max; ++n) {
        MomentResult m;
        m.n = n;
        m.status = moment_status(p, n);
        try {
            m.partial = partial_moment(p, n, r_cut, num);
        } catch (const OverflowError&) {
            m.partial = std::numeric_limits<double>::infinity();
        }
        m.tail_bound = m.status == MomentStatus::finite ? tail_bound(p, n, r_cut, I_R)
                                                        : std::numeric_limits<double>::infinity();
        out.push_back(m);
    }
    return out;
}

}  // namespace vnw
