#include "vnw/ode.hpp"

#include <cmath>

namespace vnw {

namespace {

constexpr double overflow_threshold = 1e150;

GridSpec shifted_grid(const ModelParams& p, const GridSpec& g) {
    if (p.beta <= 1.0) return g;
    return GridSpec{g.step(), g.r_max, g.n_points - 1};
}

}  // namespace

namespace {

// Numerov recurrence for i > from, given values[from - 1] and values[from].
// A point at r = 0 carries chi = 0, so its weight never matters.
void advance(const SampledFunction& V, double k, double h, long from, NumerovSolution& sol) {
    const long n = V.grid.n_points;
    const double h2 = h * h / 12.0;
    const double k2 = k * k;
    auto weight = [&](long i) { return 1.0 - h2 * (V.values[i] - k2); };
    auto& out = sol.values;

    double prev = from >= 1 ? out[from - 1] : 0.0;
    double prev_w = from >= 1 && !(V.grid[from - 1] == 0.0) ? weight(from - 1) : 1.0;
    double curr = out[from];
    double curr_w = weight(from);
    for (long i = from + 1; i < n; ++i) {
        const double next_w = weight(i);
        const double next = ((12.0 - 10.0 * curr_w) * curr - prev_w * prev) / next_w;
        out[i] = next;
        prev = curr;
        prev_w = curr_w;
        curr = next;
        curr_w = next_w;
        if (std::abs(next) > overflow_threshold) {
            out.head(i + 1) /= overflow_threshold;
            prev /= overflow_threshold;
            curr /= overflow_threshold;
            sol.log_scale += std::log(overflow_threshold);
        }
    }
}

void check_grid(const SampledFunction& V, double h) {
    const GridSpec& g = V.grid;
    g.validate();
    if (!(h > 0.0) || std::abs(g.step() - h) > 1e-9 * h) {
        throw DomainError("numerov_integrate: grid spacing does not match h (non-uniform grid)");
    }
    if (g.r_min != 0.0 && std::abs(g.r_min - h) > 1e-9 * h) {
        throw DomainError("numerov_integrate: grid must start at r = 0 or r = h");
    }
    if (!V.values.allFinite()) throw DomainError("numerov_integrate: non-finite potential sample");
}

constexpr int cascade_levels = 40;
constexpr long cascade_span = 512;

// chi(0) = 0, chi'(0) = 1 integrated with steps h 2^-L, ..., h/2, h. The level
// with step s covers [span s / 2, span s]. Writes chi(j h) into
// sol.values[j - 1] (the grid starting at r = h) and returns the last j done.
long cascade_start(const ModelParams& p, double energy_k, double h, long n_points, NumerovSolution& sol) {
    const double E = energy_k * energy_k;
    const long per_h = 1L << cascade_levels;
    long unit = 1;  // current step in units of h / per_h
    long pos = 1;   // current radius in the same units
    double s = h / static_cast<double>(per_h);
    auto V = [&](long at) { return potential(p, static_cast<double>(at) * (h / static_cast<double>(per_h))); };

    // chi at pos - 2 unit, pos - unit, pos
    double back2 = 0.0;
    double back1 = 0.0;
    double curr = s;
    double w_back1 = 1.0;
    double w_curr = 1.0 - s * s / 12.0 * (V(pos) - E);
    bool back1_at_origin = true;
    long last_j = 0;

    while (true) {
        if (pos % per_h == 0) {
            last_j = pos / per_h;
            sol.values[last_j - 1] = curr;
            if (unit == per_h || last_j == n_points) break;
        }
        if (unit < per_h && pos >= cascade_span * unit && pos % (2 * unit) == 0) {
            // double the step: the new previous point is pos - 2 unit
            unit *= 2;
            s *= 2.0;
            back1 = back2;
            back1_at_origin = pos == unit;
            w_back1 = back1_at_origin ? 1.0 : 1.0 - s * s / 12.0 * (V(pos - unit) - E);
            w_curr = 1.0 - s * s / 12.0 * (V(pos) - E);
        }
        const double w_next = 1.0 - s * s / 12.0 * (V(pos + unit) - E);
        const double next = ((12.0 - 10.0 * w_curr) * curr - w_back1 * back1) / w_next;
        back2 = back1;
        back1 = curr;
        curr = next;
        w_back1 = w_curr;
        w_curr = w_next;
        back1_at_origin = false;
        pos += unit;
    }
    return last_j;
}

}  // namespace

NumerovSolution numerov_integrate(const SampledFunction& V, double k, double h) {
    check_grid(V, h);
    NumerovSolution out{Eigen::VectorXd::Zero(V.grid.n_points), 0.0};
    if (V.grid.r_min == 0.0) {
        out.values[1] = h;
        advance(V, k, h, 1, out);
    } else {
        // chi(0) = 0 sits one step before the first grid point.
        out.values[0] = h;
        advance(V, k, h, 0, out);
    }
    return out;
}

ShootingResult match_to_analytic(const GridSpec& grid, const NumerovSolution& numeric,
                                 const Eigen::VectorXd& analytic) {
    const Eigen::VectorXd& x = numeric.values;
    const double xx = x.squaredNorm();
    if (!(xx > 0.0)) throw ConsistencyError("match_to_analytic: numeric solution vanishes");
    const double s = x.dot(analytic) / xx;
    if (s == 0.0) throw ConsistencyError("match_to_analytic: zero scale factor");
    ShootingResult out;
    out.grid = grid;
    out.values = s * x;
    out.scale_factor = s * std::exp(-numeric.log_scale);
    const double norm = analytic.norm();
    out.rel_l2_error = (out.values - analytic).norm() / (norm > 0.0 ? norm : 1.0);
    return out;
}

NumerovSolution integrate_at(const ModelParams& p, const GridSpec& g, double energy_k) {
    p.validate();
    g.validate();
    if (g.r_min != 0.0) throw DomainError("integrate_at: grid must start at r = 0");
    const GridSpec used = shifted_grid(p, g);
    const SampledFunction V = sample(p, used, Quantity::potential, default_path(p));
    if (p.beta <= 1.0) return numerov_integrate(V, energy_k, g.step());

    // V ~ r^{1 - beta} near the origin spoils the uniform-step start.
    const double h = g.step();
    check_grid(V, h);
    NumerovSolution out{Eigen::VectorXd::Zero(used.n_points), 0.0};
    const long last_j = cascade_start(p, energy_k, h, used.n_points, out);
    if (last_j < used.n_points) advance(V, energy_k, h, last_j - 1, out);
    return out;
}

ShootingResult verify_eigenfunction(const ModelParams& p, const GridSpec& g, const Numerics& num) {
    const NumerovSolution numeric = integrate_at(p, g, p.k);
    const GridSpec used = shifted_grid(p, g);
    const SampledFunction analytic = sample(p, used, Quantity::chi, default_path(p), num);
    return match_to_analytic(used, numeric, analytic.values);
}

}  // namespace vnw
