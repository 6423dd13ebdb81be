#pragma once

// Numerov integration of chi'' = (V - k^2) chi, used to confirm independently
// that the constructed chi solves the radial equation at E = k^2.

#include <Eigen/Core>

#include "vnw/model.hpp"

namespace vnw {

struct NumerovSolution {
    // Integrated chi up to the factor exp(log_scale).
    Eigen::VectorXd values;
    double log_scale = 0.0;
};

// V must be sampled on a uniform grid with spacing h starting at r = 0 or
// r = h. chi(0) = 0 and chi(h) = h. V(0), when present, multiplies chi(0) = 0
// and does not enter the result. The running pair is renormalized whenever
// |chi| exceeds 1e150.
NumerovSolution numerov_integrate(const SampledFunction& V, double k, double h);

struct ShootingResult {
    GridSpec grid;
    Eigen::VectorXd values;  // numeric chi times scale_factor
    double scale_factor = 1.0;
    double rel_l2_error = 0.0;
};

// Least-squares scale s minimizing |s * numeric - analytic|.
ShootingResult match_to_analytic(const GridSpec& grid, const NumerovSolution& numeric,
                                 const Eigen::VectorXd& analytic);

// Integrates against potential(p, r) at E = k^2 and compares with chi(p, r).
// g.r_min must be 0; for beta > 1 the grid used starts at r = h.
ShootingResult verify_eigenfunction(const ModelParams& p, const GridSpec& g,
                                    const Numerics& num = {});

// Same potential, integrated at E = energy_k^2 (detuned control). For beta > 1
// the grid starts at r = h and the first steps out of the origin use a cascade
// of steps h 2^-40, ..., h/2, h with V evaluated directly.
NumerovSolution integrate_at(const ModelParams& p, const GridSpec& g, double energy_k);

}  // namespace vnw
