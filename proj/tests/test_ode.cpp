#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vnw/ode.hpp"

using namespace vnw;
using std::numbers::pi;

namespace {

ModelParams params(double k, double a, double beta) {
    ModelParams p;
    p.k = k;
    p.a = a;
    p.beta = beta;
    return p;
}

GridSpec grid(double r_max, double h) {
    return GridSpec{0.0, r_max, std::lround(r_max / h) + 1};
}

SampledFunction zero_potential(const GridSpec& g) {
    return SampledFunction{g, Eigen::VectorXd::Zero(g.n_points), Quantity::potential};
}

double free_error(double k, double h) {
    const GridSpec g = grid(20.0, h);
    const NumerovSolution s = numerov_integrate(zero_potential(g), k, g.step());
    const Eigen::VectorXd exact = ((k * g.radii()).sin() / k).matrix();
    return match_to_analytic(g, s, exact).rel_l2_error;
}

double tail_max(const GridSpec& g, const NumerovSolution& s, double lo, double hi) {
    double m = 0.0;
    for (long i = 0; i < g.n_points; ++i) {
        if (g[i] >= lo && g[i] <= hi) m = std::max(m, std::abs(s.values[i]));
    }
    return m * std::exp(s.log_scale);
}

}  // namespace

TEST_CASE("free particle") {
    CHECK(free_error(1.0, 1e-3) <= 1e-8);

    const GridSpec g = grid(20.0, 1e-3);
    const NumerovSolution s = numerov_integrate(zero_potential(g), 2.0, g.step());
    // sign changes lie within h of n pi / 2
    for (long i = 2; i < g.n_points; ++i) {
        if ((s.values[i - 1] > 0.0) != (s.values[i] > 0.0) && s.values[i] != 0.0) {
            const double r = g[i];
            const double node = std::round(r / (pi / 2)) * (pi / 2);
            CHECK(std::abs(r - node) <= g.step());
        }
    }
    const Eigen::VectorXd exact = ((2.0 * g.radii()).sin() / 2.0).matrix();
    const ShootingResult m = match_to_analytic(g, s, exact);
    CHECK(m.rel_l2_error <= 1e-8);
    CHECK(m.scale_factor == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("global fourth order convergence") {
    const double e1 = free_error(1.0, 0.1);
    const double e2 = free_error(1.0, 0.05);
    const double e3 = free_error(1.0, 0.025);
    const double slope = (std::log(e1) - std::log(e3)) / (std::log(0.1) - std::log(0.025));
    CHECK(slope >= 3.5);
    CHECK(slope <= 4.5);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
}

TEST_CASE("constructed eigenfunctions are reproduced") {
    const ShootingResult r = verify_eigenfunction(params(1, -1, 0.5), grid(60.0, 1e-3));
    CHECK(r.rel_l2_error <= 1e-5);
    CHECK(r.scale_factor != 0.0);
    CHECK(r.rel_l2_error >= 0.0);

    CHECK(verify_eigenfunction(params(1, 0, 0.5), grid(60.0, 1e-3)).rel_l2_error <= 1e-8);
    CHECK(verify_eigenfunction(params(1, -3, 1.0), grid(60.0, 1e-3)).rel_l2_error <= 1e-5);
    CHECK(verify_eigenfunction(params(2, -1, 0.25), grid(30.0, 1e-3 * pi)).rel_l2_error <= 1e-5);

    const ShootingResult shifted = verify_eigenfunction(params(1, -1, 1.5), grid(30.0, 1e-3));
    CHECK(shifted.grid.r_min == doctest::Approx(1e-3));
    CHECK(shifted.rel_l2_error <= 1e-5);

    // V ~ r^{1 - beta} at the origin
    for (double beta : {2.0, 2.5, 2.9}) {
        CHECK(verify_eigenfunction(params(1, -1, beta), grid(60.0, 2e-3 * pi)).rel_l2_error <= 1e-5);
    }
}

TEST_CASE("numeric nodes coincide with the nodes of sin(kr)") {
    const auto p = params(1, -1, 0.5);
    const GridSpec g = grid(40.0, 1e-3);
    const NumerovSolution s = integrate_at(p, g, p.k);
    int crossings = 0;
    for (long i = 2; i < g.n_points; ++i) {
        if ((s.values[i - 1] > 0.0) != (s.values[i] > 0.0) && s.values[i] != 0.0) {
            const double node = std::round(g[i] / pi) * pi;
            CHECK(std::abs(g[i] - node) <= g.step());
            ++crossings;
        }
    }
    CHECK(crossings == 12);
}

TEST_CASE("linearity and scale invariance") {
    const auto p = params(1, -1, 0.5);
    const GridSpec g = grid(30.0, 1e-3);
    SampledFunction V = sample(p, g, Quantity::potential, Path::closed_form);
    const NumerovSolution s = numerov_integrate(V, p.k, g.step());
    // The recurrence is linear: any solution scaled by 2 obeys it, so the
    // doubled-slope run is 2 * s.
    Eigen::VectorXd doubled(g.n_points);
    doubled[0] = 0.0;
    doubled[1] = 2.0 * g.step();
    const double h2 = g.step() * g.step() / 12.0;
    for (long i = 2; i < g.n_points; ++i) {
        auto w = [&](long j) { return 1.0 - h2 * (V.values[j] - 1.0); };
        doubled[i] = ((12.0 - 10.0 * w(i - 1)) * doubled[i - 1] - w(i - 2) * doubled[i - 2]) / w(i);
    }
    CHECK((doubled - 2.0 * s.values).cwiseAbs().maxCoeff() <= 1e-12 * s.values.cwiseAbs().maxCoeff());

    const Eigen::VectorXd analytic = sample(p, g, Quantity::chi, Path::closed_form).values;
    const ShootingResult a = match_to_analytic(g, s, analytic);
    const ShootingResult b = match_to_analytic(g, NumerovSolution{doubled, 0.0}, analytic);
    CHECK(a.rel_l2_error == doctest::Approx(b.rel_l2_error).epsilon(1e-10));
    CHECK(b.scale_factor == doctest::Approx(0.5 * a.scale_factor).epsilon(1e-12));
}

TEST_CASE("detuned energy gives a non-decaying tail") {
    const auto p = params(1, -1, 0.5);
    const GridSpec g = grid(60.0, 1e-3);
    const NumerovSolution tuned = integrate_at(p, g, p.k);
    const NumerovSolution detuned = integrate_at(p, g, 1.1 * p.k);
    const double ratio = tail_max(g, detuned, 40.0, 60.0) / tail_max(g, tuned, 40.0, 60.0);
    MESSAGE("detuned/tuned tail ratio: " << ratio);
    CHECK(ratio >= 1e3);
}

TEST_CASE("overflow is renormalized") {
    const auto p = params(1, 2.0, 0.0);
    const GridSpec g = grid(400.0, 1e-2);
    const NumerovSolution s = integrate_at(p, g, p.k);
    CHECK(s.log_scale > 0.0);
    CHECK(s.values.allFinite());
    CHECK(s.values.cwiseAbs().maxCoeff() <= 1e150);
}

TEST_CASE("errors") {
    const GridSpec g = grid(10.0, 1e-2);
    CHECK_THROWS_AS(numerov_integrate(zero_potential(g), 1.0, 2e-2), DomainError);
    const GridSpec off{0.5, 10.0, 951};
    CHECK_THROWS_AS(numerov_integrate(zero_potential(off), 1.0, off.step()), DomainError);
    SampledFunction bad = zero_potential(g);
    bad.values[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(numerov_integrate(bad, 1.0, g.step()), DomainError);
    CHECK_THROWS_AS(verify_eigenfunction(params(1, -1, 0.5), off), DomainError);
    CHECK_THROWS_AS(match_to_analytic(g, NumerovSolution{Eigen::VectorXd::Zero(g.n_points), 0.0},
                                      Eigen::VectorXd::Ones(g.n_points)),
                    ConsistencyError);
}
