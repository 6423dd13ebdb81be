#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vnw/model.hpp"

using namespace vnw;
using std::numbers::pi;

namespace {

ModelParams params(double k, double a, double beta, double A = 1.0) {
    ModelParams p;
    p.k = k;
    p.a = a;
    p.beta = beta;
    p.A = A;
    return p;
}

double eq9(const ModelParams& p, double r) {
    return potential_from_logderivative(log_derivative(p, r), log_derivative_prime(p, r), p.k, r);
}

}  // namespace

TEST_CASE("parameter and grid validation") {
    CHECK_NOTHROW(params(1, -1, 0.5).validate());
    CHECK_THROWS_AS(params(0, -1, 0.5).validate(), DomainError);
    CHECK_THROWS_AS(params(1, -1, 3.0).validate(), DomainError);
    CHECK_THROWS_AS(params(1, -1, -0.1).validate(), DomainError);
    CHECK_THROWS_AS(params(1, -1, 0.5, 0.0).validate(), DomainError);
    CHECK(params(1, -1, 0.25).epsilon() == 0.75);

    GridSpec g{0.0, 10.0, 11};
    CHECK(g.step() == 1.0);
    CHECK(g[10] == 10.0);
    CHECK(g.radii().size() == 11);
    CHECK_THROWS_AS((GridSpec{1.0, 1.0, 5}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{0.0, 1.0, 1}.validate()), DomainError);

    const auto mask = near_node_mask(GridSpec{0.0, 2.0 * pi, 5}, 1.0, 1e-9);
    CHECK(mask[0]);
    CHECK_FALSE(mask[1]);
    CHECK(mask[2]);
    CHECK(mask[4]);
}

TEST_CASE("chi0 and phi") {
    CHECK(chi0(2.0, 0.0) == 0.0);
    CHECK(chi0(1.0, pi / 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(chi0(2.0, pi / 4) == doctest::Approx(0.5).epsilon(1e-15));

    CHECK(phi(params(1, 2, 1), 2.0) == 1.0);
    CHECK(phi(params(1, -1, 0), 17.0) == -1.0);
    CHECK(phi(params(1, -1, 0.5), 4.0) == -0.5);
    CHECK_THROWS_AS(phi(params(1, -1, 0.5), 0.0), SingularPointError);

    Eigen::ArrayXd r(3);
    r << 0.0, pi / 4, pi / 2;
    const Eigen::ArrayXd c = chi0(2.0, r);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("log_derivative") {
    const auto p = params(1, -1, 0.5);
    for (int n = 1; n <= 5; ++n) CHECK(std::abs(log_derivative(p, n * pi)) <= 1e-30);
    CHECK(log_derivative(p, pi / 2) == doctest::Approx(-1.0 / std::sqrt(pi / 2)).epsilon(1e-14));
    CHECK(log_derivative(p, pi / 2) == doctest::Approx(-0.79788).epsilon(1e-5));
    CHECK(log_derivative(p, 0.0) == 0.0);
    CHECK(log_derivative(params(1, 2, 1.9), 0.0) == 0.0);
    CHECK_THROWS_AS(log_derivative(params(1, 2, 2.0), 0.0), SingularPointError);
}

TEST_CASE("potential: direct values") {
    for (double r : {0.0, 0.3, 5.0, 77.7}) CHECK(potential(params(1.3, 0.0, 0.5), r) == 0.0);
    const auto p = params(1, -1, 0.5);
    for (int n = 1; n <= 30; ++n) CHECK(std::abs(potential(p, n * pi)) <= 1e-13);
    CHECK(std::abs(potential(params(1, 1, 1), pi / 2)) <= 1e-15);
    CHECK(potential(params(1, 1, 0), pi / 4) == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(potential(p, 0.0) == 0.0);
    CHECK(potential(params(2, -1.5, 1.0), 0.0) == doctest::Approx(3.0 * -1.5 * 4.0));
    CHECK(potential(params(2, -1.5, 1.0), 1e-7) ==
          doctest::Approx(potential(params(2, -1.5, 1.0), 0.0)).epsilon(1e-5));
    CHECK_THROWS_AS(potential(params(1, -1, 1.5), 0.0), SingularPointError);
    CHECK_THROWS_AS(potential(p, -1.0), DomainError);

    Eigen::ArrayXd r(2);
    r << pi / 4, 1.0;
    const Eigen::ArrayXd v = potential(params(1, 1, 0), r);
    CHECK(v[0] == doctest::Approx(2.25).epsilon(1e-14));
}

TEST_CASE("potential_from_logderivative") {
    CHECK(potential_from_logderivative(0.0, 0.0, 1.0, 1.0) == 0.0);
    CHECK(potential_from_logderivative(0.5, 1.0, 1.0, pi / 4) == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(eq9(params(1, 1, 0), pi / 4) == doctest::Approx(2.25).epsilon(1e-14));
    CHECK_THROWS_AS(potential_from_logderivative(0.1, 0.1, 1.0, pi + 1e-8), SingularPointError);
    CHECK_THROWS_AS(potential_from_logderivative(0.1, 0.1, 1.0, 0.0), SingularPointError);

    const auto p = params(1, -1, 0.5);
    CHECK(std::abs(potential(p, 10.0) - eq9(p, 10.0)) <= 1e-12 * (1.0 + std::abs(potential(p, 10.0))));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.1, 100.0);
    double worst = 0.0;
    int used = 0;
    while (used < 1000) {
        const double r = dist(rng);
        if (distance_to_node(p.k, r) < 1e-3) continue;
        const double v = potential(p, r);
        worst = std::max(worst, std::abs(v - eq9(p, r)) / (1.0 + std::abs(v)));
        ++used;
    }
    CHECK(worst <= 1e-11);
}

TEST_CASE("modulation integral: closed form against quadrature") {
    const auto p = params(1, -1, 0.5);
    CHECK(std::abs(modulation_integral(p, 20.0, Path::closed_form) -
                   modulation_integral(p, 20.0, Path::quadrature)) <= 1e-9);
    CHECK(modulation_integral(params(1, -1, 0.0), pi, Path::closed_form) ==
          doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(modulation_integral(p, 0.0, Path::closed_form) == 0.0);

    double worst = 0.0;
    for (double beta : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        for (double k : {0.5, 1.0, 2.0}) {
            const auto q = params(k, -1, beta);
            for (double r = 0.05; r <= 100.0; r *= 1.21) {
                worst = std::max(worst, std::abs(modulation_integral(q, r, Path::closed_form) -
                                                 modulation_integral(q, r, Path::quadrature)));
            }
            worst = std::max(worst, std::abs(modulation_integral(q, 100.0, Path::closed_form) -
                                             modulation_integral(q, 100.0, Path::quadrature)));
        }
    }
    CHECK(worst <= 1e-8);

    CHECK_THROWS_AS(modulation_integral(params(1, -1, 1.5), 1.0, Path::closed_form), DomainError);
    CHECK_THROWS_AS(modulation_integral(p, -1.0, Path::quadrature), DomainError);
    CHECK(closed_form_supported(0.0));
    CHECK(closed_form_supported(1.0));
    CHECK_FALSE(closed_form_supported(1.01));
    CHECK(default_path(params(1, -1, 2.0)) == Path::quadrature);
}

TEST_CASE("modulation integral: logarithmic limit at beta = 1") {
    const auto p = params(1, -1, 1.0);
    const double limit = 0.5 * (specfun::euler_gamma<double> + std::numbers::ln2);
    const double r = 1e4;
    const double diff = modulation_integral(p, r, Path::closed_form) - 0.5 * std::log(r);
    CHECK(std::abs(diff - limit) <= 1e-4);
}

TEST_CASE("modulating function") {
    const auto p = params(1, -1, 0.5, 2.5);
    CHECK(modulating_function(p, 0.0, Path::closed_form) == 2.5);
    for (double r : {0.0, 1.0, 50.0}) CHECK(modulating_function(params(1, 0, 0.5, 3.0), r, Path::quadrature) == 3.0);
    for (double r = 0.1; r < 80.0; r += 3.7) CHECK(modulating_function(p, r, Path::closed_form) > 0.0);

    // f (kr)^{3/2} tends to a constant for beta = 1, a = -3.
    const auto q = params(1, -3, 1.0);
    auto scaled = [&](double r) { return modulating_function(q, r, Path::closed_form) * std::pow(r, 1.5); };
    const double expected = std::exp(-1.5 * (specfun::euler_gamma<double> + std::numbers::ln2));
    CHECK(scaled(1e3) == doctest::Approx(expected).epsilon(1e-2));
    CHECK(scaled(1e4) == doctest::Approx(expected).epsilon(1e-3));

    CHECK_THROWS_AS(modulating_function(params(1, 5, 0.0), 1e3, Path::closed_form), OverflowError);
}

TEST_CASE("chi") {
    const auto p = params(1, -1, 0.5);
    CHECK(chi(p, 0.0, Path::closed_form) == 0.0);
    for (double r : {0.3, 2.0, 11.0}) {
        CHECK(chi(params(1.7, 0, 0.5), r, Path::closed_form) == std::sin(1.7 * r) / 1.7);
    }
    // envelope exp(-sqrt(r)) up to the constant factor exp(a * const)
    const double r1 = 100.5 * pi, r2 = 400.5 * pi;
    const double ratio = std::abs(chi(p, r2, Path::closed_form) / chi(p, r1, Path::closed_form));
    const double expected = std::exp(-(std::sqrt(r2) - std::sqrt(r1)));
    CHECK(ratio == doctest::Approx(expected).epsilon(1e-3));

    // zeros only at the nodes of sin(kr)
    const auto q = params(2.0, -1, 0.75);
    for (int n = 1; n <= 20; ++n) {
        CHECK(std::abs(chi(q, n * pi / 2.0, Path::closed_form)) <= 1e-15);
        CHECK(chi(q, (n - 0.5) * pi / 2.0, Path::closed_form) * (n % 2 == 1 ? 1.0 : -1.0) > 0.0);
    }
}

TEST_CASE("chi derivatives") {
    const auto free = chi_derivatives(params(1.5, 0, 0.5), 0.8, Path::closed_form);
    CHECK(free.value == doctest::Approx(std::sin(1.2) / 1.5).epsilon(1e-15));
    CHECK(free.first == doctest::Approx(std::cos(1.2)).epsilon(1e-15));
    CHECK(free.second == doctest::Approx(-1.5 * std::sin(1.2)).epsilon(1e-15));

    const auto near0 = chi_derivatives(params(1, -1, 0.5, 1.7), 1e-9, Path::closed_form);
    CHECK(near0.first == doctest::Approx(1.7).epsilon(1e-8));

    // finite-difference cross-check of the analytic first derivative
    const auto p = params(1.2, -0.8, 0.3);
    const double r = 3.3, h = 1e-5;
    const double fd = (chi(p, r + h, Path::closed_form) - chi(p, r - h, Path::closed_form)) / (2 * h);
    CHECK(chi_derivatives(p, r, Path::closed_form).first == doctest::Approx(fd).epsilon(1e-8));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rd(0.05, 60.0);
    for (const auto& q : {params(1, -1, 0.5), params(2, -3, 1.0), params(0.5, 0.7, 0.0), params(1, -1, 2.2)}) {
        for (int i = 0; i < 200; ++i) {
            const double x = rd(rng);
            if (distance_to_node(q.k, x) < 1e-3) continue;
            const auto d = chi_derivatives(q, x, default_path(q));
            CHECK(std::abs(normalized_residual(q, x, d)) <= 1e-10);
        }
    }
}

TEST_CASE("sample") {
    const GridSpec g{0.0, 30.0, 301};
    const auto v = sample(params(1, 0, 0.5), g, Quantity::potential, Path::closed_form);
    CHECK(v.values.size() == 301);
    CHECK(v.values.isZero(0.0));
    CHECK(v.label == Quantity::potential);

    const auto c = sample(params(1, -1, 0.5), g, Quantity::chi, Path::closed_form);
    CHECK(c.values[0] == 0.0);
    const auto cq = sample(params(1, -1, 0.5), g, Quantity::chi, Path::quadrature);
    CHECK((c.values - cq.values).cwiseAbs().maxCoeff() <= 1e-9);

    const auto res = sample(params(1, -1, 0.5), GridSpec{0.1, 60.0, 6000}, Quantity::residual,
                            Path::closed_form);
    CHECK(res.values.cwiseAbs().maxCoeff() <= 1e-9);

    const auto C = sample(params(1, -1, 0.5), g, Quantity::log_derivative, Path::closed_form);
    CHECK(C.values[0] == 0.0);
    CHECK(to_string(Quantity::potential) == "V");
    CHECK(to_string(Quantity::chi) == "chi");

    try {
        sample(params(1, -1, 1.5), GridSpec{0.0, 1.0, 5}, Quantity::potential, Path::quadrature);
        FAIL("expected SingularPointError");
    } catch (const SingularPointError& e) {
        CHECK(std::string(e.what()).find("index 0") != std::string::npos);
    }
}

TEST_CASE("A is a pure scale and never affects V") {
    const auto p1 = params(1, -1, 0.5, 1.0);
    const auto p2 = params(1, -1, 0.5, 7.0);
    for (double r : {0.5, 3.0, 20.0}) {
        CHECK(potential(p1, r) == potential(p2, r));
        CHECK(chi(p2, r, Path::closed_form) == doctest::Approx(7.0 * chi(p1, r, Path::closed_form)).epsilon(1e-15));
    }
}

TEST_CASE("ModulationEvaluator agrees with direct evaluation") {
    for (const auto& p : {params(1, -1, 0.5), params(0.7, -2, 1.8)}) {
        ModulationEvaluator ev(p, Path::quadrature);
        for (double r : {0.0, 0.2, 5.0, 33.3, 12.0, 90.0}) {
            CHECK(std::abs(ev(r) - modulation_integral(p, r, Path::quadrature)) <= 1e-10);
        }
    }
    ModulationEvaluator cf(params(1, -1, 0.5), Path::closed_form);
    CHECK(cf.log_f(0.0) == 0.0);
    CHECK_THROWS_AS(ModulationEvaluator(params(1, -1, 1.5), Path::closed_form), DomainError);
}
