#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bsde/integrate.hpp"
#include "bsde/time_grid.hpp"

using namespace bsde;

TEST_CASE("uniform grid nodes and cell widths") {
    TimeGrid g = build_grid(1.0, 4);
    REQUIRE(g.steps() == 4);
    const double want[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i <= 4; ++i) CHECK(g.node(i) == doctest::Approx(want[i]).epsilon(1e-15));
    for (int i = 0; i < 4; ++i) CHECK(g.dt(i) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.horizon() == 1.0);
    CHECK_FALSE(g.truncated_tail());
}

TEST_CASE("grid construction rejects bad input") {
    CHECK_THROWS_AS(build_grid(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(-2.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(Horizon::unbounded(), 8, GridScheme::MappedExponential),
                    std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5, 1.0}, GridScheme::Uniform, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.1, 0.5, 1.0}, GridScheme::Uniform, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.0}, GridScheme::Uniform, false), std::invalid_argument);
}

TEST_CASE("mapped-exponential nodes follow the log formula and end exactly at T") {
    const double T = 2.0;
    const int n = 8;
    TimeGrid g = build_grid(T, n, GridScheme::MappedExponential);
    for (int i = 0; i <= n; ++i) {
        double w = static_cast<double>(i) / n;
        double want = -std::log(1.0 - w * (1.0 - std::exp(-T)));
        CHECK(g.node(i) == doctest::Approx(want).epsilon(1e-13));
    }
    CHECK(g.node(n) == T);

    // Far horizon: e^{-T} underflows, the last node must still be exact.
    TimeGrid far = build_grid(800.0, 8, GridScheme::MappedExponential);
    CHECK(far.node(8) == 800.0);
    for (int i = 0; i < 8; ++i) CHECK(far.node(i + 1) > far.node(i));
}

TEST_CASE("unbounded horizon cutoff matches the analytic tail root") {
    // Coefficients with u = t^2 e^{-t} and v^2 = 1/(1+t^2); the tail integral
    // beyond T is (T^2+2T+2)e^{-T} + pi/2 - arctan(T), which for tol = 1e-3 is
    // dominated by the arctan part, so the root is near 1/tan(1e-3).
    CoefficientSet cs;
    cs.u = [](double t) { return t * t * std::exp(-t); };
    cs.v = [](double t) { return 1.0 / std::sqrt(1.0 + t * t); };

    auto analytic_tail = [](double T) {
        return (T * T + 2.0 * T + 2.0) * std::exp(-T) + M_PI / 2.0 - std::atan(T);
    };
    double lo = 1.0, hi = 4096.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (analytic_tail(mid) <= 1e-3 ? hi : lo) = mid;
    }
    double t_ref = hi;
    CHECK(t_ref == doctest::Approx(999.9996667).epsilon(1e-6));

    TimeGrid g = build_grid(Horizon::unbounded(), 64, GridScheme::MappedExponential, &cs, 1e-3);
    CHECK(g.truncated_tail());
    CHECK(g.steps() == 64);
    CHECK(std::abs(g.horizon() - t_ref) < 0.05);
    CHECK(analytic_tail(g.horizon()) <= 1e-3 * (1.0 + 1e-3));
    CHECK(analytic_tail(0.999 * g.horizon()) > 1e-3);
}

TEST_CASE("open-midpoint quadrature handles integrable endpoint singularities") {
    TimeGrid g = build_grid(1.0, 1 << 14);
    double s1 = time_quadrature(g, [](double t) { return 1.0 / std::sqrt(t); });
    CHECK(std::abs(s1 - 2.0) < 1e-2);
    double s2 = time_quadrature(g, [](double t) { return std::abs(std::log(t)); });
    CHECK(std::abs(s2 - 1.0) < 1e-2);
    double s3 = time_quadrature(g, [](double t) { return t * t; });
    CHECK(s3 == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("quadrature on an unbounded-horizon grid recovers an exponential integral") {
    CoefficientSet cs;
    cs.u = [](double t) { return std::exp(-2.0 * t); };
    TimeGrid g = build_grid(Horizon::unbounded(), 1 << 12, GridScheme::MappedExponential, &cs, 8e-4);
    double s = time_quadrature(g, [](double t) { return std::exp(-2.0 * t); });
    CHECK(std::abs(s - 0.5) < 1e-3);
    // Weights sum to the cutoff horizon (the quadrature integrates 1 exactly
    // up to the mapped-midpoint rule's own consistency error).
    double total = time_quadrature(g, [](double) { return 1.0; });
    CHECK(total == doctest::Approx(g.horizon()).epsilon(5e-3));
}

TEST_CASE("graded integration and cumulative tables") {
    double v1 = integrate_graded([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0);
    CHECK(std::abs(v1 - 2.0) < 1e-7);
    double v2 = integrate_graded([](double t) { return std::abs(std::log(t)); }, 0.0, 1.0);
    CHECK(std::abs(v2 - 1.0) < 1e-8);

    CumTable tab([](double t) { return std::abs(std::log(t)); }, 1.0);
    // int_0^t |ln s| ds = t (1 - ln t) on (0,1].
    for (double t : {0.1, 0.5, 0.9}) {
        double want = t * (1.0 - std::log(t));
        CHECK(tab.at(t) == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK(tab.at(0.0) == 0.0);
    CHECK(tab.at(2.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("tail integrals under the rational substitution") {
    double a = integrate_tail([](double t) { return std::exp(-t); }, 2.0);
    CHECK(a == doctest::Approx(std::exp(-2.0)).epsilon(1e-7));
    double b = integrate_tail([](double t) { return 1.0 / (1.0 + t * t); }, 10.0);
    CHECK(b == doctest::Approx(M_PI / 2.0 - std::atan(10.0)).epsilon(1e-7));
}

TEST_CASE("Gauss-Legendre and Gauss-Hermite rules") {
    std::vector<double> x, w;
    gauss_legendre(16, x, w);
    double sw = 0.0, sx2 = 0.0;
    for (int i = 0; i < 16; ++i) {
        sw += w[i];
        sx2 += w[i] * x[i] * x[i];
    }
    CHECK(sw == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sx2 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

    gauss_hermite(20, x, w);
    double hw = 0.0, hx2 = 0.0, hx4 = 0.0;
    for (int i = 0; i < 20; ++i) {
        hw += w[i];
        hx2 += w[i] * x[i] * x[i];
        hx4 += w[i] * std::pow(x[i], 4);
    }
    CHECK(hw == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(hx2 == doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-12));
    CHECK(hx4 == doctest::Approx(std::sqrt(M_PI) * 0.75).epsilon(1e-12));
}
