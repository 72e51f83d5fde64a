#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bsde/condexp.hpp"

using namespace bsde;

TEST_CASE("regression reproduces in-span targets exactly") {
    TimeGrid grid = build_grid(1.0, 64);
    BrownianEnsemble ens = sample_brownian(grid, 1, 4096, 21);
    RegressionEngine reg(ens, 3);
    CHECK(reg.basis_size() == 4);

    int i = 32;
    const Mat& b = ens.value_at(i);
    Mat target(2, b.cols());
    for (int m = 0; m < b.cols(); ++m) {
        double x = b(0, m);
        target(0, m) = 2.0 - x + 0.5 * x * x;
        target(1, m) = x * x * x;
    }
    Mat fit = reg.project(i, target);
    CHECK((fit - target).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("regression projects martingales onto their current value") {
    TimeGrid grid = build_grid(1.0, 64);
    int M = 4096;
    BrownianEnsemble ens = sample_brownian(grid, 1, M, 22);
    RegressionEngine reg(ens, 3);

    for (int i : {8, 32, 55}) {
        double t = grid.node(i);
        double dt = grid.dt(i);
        const Mat& now = ens.value_at(i);
        const Mat& next = ens.value_at(i + 1);

        // E[B_{t+dt} | B_t] = B_t. OLS noise has per-path RMS about
        // sqrt(nbasis * dt / M); allow five times that.
        Mat fit = reg.project(i, next);
        double rms = std::sqrt((fit - now).row(0).squaredNorm() / M);
        CHECK(rms < 5.0 * std::sqrt(4.0 * dt / M));

        // E[B_{t+dt}^2 | B_t] = B_t^2 + dt, noise variance 4 t dt + 2 dt^2.
        Mat sq = next.array().square().matrix();
        Mat want = (now.array().square() + dt).matrix();
        Mat fit2 = reg.project(i, sq);
        double rms2 = std::sqrt((fit2 - want).row(0).squaredNorm() / M);
        CHECK(rms2 < 5.0 * std::sqrt(4.0 * (4.0 * t * dt + 2.0 * dt * dt) / M));
    }
}

TEST_CASE("initial node degenerates to the sample mean") {
    TimeGrid grid = build_grid(1.0, 16);
    BrownianEnsemble ens = sample_brownian(grid, 2, 512, 23);
    RegressionEngine reg(ens, 3);
    CHECK(reg.basis_size() == 10);

    Mat rhs(3, 512);
    for (int r = 0; r < 3; ++r)
        for (int m = 0; m < 512; ++m) rhs(r, m) = std::sin(r + 0.01 * m);
    Mat fit = reg.project(0, rhs);
    for (int r = 0; r < 3; ++r) {
        double mean = rhs.row(r).mean();
        for (int m = 0; m < 512; ++m)
            CHECK(fit(r, m) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("regression rejects mismatched paths and degenerate conditioning") {
    TimeGrid grid = build_grid(1.0, 8);
    BrownianEnsemble ens = sample_brownian(grid, 1, 256, 24);
    RegressionEngine reg(ens, 3);
    CHECK_THROWS_AS(reg.project(3, Mat::Zero(1, 100)), std::invalid_argument);
    CHECK_THROWS_AS(reg.project(-1, Mat::Zero(1, 256)), std::invalid_argument);

    // With the pivot-ratio cap at 1 any step with a genuine basis must abort;
    // the initial node has a single pivot and stays usable.
    RegressionEngine tight(ens, 3, 1.0 + 1e-9);
    CHECK_NOTHROW(tight.project(0, Mat::Zero(1, 256)));
    CHECK_THROWS_AS(tight.project(4, Mat::Zero(1, 256)), std::runtime_error);
}

TEST_CASE("lattice one-step expectations match closed forms") {
    TimeGrid grid = build_grid(1.0, 32);
    Lattice1D lat(grid);
    CHECK(lat.points().size() == 801);
    CHECK(lat.points()(400) == doctest::Approx(0.0).epsilon(1e-14));

    int i = 10;
    double dt = grid.dt(i);

    // Quadratic handle: E[(x + dW)^2] = x^2 + dt, exact for Gauss-Hermite.
    Vec got = lat.step_expectation(i, [](double x) { return x * x; });
    for (int j = 0; j < got.size(); ++j) {
        double x = lat.points()(j);
        CHECK(got(j) == doctest::Approx(x * x + dt).epsilon(1e-10));
    }

    // Exponential handle: E[e^{x + dW}] = e^{x + dt/2}; Gauss-Hermite with 20
    // nodes resolves it to near machine accuracy at this step size.
    Vec ge = lat.step_expectation(i, [](double x) { return std::exp(x); });
    for (int j = 0; j < ge.size(); j += 40) {
        double x = lat.points()(j);
        CHECK(ge(j) == doctest::Approx(std::exp(x + 0.5 * dt)).epsilon(1e-12));
    }
}

TEST_CASE("lattice interpolation and grid-sampled expectations") {
    TimeGrid grid = build_grid(1.0, 32);
    Lattice1D lat(grid);
    const Vec& x = lat.points();

    // Linear functions interpolate exactly; beyond the ends values clamp.
    Vec lin(x.size());
    for (int j = 0; j < x.size(); ++j) lin(j) = 3.0 * x(j) - 1.0;
    CHECK(lat.interp(lin, 0.1234) == doctest::Approx(3.0 * 0.1234 - 1.0).epsilon(1e-12));
    CHECK(lat.interp(lin, 1e9) == lin(x.size() - 1));
    CHECK(lat.interp(lin, -1e9) == lin(0));

    // Smooth values given on the lattice: interpolation error is O(h^2).
    Vec vs(x.size());
    for (int j = 0; j < x.size(); ++j) vs(j) = std::sin(x(j));
    Vec stepped = lat.step_expectation(5, vs);
    double dt = grid.dt(5);
    // E[sin(x + dW)] = sin(x) e^{-dt/2}
    int mid = 400;
    for (int j : {mid - 120, mid, mid + 77}) {
        double want = std::sin(x(j)) * std::exp(-0.5 * dt);
        CHECK(std::abs(stepped(j) - want) < 1e-4);
    }
}
