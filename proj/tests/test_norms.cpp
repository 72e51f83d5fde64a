#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bsde/norms.hpp"

using namespace bsde;

namespace {
AdaptedField brownian_y(const BrownianEnsemble& ens) {
    int N = ens.grid.steps();
    AdaptedField y(N + 1, 1, 1, ens.paths());
    for (int i = 0; i <= N; ++i) y.step(i) = ens.value_at(i);
    return y;
}
}  // namespace

TEST_CASE("pth power constant") {
    CHECK(pth_power_constant(1.0) == 0.0);
    CHECK(pth_power_constant(2.0) == 1.0);
    CHECK(pth_power_constant(3.0) == 1.5);
    CHECK(pth_power_constant(1.5) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK_THROWS_AS(pth_power_constant(0.5), std::invalid_argument);
}

TEST_CASE("sup norm of a Brownian field sits between its pinned bounds") {
    TimeGrid grid = build_grid(1.0, 64);
    BrownianEnsemble ens = sample_brownian(grid, 1, 8192, 31);
    AdaptedField y = brownian_y(ens);

    // E[sup |B|^2] is between E[B_1^2] = 1 and Doob's bound 4 E[B_1^2] = 4;
    // the root puts the norm into (1, 2].
    double n2 = sp_norm(y, NormSpec{2.0, true});
    CHECK(n2 > 1.0);
    CHECK(n2 <= 2.0);

    // Without the root the raw expectation comes back.
    double raw = sp_norm(y, NormSpec{2.0, false});
    CHECK(raw == doctest::Approx(n2 * n2).epsilon(1e-12));

    // For p <= 1 no root applies and the functional is monotone in p.
    double p_half = sp_norm(y, NormSpec{0.5, false});
    double p_one = sp_norm(y, NormSpec{1.0, false});
    double p_two = sp_norm(y, NormSpec{2.0, false});
    CHECK(p_half < p_one);
    CHECK(p_one < p_two);
    CHECK(sp_norm(y, NormSpec{1.0, true}) == p_one);

    CHECK_THROWS_AS(sp_norm(y, NormSpec{0.0, true}), std::invalid_argument);
    CHECK_THROWS_AS(sp_norm(y, NormSpec{2.0, true}, 5, 3), std::invalid_argument);
}

TEST_CASE("control energy norm against deterministic fields") {
    TimeGrid grid = build_grid(1.0, 64);
    BrownianEnsemble ens = sample_brownian(grid, 1, 256, 32);

    // z == 1 on [0, 1/2], 0 after: energy int |z|^2 dt = 1/2 exactly, so the
    // p = 1 norm is sqrt(1/2) for every p (deterministic field).
    AdaptedField z(64, 1, 1, 256);
    for (int i = 0; i < 32; ++i) z.step(i).setOnes();
    double want = std::sqrt(0.5);
    CHECK(mp_norm(z, grid, NormSpec{1.0, true}) == doctest::Approx(want).epsilon(1e-12));
    CHECK(mp_norm(z, grid, NormSpec{2.0, true}) == doctest::Approx(want).epsilon(1e-12));
    CHECK(mp_norm(z, grid, NormSpec{4.0, true}) == doctest::Approx(want).epsilon(1e-12));

    // Range restriction: the second half carries no energy.
    CHECK(mp_norm(z, grid, NormSpec{2.0, true}, 32, 64) == 0.0);
    CHECK(mp_norm(z, grid, NormSpec{2.0, true}, 0, 32) ==
          doctest::Approx(want).epsilon(1e-12));

    // Brownian path as control: E[int B^2 dt] = int t dt = 1/2; sampled mean
    // within five standard errors (per-path variance of int B^2 dt is 7/12
    // for T=1, discretization bias O(dt)).
    AdaptedField zb(64, 1, 1, 4096);
    BrownianEnsemble big = sample_brownian(grid, 1, 4096, 33);
    for (int i = 0; i < 64; ++i) zb.step(i) = big.value_at(i);
    double raw = mp_norm(zb, grid, NormSpec{2.0, false});
    double se = std::sqrt(7.0 / 12.0 / 4096.0);
    CHECK(std::abs(raw - 0.5) < 5.0 * se + 1.0 / 64.0);
}

TEST_CASE("combined functional is one expectation, not a sum of norms") {
    TimeGrid grid = build_grid(1.0, 8);
    AdaptedField y(9, 1, 1, 2), z(8, 1, 1, 2);
    // Path 0: sup |y| = 2, energy = 0. Path 1: sup |y| = 0, energy = 4.
    y.step(3)(0, 0) = 2.0;
    for (int i = 0; i < 8; ++i) z.step(i)(0, 1) = 2.0;
    double raw = product_norm(y, z, grid, NormSpec{2.0, false});
    // E[sup^2 + energy] = (4 + 0)/2 + (0 + 4)/2 = 4; with root -> 2.
    CHECK(raw == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(product_norm(y, z, grid, NormSpec{2.0, true}) ==
          doctest::Approx(2.0).epsilon(1e-12));

    AdaptedField y2 = y;
    y2.step(3)(0, 0) = 5.0;
    AdaptedField d = difference(y2, y);
    CHECK(d.step(3)(0, 0) == 3.0);
    CHECK(d.step(2)(0, 0) == 0.0);
}

TEST_CASE("stopping-family norm: martingale case and random-peak detection") {
    TimeGrid grid = build_grid(1.0, 128);
    BrownianEnsemble ens = sample_brownian(grid, 1, 8192, 34);
    AdaptedField y = brownian_y(ens);

    // |B| is a submartingale, so optional sampling forbids any stopping rule
    // from beating the terminal node: the family's max must coincide with the
    // best deterministic node up to the sampling whisker of the hit rules.
    ClassDResult res = class_d_norm(y, grid);
    double node_best = 0.0;
    for (int i = 0; i <= 128; ++i)
        node_best = std::max(node_best, ens.value_at(i).row(0).cwiseAbs().mean());
    CHECK(res.value >= node_best);  // the family contains the node rules
    CHECK(res.value <= node_best * 1.05);
    CHECK(std::abs(node_best - std::sqrt(2.0 / M_PI)) < 0.05);  // ~ E|B_1|

    // Random-peak field: each path spikes at its own time. Deterministic
    // nodes average a handful of spikes; the first-passage rules harvest all
    // of them, which is exactly what the extended family is for.
    int M2 = 512, N = 128;
    AdaptedField peaks(N + 1, 1, 1, M2);
    for (int m = 0; m < M2; ++m) {
        int center = 5 + (m * 117) % (N - 10);
        for (int off = -3; off <= 3; ++off)
            peaks.step(center + off)(0, m) = 1.0 - 0.25 * std::abs(off);
    }
    ClassDResult pr = class_d_norm(peaks, grid);
    double peak_node_best = 0.0;
    for (int i = 0; i <= N; ++i)
        peak_node_best =
            std::max(peak_node_best, peaks.step(i).row(0).cwiseAbs().mean());
    CHECK(pr.value >= 0.74);  // highest level 2^{-1/2} stops on the 0.75 rung
    CHECK(pr.value > 5.0 * peak_node_best);
    CHECK(pr.rule.substr(0, 3) == "hit");

    // A deterministic field is stopped anywhere with the same mean: the
    // family collapses to the largest node value.
    AdaptedField flat(129, 1, 1, 16);
    for (int i = 0; i <= 128; ++i) flat.step(i).setConstant(0.25);
    ClassDResult fr = class_d_norm(flat, grid);
    CHECK(fr.value == doctest::Approx(0.25).epsilon(1e-12));
}
