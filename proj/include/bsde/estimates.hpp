#pragma once

#include <string>
#include <vector>

#include "bsde/assumption_checks.hpp"
#include "bsde/solver.hpp"
#include "bsde/transforms.hpp"

namespace bsde {

// Structural envelope of a driver used by the weighted a-priori estimates:
//   <y, g(t, y, z)>  <=  mu(t) |y|^2 + lambda(t) |y| |z| + f_t |y|
// with f a nonnegative forcing process (it may read the Brownian context).
struct AssumptionA {
    ScalarFn mu;
    ScalarFn lambda;
    std::function<double(double, const PathContext&)> f;
};

// Envelope data for the bundled fixtures (throws for unknown names).
AssumptionA fixture_assumption_a(const std::string& name);

// Sampled certificate that a driver satisfies its envelope.
CheckResult check_assumption_a(const Generator& g, const AssumptionA& a,
                               const TimeGrid& grid,
                               const SamplerConfig& cfg = SamplerConfig{});

// ---------------------------------------------------------------------------
// p-th power pathwise inequality
// ---------------------------------------------------------------------------
// Discrete form of the power-expansion inequality: conditionally on node r,
//   E_r |y_a|^p + c(p) E_r sum_i |y_i|^{p-2} 1_{|y_i|>eps} |z_i|^2 dt_i
//     <= E_r |y_b|^p + p E_r sum_i |y_i|^{p-1} <yhat_i, g_i> w_i
// over cells i in [a, b). Conditional means are regression fits on the basis
// at node r (plain means at r = 0); a path counts as a violation when the
// fitted gap exceeds tol relative to the fitted scale. The default tol of
// 10 sqrt(max dt) absorbs the one-step expansion error of the scheme.
struct PthPowerReport {
    double p = 2.0;
    double tolerance = 0.0;
    std::vector<int> r_nodes;
    std::vector<double> violation_rates;  // aligned with r_nodes
    double max_violation_rate = 0.0;
};
PthPowerReport check_pth_power_inequality(const Generator& g,
                                          const BackwardSolution& sol,
                                          const BrownianEnsemble& ens, double p,
                                          std::vector<int> r_nodes = {},
                                          double tol = -1.0, int degree = 3);

// ---------------------------------------------------------------------------
// Weighted a-priori bounds
// ---------------------------------------------------------------------------
// With node weights e^{(1/2) int_0^t beta} and beta at least the critical
// rate of the envelope, the three bounds hold with a constant depending only
// on p:
//   control energy:  E_r ( sum_{r<=i<b} e^{beta t_i} |z_i|^2 dt_i )^{p/2}
//                      <= C { E_r sup_{r<=i<=b} e^{p beta t_i / 2} |y_i|^p
//                           + E_r ( sum e^{beta tau_i / 2} f_i w_i )^p },
//   state sup (p>1): E_r sup e^{p beta t_i/2} |y_i|^p
//                      <= C { E_r e^{p beta t_b/2} |y_b|^p + E_r (sum ... f)^p },
//   combined (p>1):  both left sides against the state-sup right side.
// The checker reports the fitted constant: the largest ratio of regression-
// fitted sides over a grid of conditioning nodes r and endpoints b. The
// denominator is floored at its cross-path q10 and at a fixed fraction of the
// response's unconditional mean, and fits of the nonnegative numerator are
// clamped at zero: both guards keep edge-of-support regression oscillation
// from turning estimation noise into astronomical ratios.
enum class BoundKind { ControlEnergy, StateSup, Combined };

// Critical weight rate of the envelope for the given bound.
ScalarFn critical_beta(const AssumptionA& a, double p, BoundKind kind);

struct WeightedBoundConfig {
    double p = 2.0;
    ScalarFn beta;               // empty -> critical_beta for the kind
    std::vector<int> r_nodes;    // empty -> {0, N/4, N/2}
    std::vector<int> b_nodes;    // empty -> {N/2, 3N/4, N}; pairs need r < b
    double floor_quantile = 0.10;
    double floor_fraction = 0.05;  // of the mean rhs response
    int degree = 3;
};

struct WeightedBoundReport {
    BoundKind kind = BoundKind::ControlEnergy;
    double p = 2.0;
    std::vector<int> r_nodes, b_nodes;
    std::vector<int> pair_r, pair_b;     // the admissible (r, b) pairs, in order
    std::vector<double> fitted;          // one ratio per admissible (r, b) pair
    std::vector<double> lhs_at_max;      // fitted sides at each pair's worst path
    std::vector<double> rhs_at_max;
    double fitted_constant = 0.0;        // max of fitted
};

WeightedBoundReport check_z_energy_bound(const AssumptionA& a,
                                         const BackwardSolution& sol,
                                         const BrownianEnsemble& ens,
                                         WeightedBoundConfig cfg = {});
WeightedBoundReport check_y_sup_bound(const AssumptionA& a,
                                      const BackwardSolution& sol,
                                      const BrownianEnsemble& ens,
                                      WeightedBoundConfig cfg = {});
WeightedBoundReport check_apriori_bound(const AssumptionA& a,
                                        const BackwardSolution& sol,
                                        const BrownianEnsemble& ens,
                                        WeightedBoundConfig cfg = {});

// Family summary: the shared constant is credible when every member's fitted
// constant sits within half-to-one-and-a-half of the family median.
struct FamilyStability {
    std::vector<double> constants;
    double median = 0.0;
    bool stable = false;
};
FamilyStability family_stability(const std::vector<double>& constants);

}  // namespace bsde
