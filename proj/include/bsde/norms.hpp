#pragma once

#include <string>

#include "bsde/brownian.hpp"
#include "bsde/time_grid.hpp"
#include "bsde/types.hpp"

namespace bsde {

// Path-space norms of discrete (y, z) fields. With apply_root the value is
// raised to 1 ∧ 1/p, matching the convention that makes the functional a
// norm for p >= 1 and a metric-generating functional for p in (0, 1).
struct NormSpec {
    double p = 2.0;
    bool apply_root = true;
};

// E[ sup_{lo<=i<=hi} |y_i|^p ]^(1∧1/p). hi = -1 means the last node.
double sp_norm(const AdaptedField& y, NormSpec spec, int lo = 0, int hi = -1);

// E[ ( sum_{lo<=i<hi} |z_i|_F^2 dt_i )^{p/2} ]^(1∧1/p) on the grid's cells.
double mp_norm(const AdaptedField& z, const TimeGrid& grid, NormSpec spec,
               int lo = 0, int hi = -1);

// Combined functional E[ sup |y|^p + (int |z|^2)^{p/2} ]^(1∧1/p): a single
// expectation of the sum, not a sum of the two norms.
double product_norm(const AdaptedField& y, const AdaptedField& z,
                    const TimeGrid& grid, NormSpec spec, int lo = 0, int hi = -1);

// Entry-wise difference of two equally shaped fields.
AdaptedField difference(const AdaptedField& a, const AdaptedField& b);

// Largest E|y_tau| over a family of stopping rules: every deterministic grid
// node plus first-passage times of |y| across log-spaced levels (falling back
// to the final node when a level is never reached). Reports where the sup was
// attained so uniform-integrability failures are visible.
struct ClassDResult {
    double value = 0.0;
    double time = 0.0;        // deterministic time, or the level's mean time
    std::string rule;         // "node k" or "hit level x"
};
ClassDResult class_d_norm(const AdaptedField& y, const TimeGrid& grid,
                          int levels = 16);

// Constant p * ((p-1) ∧ 1) / 2 appearing in the p-th power expansion of the
// dynamics; it vanishes at p = 1 where the expansion degenerates.
double pth_power_constant(double p);

}  // namespace bsde
