#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsde/generator.hpp"
#include "bsde/time_grid.hpp"

namespace bsde {

// Randomized certification of the structural claims a driver makes. Checks
// are sampled lower bounds: a pass certifies the inequality on every drawn
// sample (up to `slack`), a fail carries a concrete witness. Scales spread
// the draws over several orders of magnitude.
struct SamplerConfig {
    int samples = 4096;
    std::uint64_t seed = 2026;
    std::vector<double> scales{0.1, 1.0, 10.0};
    double slack = 1e-9;     // additive tolerance, relative to the bound's size
    int psi_angles = 128;    // direction count for ball-sup searches (k >= 2)
    int psi_radii = 48;      // radius count for ball-sup searches
    int context_paths = 32;  // Brownian contexts drawn for path-dependent drivers
    double integrability_cap = 1e9;  // quadratures above this flag non-integrability
};

struct CheckResult {
    std::string assumption;
    bool claimed = false;
    bool pass = true;
    int samples = 0;
    double worst_margin = 0.0;  // min over samples of (bound - value); < 0 on failure
    std::string witness;        // worst sample, or the computed integral
};

struct AssumptionReport {
    std::string generator;
    std::vector<CheckResult> checks;
    bool all_claimed_hold() const;
};

// sup over the ball |y| <= r of |g(t,y,0) - g(t,0,0)|, searched on a dense
// radial/angular mesh plus random probes.
double psi_radius_sup(const Generator& g, double t, double r, const PathContext& ctx,
                      const SamplerConfig& cfg = {});

CheckResult check_coefficient_integrability(const Generator& g, const TimeGrid& grid,
                                            const SamplerConfig& cfg = {});
CheckResult check_driver_integrability(const Generator& g, const TimeGrid& grid,
                                       const SamplerConfig& cfg = {});
CheckResult check_continuity(const Generator& g, const TimeGrid& grid,
                             const SamplerConfig& cfg = {});
CheckResult check_centered_sup(const Generator& g, const TimeGrid& grid,
                               const SamplerConfig& cfg = {});
CheckResult check_growth_envelope(const Generator& g, const TimeGrid& grid,
                                  const SamplerConfig& cfg = {});
CheckResult check_monotonicity(const Generator& g, const TimeGrid& grid,
                               const SamplerConfig& cfg = {});
CheckResult check_lipschitz_z(const Generator& g, const TimeGrid& grid,
                              const SamplerConfig& cfg = {});
CheckResult check_hoelder_z(const Generator& g, const TimeGrid& grid,
                            const SamplerConfig& cfg = {});

// Runs every check; rows for unclaimed assumptions are marked unclaimed and
// do not affect all_claimed_hold().
AssumptionReport report_assumptions(const Generator& g, const TimeGrid& grid,
                                    const SamplerConfig& cfg = {});

}  // namespace bsde
