#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bsde/brownian.hpp"
#include "bsde/time_grid.hpp"
#include "bsde/types.hpp"

namespace bsde {

// Estimators for step-wise conditional expectations E[ . | F_{t_i} ]. The
// backward solver consumes the per-path interface; the one-dimensional
// lattice below provides an independent route for cross-checks.
class ConditionalExpectation {
  public:
    virtual ~ConditionalExpectation() = default;
    // rhs holds one sampled quantity per row, one path per column; the result
    // has the same shape and is measurable at node i (a function of B_{t_i}).
    virtual Mat project(int i, const Mat& rhs) const = 0;
};

// Least-squares projection on monomials of the standardized Brownian value
// B_{t_i} / sqrt(t_i) up to the given total degree. One pivoted QR per step
// serves every row of rhs; at the initial node the basis collapses to the
// constant and the projection degenerates to the sample mean. A factorization
// whose retained pivot ratio exceeds cond_cap aborts instead of returning
// garbage coefficients.
class RegressionEngine : public ConditionalExpectation {
  public:
    RegressionEngine(const BrownianEnsemble& ens, int degree = 3,
                     double cond_cap = 1e12);
    Mat project(int i, const Mat& rhs) const override;
    int basis_size() const { return static_cast<int>(powers_.size()); }

  private:
    const BrownianEnsemble* ens_;
    int degree_;
    double cond_cap_;
    std::vector<std::vector<int>> powers_;  // exponent tuples, total deg <= degree
    struct StepCache;
    mutable std::shared_ptr<StepCache> cache_;  // last factorized step only
    const StepCache& factorize(int i) const;
};

// Dynamic-programming lattice for scalar state (k = d = 1): a uniform spatial
// grid wide enough to make truncation error negligible, with one-step
// expectations computed by Gauss-Hermite quadrature. Values between lattice
// points are linearly interpolated and clamped beyond the ends.
struct LatticeConfig {
    int hermite_nodes = 20;
    int space_points = 801;   // odd, so the origin is a lattice point
    double width_sigmas = 8.0;
};

class Lattice1D {
  public:
    Lattice1D(const TimeGrid& grid, LatticeConfig cfg = {});
    const Vec& points() const { return points_; }
    const TimeGrid& grid() const { return *grid_; }
    double interp(const Vec& values, double x) const;
    // E[v(B_{t_{i+1}}) | B_{t_i} = x_j] for every lattice point, with v given
    // on the lattice (interpolated) or as an exact function handle.
    Vec step_expectation(int i, const Vec& v_next) const;
    Vec step_expectation(int i, const std::function<double(double)>& v) const;
    // Same expectation together with the martingale slope
    // E[v(B_{t_{i+1}}) (B_{t_{i+1}} - x_j)] / dt_i, the lattice analogue of
    // the control extracted by the path solver.
    void step_value_and_slope(int i, const Vec& v_next, Vec& value_out,
                              Vec& slope_out) const;

  private:
    const TimeGrid* grid_;
    LatticeConfig cfg_;
    Vec points_;
    double spacing_ = 0.0;
    std::vector<double> herm_nodes_, herm_weights_;  // weights divided by sqrt(pi)
};

}  // namespace bsde
