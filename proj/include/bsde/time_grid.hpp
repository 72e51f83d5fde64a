#pragma once

#include <functional>
#include <vector>

#include "bsde/coefficients.hpp"
#include "bsde/integrate.hpp"

namespace bsde {

enum class GridScheme { Uniform, MappedExponential };

// Time horizon of an equation: either a finite [0,T] or [0,infinity), the
// latter handled through an effective cutoff T_max chosen so the coefficient
// tail integral beyond it is below a tolerance.
struct Horizon {
    double T = 1.0;
    bool infinite = false;
    static Horizon finite(double T) { return {T, false}; }
    static Horizon unbounded() { return {0.0, true}; }
};

class TimeGrid {
  public:
    TimeGrid() = default;
    TimeGrid(std::vector<double> nodes, GridScheme scheme, bool truncated_tail);

    int steps() const { return static_cast<int>(t_.size()) - 1; }
    double node(int i) const { return t_[static_cast<std::size_t>(i)]; }
    double dt(int i) const { return t_[static_cast<std::size_t>(i) + 1] - t_[static_cast<std::size_t>(i)]; }
    double horizon() const { return t_.back(); }
    const std::vector<double>& nodes() const { return t_; }
    GridScheme scheme() const { return scheme_; }
    // True when the grid stands in for an unbounded horizon via a cutoff.
    bool truncated_tail() const { return truncated_; }

    // Open quadrature node and weight of cell i. Uniform grids use the plain
    // cell midpoint with weight dt. Mapped grids take the midpoint in the
    // mapped coordinate s = 1 - e^{-t} with weight e^{t*} * ds, which keeps
    // the node away from both cell ends and integrates smooth decaying
    // integrands accurately even over the wide final cells.
    double quad_node(int i) const;
    double quad_weight(int i) const;

  private:
    std::vector<double> t_;
    GridScheme scheme_ = GridScheme::Uniform;
    bool truncated_ = false;
};

// Build a grid with n cells over the horizon. Finite horizons accept both
// schemes; the mapped-exponential scheme places t_i = -ln(1 - (i/n)(1-e^{-T}))
// (computed in a form that is exact at i = n even when e^{-T} underflows).
// Unbounded horizons require tail data: T_max is the smallest cutoff with
// int_{T_max}^inf tail_integrand <= tail_tol, found by bisection.
TimeGrid build_grid(const Horizon& horizon, int n, GridScheme scheme,
                    const CoefficientSet* coeffs = nullptr, double tail_tol = 1e-3);

TimeGrid build_grid(double T, int n, GridScheme scheme = GridScheme::Uniform);

// Smallest T with int_T^inf f <= tol (f nonnegative and eventually decreasing).
double solve_tail_cutoff(const ScalarFn& f, double tol);

// Open-midpoint quadrature of f over the grid cells using the grid's own
// node/weight convention; f is never evaluated at t = 0 or cell boundaries.
double time_quadrature(const TimeGrid& grid, const ScalarFn& f);

}  // namespace bsde
