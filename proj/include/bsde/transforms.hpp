#pragma once

#include <functional>
#include <vector>

#include "bsde/generator.hpp"
#include "bsde/integrate.hpp"
#include "bsde/time_grid.hpp"
#include "bsde/types.hpp"

namespace bsde {

// Radial projection onto the closed ball of radius q: x for |x| <= q, else
// q x / |x|. The result is clamped so |result| <= q holds exactly in floating
// point, which makes the projection bitwise idempotent.
Vec radial_truncate(const Vec& x, double q);
Mat radial_truncate(const Mat& x, double q);  // Frobenius-ball projection

// Compactly supported bump density on the unit ball, normalized to unit mass,
// together with a quadrature rule for convolving against it. The rule weights
// already include the density values and sum to 1 exactly, so convolving a
// constant reproduces it.
class Mollifier {
  public:
    explicit Mollifier(int k, int panels = 4, int nodes_per_panel = 16);
    int k() const { return k_; }
    double density(const Vec& x) const;
    const std::vector<Vec>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    int k_ = 1;
    double mass_ = 0.0;  // high-accuracy bump mass, used by density()
    std::vector<Vec> nodes_;
    std::vector<double> weights_;
};

// Smooth y-argument of a driver against the scaled mollifier:
// f_n(t, y, z) = int rho(x) f(t, y - x/n, z) dx. One-sided slope bounds and
// z-rates survive the averaging unchanged.
Generator mollify(const Generator& g, const Mollifier& moll, int n);

// Mollify and then compose the y-argument with the radial projection at
// level q: f_{n,q}(t, y, z) = f_n(t, pi_q(y), z). Bounded in y by
// construction.
Generator truncate_compose(const Generator& g, const Mollifier& moll, int n, double q);

// C^1 radial cutoff: 1 on [0, rp], 0 on [rp+1, inf), cubic step between.
double smooth_cutoff(double r, double rp);
// Its global Lipschitz constant (3/2, attained mid-transition).
double smooth_cutoff_lipschitz();

// Tempered driver: truncates the z-argument of the centered part at level
// n e^{-t}, rescales the centered part by n e^{-t} / max(psi(t), n e^{-t}) so
// its contribution is integrably bounded, and (optionally) fades it out
// radially beyond |y| = rp:
//   h(t,y,z) = theta(|y|) fac(t) [g(t,y,pi(z)) - g(t,0,pi(z))] + g(t,0,z).
// `psi_rp1` must dominate sup_{|y|<=rp+1} |g(t,y,0) - g(t,0,0)|.
Generator build_tempered_driver(const Generator& g, const ScalarFn& psi_rp1, int n,
                                double rp, bool with_cutoff);

// Truncation-ladder rung: keeps the centered driver but radially truncates
// the origin part at level n e^{-t}:
//   g_n(t,y,z) = g(t,y,z) - g(t,0,z) + pi_{n e^{-t}}(g(t,0,z)).
Generator truncate_driver(const Generator& g, int n);

// Columnwise radial truncation of terminal values at level n.
Mat truncate_terminal(const Mat& xi, double n);

// Removes a positive one-sided slope by the exponential change of scale
// y -> e^{U(t)} y with U = int_0^t u: the shifted driver satisfies the
// monotonicity bound with rate zero, exactly.
struct MonotoneShift {
    Generator driver;
    std::function<double(double)> cumulative;  // U(t)
    double weight(double t) const { return std::exp(cumulative(t)); }
};
MonotoneShift transform_monotone_to_zero(const Generator& g, double T);

// Node factors e^{(1/2) int_0^t beta} used by the weighted estimates; apply /
// remove are exact inverses because they reuse the same stored factors.
struct ExpWeights {
    std::vector<double> half;  // at grid nodes
    std::vector<double> full;
    std::vector<double> half_at_quad;  // at the cells' quadrature nodes
};
ExpWeights exp_weights(const TimeGrid& grid, const ScalarFn& beta);
void apply_weights(AdaptedField& y, AdaptedField& z, const ExpWeights& w);
void remove_weights(AdaptedField& y, AdaptedField& z, const ExpWeights& w);

}  // namespace bsde
