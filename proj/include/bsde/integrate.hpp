#pragma once

#include <functional>
#include <vector>

namespace bsde {

using ScalarFn = std::function<double(double)>;

// Composite open-midpoint rule on [a,b] with cell boundaries graded toward a:
// x_j = a + (b-a)*(j/n)^grade. The integrand is never evaluated at the
// endpoints, so integrable singularities at a (t^{-1/2}, |ln t|, ...) are fine.
double integrate_graded(const ScalarFn& f, double a, double b, int cells = 16384,
                        double grade = 6.0);

// Tail integral over [t0, infinity) under the rational substitution
// t = t0 + x/(1-x), which maps (0,1) onto (t0, infinity); plain midpoint in x.
// The transformed integrand stays bounded for integrands decaying at least
// like 1/t^2, which every registered coefficient tail does.
double integrate_tail(const ScalarFn& f, double t0, int cells = 8192);

// Piecewise-linear table of the cumulative integral C(t) = int_0^t f, built on
// a graded mesh so endpoint-singular rates accumulate accurately near 0.
class CumTable {
  public:
    CumTable() = default;
    CumTable(const ScalarFn& f, double t_max, int cells = 8192, double grade = 6.0);
    double at(double t) const;  // C(t), clamped to [0, t_max]
    double t_max() const { return x_.empty() ? 0.0 : x_.back(); }

  private:
    std::vector<double> x_;
    std::vector<double> c_;
};

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Nodes/weights of the n-point Gauss-Hermite rule (weight e^{-s^2} on R),
// computed by Golub-Welsch; sum of weights is sqrt(pi).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace bsde
