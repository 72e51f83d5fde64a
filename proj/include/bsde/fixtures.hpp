#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bsde/generator.hpp"
#include "bsde/time_grid.hpp"

namespace bsde {

// A ready-to-run problem: driver, default terminal data, default horizon.
struct Fixture {
    Generator generator;
    TerminalCondition terminal;
    Horizon default_horizon;
    GridScheme default_scheme = GridScheme::Uniform;
};

// Named fixtures exposed on the command line. `example1`..`example4` are the
// four reference drivers (singular-coefficient scalar, polynomial-dissipation
// pair, Hoelder-z scalar, Hoelder-z pair); `linear_oracle` has a closed-form
// solution; `zero_driver` is the pure conditional expectation; the extra
// `broken_monotone` deliberately violates its monotonicity claim so the
// falsification path is reachable.
Fixture fixture(const std::string& name);
std::vector<std::string> fixture_names();

// Scalar affine driver g = a(t) y + b(t) z + c(t) with claims filled in.
Generator linear_generator(const std::function<double(double)>& a,
                           const std::function<double(double)>& b,
                           const std::function<double(double)>& c);

Generator zero_generator(int k, int d);

// Closed-form solution of the scalar affine equation on [0,T].
// With xi = B_T:        y_t = phi(t) B_t + chi(t),   z_t = phi(t),
// with xi = const c0:   y_t = c0 phi(t) + chi0(t),   z_t = 0,
// where phi(t) = exp(int_t^T a) and chi integrates the forcing forward.
class LinearOracle {
  public:
    enum class TerminalKind { BrownianEndpoint, Constant };
    LinearOracle(std::function<double(double)> a, std::function<double(double)> b,
                 std::function<double(double)> c, double T, TerminalKind kind,
                 double const_value = 0.0);
    double y(double t, double b_t) const;
    double z(double t) const;
    double T() const { return T_; }

  private:
    std::function<double(double)> a_, b_, c_;
    double T_;
    TerminalKind kind_;
    double const_value_;
    mutable std::map<double, std::pair<double, double>> cache_;
    double phi(double t) const;
};

}  // namespace bsde
