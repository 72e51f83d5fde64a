#pragma once

#include <functional>
#include <string>

#include "bsde/brownian.hpp"
#include "bsde/coefficients.hpp"
#include "bsde/types.hpp"

namespace bsde {

// Which structural properties a driver claims, so the samplers know what to
// certify. `p` is the moment order of the driver-integrability claim (p = 1
// marks the minimal-integrability regime served by the truncation ladder).
struct AssumptionClaims {
    double p = 2.0;
    bool integrable_driver = false;    // E[(int |g(t,0,0)| dt)^p] finite
    bool continuous_in_y = false;      // y -> g(t,y,z) continuous
    bool centered_sup_integrable = false;  // t -> sup_{|y|<=r} |g(t,y,0)-g(t,0,0)| integrable
    bool growth_envelope = false;      // |g(t,y,z)| <= |g(t,0,z)| + u(t) phi(|y|)
    bool monotone_in_y = false;        // <y1-y2, g(.,y1,z)-g(.,y2,z)> <= u(t)|y1-y2|^2
    bool zero_monotone = false;        // monotone claim holds with u == 0
    bool lipschitz_in_z = false;       // |g(.,y,z1)-g(.,y,z2)| <= v(t)|z1-z2|
    bool hoelder_in_z = false;         // |g(.,y,z)-g(.,y,0)| <= gamma(t)(g_t+|y|+|z|)^alpha
};

// A driver g(t, y, z) with its declared coefficient rates and claims. The
// path context supplies the Brownian value for drivers with a path-dependent
// forcing term and the auxiliary process g_t referenced by the Hoelder-z
// bound.
struct Generator {
    std::string name;
    Dims dims;
    std::function<Vec(double, const Vec&, const Mat&, const PathContext&)> eval;
    CoefficientSet coeffs;
    AssumptionClaims claims;
    std::function<double(double)> phi;  // growth-envelope profile, set when claimed
    bool path_dependent = false;

    Vec at(double t, const Vec& y, const Mat& z, const PathContext& ctx = PathContext{}) const {
        return eval(t, y, z, ctx);
    }
    Vec at_origin(double t, const Mat& z, const PathContext& ctx = PathContext{}) const {
        return eval(t, Vec::Zero(dims.k), z, ctx);
    }
};

// Terminal data evaluated path by path from the Brownian trajectory.
struct TerminalCondition {
    std::string name;
    int k = 1;
    std::function<Vec(const BrownianEnsemble&, int path)> eval;
};

// k x paths matrix of terminal values for a whole ensemble.
Mat terminal_values(const TerminalCondition& xi, const BrownianEnsemble& ens);

TerminalCondition terminal_brownian(int k);            // xi = B_T (first k dims)
TerminalCondition terminal_tanh(int k, double scale);  // xi = tanh(scale * B_T), bounded
TerminalCondition terminal_constant(const Vec& value);

}  // namespace bsde
