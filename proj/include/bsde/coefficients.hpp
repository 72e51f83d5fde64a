#pragma once

#include <cmath>
#include <functional>

namespace bsde {

// Time-dependent coefficient rates attached to a driver. `u` bounds the
// one-sided slope of the drift in y, `v` is the Lipschitz rate in z; both may
// be unbounded near t = 0 as long as u + v^2 is integrable in time. `gamma`
// and `alpha` describe the Hoelder-type z-increment bound when one is claimed.
struct CoefficientSet {
    std::function<double(double)> u;
    std::function<double(double)> v;
    std::function<double(double)> gamma;  // empty when no Hoelder-z claim
    double alpha = 0.0;                   // exponent in (0,1) when gamma is set

    bool has_gamma() const { return static_cast<bool>(gamma); }

    // Integrand whose finite integral over the whole horizon measures how much
    // of the time axis matters: u + v^2, plus the gamma powers that the
    // Hoelder-z assumption requires to be integrable.
    double tail_integrand(double t) const {
        double s = 0.0;
        if (u) s += u(t);
        if (v) {
            double vt = v(t);
            s += vt * vt;
        }
        if (gamma) {
            double g = gamma(t);
            s += g + std::pow(g, 1.0 / (1.0 - alpha)) + std::pow(g, 2.0 / (2.0 - alpha));
        }
        return s;
    }
};

}  // namespace bsde
