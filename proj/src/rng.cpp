#include "bsde/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bsde {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t key) {
    // Top 53 bits -> (0,1); offset by half an ulp so 0 is never produced.
    return (static_cast<double>(key >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

// Acklam-style rational approximation to the normal quantile (~1.1e-9), used
// as the seed for one Newton polish below.
double quantile_estimate(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p must lie in (0,1)");
    double x = quantile_estimate(p);
    // Newton step on Phi(x) - p = 0 with Phi via erfc (stable in both tails).
    const double inv_sqrt2 = 0.7071067811865475244;
    const double inv_sqrt2pi = 0.3989422804014326779;
    double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
    double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    if (pdf > 0.0) x -= (cdf - p) / pdf;
    return x;
}

double normal_variate(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                      std::uint64_t dim) {
    std::uint64_t h = mix64(seed ^ 0x5851F42D4C957F2DULL);
    h = mix64(h ^ (path * 0xA24BAED4963EE407ULL + 1));
    h = mix64(h ^ (step * 0x9FB21C651E98DF25ULL + 1));
    h = mix64(h ^ (dim * 0xD6E8FEB86659FD93ULL + 1));
    return inverse_normal_cdf(uniform01(h));
}

}  // namespace bsde
