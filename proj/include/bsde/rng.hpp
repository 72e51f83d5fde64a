#pragma once

#include <cstdint>

namespace bsde {

// Counter-based Gaussian generator: every variate is a pure function of
// (seed, path, step, dim), so ensembles are reproducible for a fixed seed no
// matter how the fill loop is ordered or parallelized.

// SplitMix64 finalizer; bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

// Uniform variate in the open interval (0,1) from a 64-bit key.
double uniform01(std::uint64_t key);

// Inverse of the standard normal CDF, accurate to ~1e-15 (rational
// approximation polished with one Newton step through erfc).
double inverse_normal_cdf(double p);

// Standard normal variate keyed by the counter tuple.
double normal_variate(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                      std::uint64_t dim);

}  // namespace bsde
