#pragma once

#include <Eigen/Dense>

namespace bsde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// State dimensions of a backward equation: y takes values in R^k, z in R^{k x d}.
struct Dims {
    int k = 1;
    int d = 1;
};

// Per-sample context handed to a driver evaluation. `b` carries the Brownian
// value attached to the sample (left grid node during backward steps) so that
// path-dependent forcing terms stay adapted; `path`/`step` identify the slot
// when the driver wraps a stored field; `gt` is an auxiliary nonnegative
// process some growth checks reference (defaults to the constant 1).
struct PathContext {
    Vec b;
    int path = -1;
    int step = -1;
    double gt = 1.0;
};

// Frobenius norm of a k x d matrix viewed as a point in R^{k*d}; the z-argument
// of every driver is measured this way.
inline double frob(const Mat& z) { return z.norm(); }

}  // namespace bsde
