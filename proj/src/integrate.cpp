#include "bsde/integrate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace bsde {

double integrate_graded(const ScalarFn& f, double a, double b, int cells, double grade) {
    if (!(b >= a)) throw std::invalid_argument("integrate_graded: b < a");
    if (cells < 1) throw std::invalid_argument("integrate_graded: cells < 1");
    if (b == a) return 0.0;
    const double len = b - a;
    double sum = 0.0;
    double lo = a;
    for (int j = 1; j <= cells; ++j) {
        double hi = a + len * std::pow(static_cast<double>(j) / cells, grade);
        if (hi > lo) sum += f(0.5 * (lo + hi)) * (hi - lo);
        lo = hi;
    }
    return sum;
}

double integrate_tail(const ScalarFn& f, double t0, int cells) {
    if (cells < 1) throw std::invalid_argument("integrate_tail: cells < 1");
    // Mesh graded toward x = 1, where the transformed integrand of a
    // polynomially decaying tail concentrates its curvature.
    const double grade = 4.0;
    double sum = 0.0;
    double lo = 0.0;
    for (int j = 1; j <= cells; ++j) {
        double hi = 1.0 - std::pow(static_cast<double>(cells - j) / cells, grade);
        if (hi > lo) {
            double x = 0.5 * (lo + hi);
            double om = 1.0 - x;
            double t = t0 + x / om;
            double val = f(t) / (om * om);
            if (std::isfinite(val)) sum += val * (hi - lo);
        }
        lo = hi;
    }
    return sum;
}

CumTable::CumTable(const ScalarFn& f, double t_max, int cells, double grade) {
    if (!(t_max > 0.0)) throw std::invalid_argument("CumTable: t_max must be positive");
    if (cells < 1) throw std::invalid_argument("CumTable: cells < 1");
    x_.resize(cells + 1);
    c_.resize(cells + 1);
    x_[0] = 0.0;
    c_[0] = 0.0;
    for (int j = 1; j <= cells; ++j) {
        x_[j] = t_max * std::pow(static_cast<double>(j) / cells, grade);
        double lo = x_[j - 1], hi = x_[j];
        // Refine wide cells with a 4-point open midpoint so the linear
        // interpolation error stays small between stored boundaries.
        double s = 0.0;
        const int sub = 4;
        for (int q = 0; q < sub; ++q) {
            double m = lo + (hi - lo) * (q + 0.5) / sub;
            s += f(m);
        }
        c_[j] = c_[j - 1] + s * (hi - lo) / sub;
    }
}

double CumTable::at(double t) const {
    if (x_.empty()) throw std::runtime_error("CumTable: empty table");
    if (t <= 0.0) return 0.0;
    if (t >= x_.back()) return c_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - x_.begin());
    double w = (t - x_[j - 1]) / (x_[j] - x_[j - 1]);
    return c_[j - 1] + w * (c_[j] - c_[j - 1]);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pd = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pd = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pd;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pd * pd);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n < 1");
    // Golub-Welsch: the Jacobi matrix of the Hermite recurrence is symmetric
    // tridiagonal with zero diagonal and off-diagonal sqrt(k/2).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double off = std::sqrt(k / 2.0);
        J(k, k - 1) = off;
        J(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(n);
    weights.resize(n);
    const double sqrt_pi = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        weights[i] = sqrt_pi * v0 * v0;
    }
}

}  // namespace bsde
