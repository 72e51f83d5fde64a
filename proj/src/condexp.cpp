#include "bsde/condexp.hpp"

#include <Eigen/QR>

#include "bsde/integrate.hpp"
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsde {

// ---------------------------------------------------------------------------
// Regression engine
// ---------------------------------------------------------------------------

namespace {
// All exponent tuples over d variables with total degree <= deg, constant
// first so that the degenerate initial node keeps a usable basis.
void enumerate_powers(int d, int deg, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == d) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (int e : cur) used += e;
    for (int e = 0; e + used <= deg; ++e) {
        cur.push_back(e);
        enumerate_powers(d, deg, cur, out);
        cur.pop_back();
    }
}
}  // namespace

struct RegressionEngine::StepCache {
    int step = -1;
    Mat X;
    Eigen::ColPivHouseholderQR<Mat> qr;
};

RegressionEngine::RegressionEngine(const BrownianEnsemble& ens, int degree,
                                   double cond_cap)
    : ens_(&ens), degree_(degree), cond_cap_(cond_cap) {
    if (degree < 0) throw std::invalid_argument("regression degree must be >= 0");
    std::vector<int> cur;
    enumerate_powers(ens.d, degree_, cur, powers_);
    // Sort by total degree so the constant column leads.
    std::stable_sort(powers_.begin(), powers_.end(),
                     [](const std::vector<int>& a, const std::vector<int>& b) {
                         int sa = 0, sb = 0;
                         for (int e : a) sa += e;
                         for (int e : b) sb += e;
                         return sa < sb;
                     });
}

const RegressionEngine::StepCache& RegressionEngine::factorize(int i) const {
    if (cache_ && cache_->step == i) return *cache_;
    const TimeGrid& grid = ens_->grid;
    if (i < 0 || i > grid.steps()) throw std::invalid_argument("step out of range");
    const Mat& b = ens_->value_at(i);  // d x M Brownian values at node i
    int M = static_cast<int>(b.cols());
    int nb = static_cast<int>(powers_.size());
    double t = grid.node(i);
    double scale = t > 0.0 ? 1.0 / std::sqrt(t) : 0.0;

    auto cache = std::make_shared<StepCache>();
    cache->step = i;
    cache->X.resize(M, nb);
    for (int m = 0; m < M; ++m) {
        for (int j = 0; j < nb; ++j) {
            double val = 1.0;
            for (int c = 0; c < ens_->d; ++c) {
                int e = powers_[j][c];
                if (e == 0) continue;
                double s = b(c, m) * scale;
                for (int rep = 0; rep < e; ++rep) val *= s;
            }
            cache->X(m, j) = val;
        }
    }
    cache->qr.compute(cache->X);
    int rank = static_cast<int>(cache->qr.rank());
    const auto& R = cache->qr.matrixR();
    if (rank >= 1) {
        double top = std::abs(R(0, 0));
        double bot = std::abs(R(rank - 1, rank - 1));
        if (bot <= 0.0 || top / bot > cond_cap_)
            throw std::runtime_error(
                "regression basis is numerically degenerate at step " +
                std::to_string(i));
    }
    cache_ = cache;
    return *cache_;
}

Mat RegressionEngine::project(int i, const Mat& rhs) const {
    const StepCache& c = factorize(i);
    if (rhs.cols() != c.X.rows())
        throw std::invalid_argument("rhs path count does not match the ensemble");
    Mat beta = c.qr.solve(rhs.transpose());      // nbasis x R
    return (c.X * beta).transpose();             // R x M fitted values
}

// ---------------------------------------------------------------------------
// One-dimensional Gauss-Hermite lattice
// ---------------------------------------------------------------------------

Lattice1D::Lattice1D(const TimeGrid& grid, LatticeConfig cfg)
    : grid_(&grid), cfg_(cfg) {
    if (cfg_.space_points < 3 || cfg_.space_points % 2 == 0)
        throw std::invalid_argument("space_points must be odd and >= 3");
    double T = grid.horizon();
    double w = cfg_.width_sigmas * std::sqrt(T);
    points_.resize(cfg_.space_points);
    spacing_ = 2.0 * w / (cfg_.space_points - 1);
    for (int j = 0; j < cfg_.space_points; ++j) points_(j) = -w + j * spacing_;

    std::vector<double> hn, hw;
    gauss_hermite(cfg_.hermite_nodes, hn, hw);
    double root_pi = std::sqrt(M_PI);
    herm_nodes_ = hn;
    herm_weights_.resize(hw.size());
    for (std::size_t m = 0; m < hw.size(); ++m) herm_weights_[m] = hw[m] / root_pi;
}

double Lattice1D::interp(const Vec& values, double x) const {
    if (values.size() != points_.size())
        throw std::invalid_argument("lattice value vector has wrong length");
    int n = static_cast<int>(points_.size());
    if (x <= points_(0)) return values(0);
    if (x >= points_(n - 1)) return values(n - 1);
    double pos = (x - points_(0)) / spacing_;
    int j = static_cast<int>(pos);
    if (j >= n - 1) j = n - 2;
    double frac = pos - j;
    return values(j) * (1.0 - frac) + values(j + 1) * frac;
}

Vec Lattice1D::step_expectation(int i, const Vec& v_next) const {
    return step_expectation(i, [&](double x) { return interp(v_next, x); });
}

Vec Lattice1D::step_expectation(int i, const std::function<double(double)>& v) const {
    if (i < 0 || i >= grid_->steps())
        throw std::invalid_argument("step out of range");
    double dt = grid_->dt(i);
    double sigma = std::sqrt(2.0 * dt);  // B_{t+dt} = x + sqrt(2 dt) u, u ~ e^{-u^2}
    Vec out(points_.size());
    for (int j = 0; j < points_.size(); ++j) {
        double acc = 0.0;
        for (size_t m = 0; m < herm_nodes_.size(); ++m)
            acc += herm_weights_[m] * v(points_(j) + sigma * herm_nodes_[m]);
        out(j) = acc;
    }
    return out;
}

void Lattice1D::step_value_and_slope(int i, const Vec& v_next, Vec& value_out,
                                     Vec& slope_out) const {
    if (i < 0 || i >= grid_->steps())
        throw std::invalid_argument("step out of range");
    double dt = grid_->dt(i);
    double sigma = std::sqrt(2.0 * dt);
    value_out.resize(points_.size());
    slope_out.resize(points_.size());
    for (int j = 0; j < points_.size(); ++j) {
        double acc = 0.0, acc_slope = 0.0;
        for (size_t m = 0; m < herm_nodes_.size(); ++m) {
            double shift = sigma * herm_nodes_[m];
            double val = herm_weights_[m] * interp(v_next, points_(j) + shift);
            acc += val;
            acc_slope += val * shift;
        }
        value_out(j) = acc;
        slope_out(j) = acc_slope / dt;
    }
}

}  // namespace bsde
