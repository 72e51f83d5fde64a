#include "bsde/time_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace bsde {

TimeGrid::TimeGrid(std::vector<double> nodes, GridScheme scheme, bool truncated_tail)
    : t_(std::move(nodes)), scheme_(scheme), truncated_(truncated_tail) {
    if (t_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    if (t_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("TimeGrid: nodes must increase strictly");
}

double TimeGrid::quad_node(int i) const {
    double lo = node(i), hi = node(i + 1);
    if (scheme_ == GridScheme::Uniform) return 0.5 * (lo + hi);
    // Midpoint in s = 1 - e^{-t}: s_mid = 1 - (e^{-lo} + e^{-hi})/2.
    double em = 0.5 * (std::exp(-lo) + std::exp(-hi));
    return -std::log(em);
}

double TimeGrid::quad_weight(int i) const {
    double lo = node(i), hi = node(i + 1);
    if (scheme_ == GridScheme::Uniform) return hi - lo;
    double elo = std::exp(-lo), ehi = std::exp(-hi);
    double ds = elo - ehi;          // s_{i+1} - s_i
    double em = 0.5 * (elo + ehi);  // e^{-t*} at the mapped midpoint
    return ds / em;                 // e^{t*} * ds
}

namespace {

std::vector<double> mapped_nodes(double T, int n) {
    // t_i = -ln((1 - i/n) + (i/n) e^{-T}); algebraically equal to
    // -ln(1 - (i/n)(1 - e^{-T})) but hits t_n = T exactly even when e^{-T}
    // underflows to 0.
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    double eT = std::exp(-T);
    for (int i = 0; i <= n; ++i) {
        double w = static_cast<double>(i) / n;
        t[static_cast<std::size_t>(i)] = (i == n) ? T : -std::log((1.0 - w) + w * eT);
    }
    return t;
}

std::vector<double> uniform_nodes(double T, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = T * i / n;
    t[static_cast<std::size_t>(n)] = T;
    return t;
}

}  // namespace

double solve_tail_cutoff(const ScalarFn& f, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_tail_cutoff: tol must be positive");
    auto tail = [&](double t0) { return integrate_tail(f, t0); };
    double hi = 1.0;
    int guard = 0;
    while (tail(hi) > tol) {
        hi *= 2.0;
        if (++guard > 60) throw std::invalid_argument("solve_tail_cutoff: tail integral does not fall below tol");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-9 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (tail(mid) <= tol ? hi : lo) = mid;
    }
    return hi;
}

TimeGrid build_grid(const Horizon& horizon, int n, GridScheme scheme,
                    const CoefficientSet* coeffs, double tail_tol) {
    if (n < 1) throw std::invalid_argument("build_grid: need at least one cell");
    double T = horizon.T;
    if (horizon.infinite) {
        if (coeffs == nullptr)
            throw std::invalid_argument("build_grid: unbounded horizon needs coefficient tail data");
        auto f = [coeffs](double t) { return coeffs->tail_integrand(t); };
        T = solve_tail_cutoff(f, tail_tol);
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("build_grid: horizon must be positive and finite");
    auto nodes = (scheme == GridScheme::MappedExponential) ? mapped_nodes(T, n) : uniform_nodes(T, n);
    return TimeGrid(std::move(nodes), scheme, horizon.infinite);
}

TimeGrid build_grid(double T, int n, GridScheme scheme) {
    return build_grid(Horizon::finite(T), n, scheme);
}

double time_quadrature(const TimeGrid& grid, const ScalarFn& f) {
    double sum = 0.0;
    for (int i = 0; i < grid.steps(); ++i) sum += f(grid.quad_node(i)) * grid.quad_weight(i);
    return sum;
}

}  // namespace bsde
