#include "bsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bsde/integrate.hpp"
#include "bsde/transforms.hpp"

namespace bsde {

// ---------------------------------------------------------------------------
// Implicit step
// ---------------------------------------------------------------------------

namespace {

// Solve y = c + w g(tau, y, z, ctx). The damped fixed point handles the
// dissipative drivers directly; if it stalls (stiff growth far from the
// root), scalar problems fall back to bisection on F(y) = y - c - w g(y),
// which is strictly increasing whenever w times the one-sided slope is
// below 1.
Vec solve_implicit(const Vec& c, double w, double tau, const Mat& z,
                   const PathContext& ctx, const Generator& g,
                   const SolverConfig& cfg) {
    auto phi = [&](const Vec& y) -> Vec { return c + w * g.at(tau, y, z, ctx); };

    Vec y = c;
    Vec fy = phi(y);
    double res = (fy - y).norm();
    double eta = cfg.damping;
    for (int it = 0; it < cfg.implicit_max; ++it) {
        if (res <= cfg.implicit_tol * (1.0 + y.norm())) return y;
        Vec cand = y + eta * (fy - y);
        Vec fc = phi(cand);
        double cres = (fc - cand).norm();
        if (cres <= res) {
            y = cand;
            fy = fc;
            res = cres;
            eta = std::min(2.0 * eta, cfg.damping);
        } else {
            eta *= 0.5;
            if (eta < 1e-6) break;
        }
    }
    if (res <= 1e2 * cfg.implicit_tol * (1.0 + y.norm())) return y;

    if (c.size() == 1) {
        auto F = [&](double yv) {
            Vec yy = Vec::Constant(1, yv);
            return yv - c(0) - w * g.at(tau, yy, z, ctx)(0);
        };
        double radius = 1.0 + std::abs(w) * (1.0 + c.norm());
        double a = c(0) - radius, b = c(0) + radius;
        int expand = 0;
        while (F(a) > 0.0 && expand++ < 60) a -= (radius *= 2.0);
        expand = 0;
        while (F(b) < 0.0 && expand++ < 60) b += (radius *= 2.0);
        if (F(a) <= 0.0 && F(b) >= 0.0) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (a + b);
                (F(mid) <= 0.0 ? a : b) = mid;
            }
            return Vec::Constant(1, 0.5 * (a + b));
        }
    }
    throw std::runtime_error("implicit driver step did not converge");
}

int nearest_node(const TimeGrid& grid, double t) {
    const std::vector<double>& nodes = grid.nodes();
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    if (it == nodes.begin()) return 0;
    if (it == nodes.end()) return static_cast<int>(nodes.size()) - 1;
    int hi = static_cast<int>(it - nodes.begin());
    return (t - nodes[hi - 1] <= nodes[hi] - t) ? hi - 1 : hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Frozen-control sweep
// ---------------------------------------------------------------------------

void solve_z_frozen(const Generator& g, const BrownianEnsemble& ens,
                    const ConditionalExpectation& ce, const AdaptedField& v,
                    int lo, int hi, const SolverConfig& cfg, BackwardSolution& out) {
    const TimeGrid& grid = ens.grid;
    int N = grid.steps();
    int k = g.dims.k, d = g.dims.d;
    int M = ens.paths();
    if (d != ens.d) throw std::invalid_argument("driver and ensemble dimensions differ");
    if (lo < 0 || hi > N || lo >= hi) throw std::invalid_argument("bad node range");
    if (out.y.nodes() != N + 1 || out.y.rows != k || out.y.paths() != M)
        throw std::invalid_argument("solution y field has the wrong shape");
    if (out.z.nodes() != N || out.z.rows != k || out.z.cols != d)
        throw std::invalid_argument("solution z field has the wrong shape");
    if (v.nodes() != N || v.rows != k || v.cols != d || v.paths() != M)
        throw std::invalid_argument("frozen control field has the wrong shape");

    Mat zrhs(k * d, M);
    for (int i = hi - 1; i >= lo; --i) {
        const Mat& ynext = out.y.step(i + 1);  // k x M
        const Mat& dB = ens.incr_at(i);        // d x M
        double dt = grid.dt(i);

        // Conditional mean first, then the martingale slope from the centered
        // increments: E_i[(y_{i+1} - E_i y_{i+1}) dB^T] / dt is the same in
        // population as the uncentered product but drops the t/dt variance
        // blowup of y dB. Both projections reuse one factorization per step.
        Mat cond = ce.project(i, ynext);  // k x M
        Mat centered = ynext - cond;
        for (int c = 0; c < d; ++c)
            for (int r = 0; r < k; ++r)
                zrhs.row(c * k + r) = centered.row(r).cwiseProduct(dB.row(c)) / dt;
        out.z.step(i) = ce.project(i, zrhs);

        double tau = grid.quad_node(i);
        double w = grid.quad_weight(i);
        const Mat& bnow = ens.value_at(i);
        for (int m = 0; m < M; ++m) {
            PathContext ctx;
            ctx.b = bnow.col(m);
            ctx.path = m;
            ctx.step = i;
            out.y.step(i).col(m) =
                solve_implicit(cond.col(m), w, tau, v.sample(i, m), ctx, g, cfg);
        }
    }
}

// ---------------------------------------------------------------------------
// Subdivision and Picard iteration
// ---------------------------------------------------------------------------

std::vector<double> subdivide_for_contraction(const ScalarFn& v, double T,
                                              double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
    CumTable cum([&](double t) { double s = v(t); return s * s; }, T);
    std::vector<double> out{0.0};
    double cur = 0.0;
    double level = cum.at(T);
    // Slack of 1e-9 absorbs the cumulative table's quadrature error; a piece
    // carrying threshold * (1 + 1e-9) of energy contracts just the same.
    while (level - cum.at(cur) > threshold * (1.0 + 1e-9)) {
        double target = cum.at(cur) + threshold;
        double a = cur, b = T;
        while (b - a > 1e-12 * (1.0 + T)) {
            double mid = 0.5 * (a + b);
            (cum.at(mid) < target ? a : b) = mid;
        }
        cur = 0.5 * (a + b);
        if (T - cur <= 1e-9 * (1.0 + T)) break;  // avoid a sliver piece at T
        out.push_back(cur);
    }
    out.push_back(T);
    return out;
}

PicardResult picard_solve(const Generator& g, const Mat& terminal,
                          const BrownianEnsemble& ens,
                          const ConditionalExpectation& ce,
                          const PicardConfig& cfg) {
    const TimeGrid& grid = ens.grid;
    int N = grid.steps();
    int k = g.dims.k, d = g.dims.d;
    int M = ens.paths();
    if (terminal.rows() != k || terminal.cols() != M)
        throw std::invalid_argument("terminal data has the wrong shape");

    PicardResult result;
    result.breakpoints =
        subdivide_for_contraction(g.coeffs.v, grid.horizon(), cfg.contraction_threshold);

    // Snap the continuous breakpoints to grid nodes, keeping them strictly
    // increasing; a grid too coarse to separate two breakpoints simply gets a
    // wider piece (the reported ratios then show the weaker contraction).
    std::vector<int> cut{0};
    for (std::size_t j = 1; j + 1 < result.breakpoints.size(); ++j) {
        int idx = nearest_node(grid, result.breakpoints[j]);
        if (idx > cut.back() && idx < N) cut.push_back(idx);
    }
    cut.push_back(N);

    result.sol.y = AdaptedField(N + 1, k, 1, M);
    result.sol.z = AdaptedField(N, k, d, M);
    result.sol.y.step(N) = terminal;

    AdaptedField frozen(N, k, d, M);
    AdaptedField prev_y(N + 1, k, 1, M), prev_z(N, k, d, M);
    NormSpec dist_spec{cfg.p, true};

    for (int piece = static_cast<int>(cut.size()) - 2; piece >= 0; --piece) {
        int lo = cut[piece], hi = cut[piece + 1];
        IntervalReport rep;
        rep.lo = lo;
        rep.hi = hi;

        for (int i = lo; i < hi; ++i) frozen.step(i).setConstant(cfg.init_z);
        for (int i = lo; i < hi; ++i) {
            prev_y.step(i).setZero();
            prev_z.step(i).setZero();
        }
        prev_y.step(hi) = result.sol.y.step(hi);

        for (int it = 1; it <= cfg.max_iters; ++it) {
            solve_z_frozen(g, ens, ce, frozen, lo, hi, cfg.inner, result.sol);
            AdaptedField dy = difference(result.sol.y, prev_y);
            AdaptedField dz = difference(result.sol.z, prev_z);
            double dist = product_norm(dy, dz, grid, dist_spec, lo, hi);
            if (!rep.distances.empty() && rep.distances.back() >= cfg.tol)
                rep.ratios.push_back(dist / rep.distances.back());
            rep.distances.push_back(dist);
            rep.iterations = it;
            for (int i = lo; i < hi; ++i) {
                prev_y.step(i) = result.sol.y.step(i);
                prev_z.step(i) = result.sol.z.step(i);
                frozen.step(i) = result.sol.z.step(i);
            }
            if (dist < cfg.tol && it >= cfg.min_iters) {
                rep.converged = true;
                break;
            }
        }
        result.intervals.push_back(rep);
    }
    std::reverse(result.intervals.begin(), result.intervals.end());
    return result;
}

// ---------------------------------------------------------------------------
// Residual diagnostic
// ---------------------------------------------------------------------------

ResidualReport residual_check(const Generator& g, const BackwardSolution& sol,
                              const BrownianEnsemble& ens, int n_times) {
    const TimeGrid& grid = ens.grid;
    int N = grid.steps();
    int k = g.dims.k;
    int M = ens.paths();
    if (n_times < 1) throw std::invalid_argument("need at least one check time");

    // Accumulate the remaining dynamics backward once, so every sampled node
    // reuses the same driver sums.
    Mat remainder = sol.y.step(N);  // running y_T + sum w g - sum z dB, k x M
    std::vector<Mat> at_node(N + 1);
    at_node[N] = remainder;
    for (int i = N - 1; i >= 0; --i) {
        double tau = grid.quad_node(i);
        double w = grid.quad_weight(i);
        const Mat& bnow = ens.value_at(i);
        const Mat& dB = ens.incr_at(i);
        for (int m = 0; m < M; ++m) {
            PathContext ctx;
            ctx.b = bnow.col(m);
            ctx.path = m;
            ctx.step = i;
            Vec yi = sol.y.step(i).col(m);
            Mat zi = sol.z.sample(i, m);
            remainder.col(m) += w * g.at(tau, yi, zi, ctx) - zi * dB.col(m);
        }
        at_node[i] = remainder;
    }

    ResidualReport rep;
    for (int j = 0; j < n_times; ++j) {
        int idx = static_cast<int>(std::llround(static_cast<double>(j) * N / n_times));
        idx = std::min(idx, N - 1);
        if (!rep.nodes.empty() && rep.nodes.back() == idx) continue;
        Vec mean_r = Vec::Zero(k);
        double scale = 0.0;
        for (int m = 0; m < M; ++m) {
            mean_r += sol.y.step(idx).col(m) - at_node[idx].col(m);
            scale += sol.y.step(idx).col(m).norm();
        }
        mean_r /= M;
        scale = 1.0 + scale / M;
        rep.nodes.push_back(idx);
        rep.values.push_back(mean_r.norm() / scale);
        rep.max_value = std::max(rep.max_value, rep.values.back());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Minimal-integrability ladder
// ---------------------------------------------------------------------------

LadderReport solve_l1(const Generator& g, const Mat& terminal,
                      const BrownianEnsemble& ens, const ConditionalExpectation& ce,
                      const LadderConfig& cfg) {
    if (!g.claims.hoelder_in_z)
        throw std::invalid_argument("the ladder needs a Hoelder-in-z claim");
    double alpha = g.coeffs.alpha;
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("Hoelder exponent must lie in (0, 1)");
    double beta = cfg.beta == 0.0 ? 0.5 * (alpha + 1.0) : cfg.beta;
    if (!(beta > alpha && beta < 1.0))
        throw std::invalid_argument("ladder exponent must lie in (alpha, 1)");
    if (cfg.levels.empty()) throw std::invalid_argument("need at least one level");

    LadderReport rep;
    rep.beta = beta;
    PicardConfig pc = cfg.picard;
    pc.p = 2.0;  // each rung is a square-integrable problem

    const TimeGrid& grid = ens.grid;
    bool have_prev = false;
    BackwardSolution prev;
    for (double level : cfg.levels) {
        if (!(level >= 1.0)) throw std::invalid_argument("levels must be >= 1");
        Generator rung = truncate_driver(g, static_cast<int>(level));
        Mat xi = truncate_terminal(terminal, level);
        PicardResult r = picard_solve(rung, xi, ens, ce, pc);
        rep.levels.push_back(level);
        if (have_prev) {
            AdaptedField dy = difference(r.sol.y, prev.y);
            AdaptedField dz = difference(r.sol.z, prev.z);
            rep.beta_distances.push_back(
                product_norm(dy, dz, grid, NormSpec{beta, true}));
            rep.classd_distances.push_back(class_d_norm(dy, grid).value);
        }
        prev = r.sol;
        have_prev = true;
    }
    // A rung distance growing well beyond its predecessor means the schedule
    // starts before the ladder's convergent regime; surface that instead of
    // returning a report that only looks like an approximation. The allowance
    // (10% relative plus a speck of the first gap) keeps Monte Carlo wiggle
    // and exact-zero tails from tripping it.
    auto check_decreasing = [](const std::vector<double>& d, const char* what) {
        if (d.empty()) return;
        for (std::size_t j = 0; j + 1 < d.size(); ++j)
            if (d[j + 1] > 1.10 * d[j] + 1e-3 * d.front()) {
                std::string msg = "ladder distances not decreasing (";
                msg += what;
                msg += "):";
                for (double v : d) msg += " " + std::to_string(v);
                throw std::runtime_error(msg);
            }
    };
    check_decreasing(rep.beta_distances, "weak-exponent norm");
    check_decreasing(rep.classd_distances, "stopping-family norm");
    rep.sol = prev;
    return rep;
}

// ---------------------------------------------------------------------------
// Lattice cross check
// ---------------------------------------------------------------------------

double lattice_solve(const Generator& g, const std::function<double(double)>& terminal,
                     const Lattice1D& lat, const SolverConfig& cfg) {
    if (g.dims.k != 1 || g.dims.d != 1)
        throw std::invalid_argument("the lattice route is scalar-state only");
    const TimeGrid& grid = lat.grid();
    int N = grid.steps();
    const Vec& x = lat.points();

    Vec v(x.size());
    for (int j = 0; j < x.size(); ++j) v(j) = terminal(x(j));

    Vec cond, slope;
    for (int i = N - 1; i >= 0; --i) {
        lat.step_value_and_slope(i, v, cond, slope);
        double tau = grid.quad_node(i);
        double w = grid.quad_weight(i);
        for (int j = 0; j < x.size(); ++j) {
            PathContext ctx;
            ctx.b = Vec::Constant(1, x(j));
            ctx.step = i;
            Mat zm = Mat::Constant(1, 1, slope(j));
            v(j) = solve_implicit(Vec::Constant(1, cond(j)), w, tau, zm, ctx, g, cfg)(0);
        }
    }
    return lat.interp(v, 0.0);
}

}  // namespace bsde
