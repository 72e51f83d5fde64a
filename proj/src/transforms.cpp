#include "bsde/transforms.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "bsde/rng.hpp"

namespace bsde {

namespace {

template <typename M>
M truncate_impl(const M& x, double q) {
    if (!(q >= 0.0)) throw std::invalid_argument("radial_truncate: level must be nonnegative");
    double n = x.norm();
    if (n <= q) return x;
    M out = x * (q / n);
    // One rescale can land a hair above q through rounding; clamp so the
    // projection is exactly idempotent.
    for (int guard = 0; guard < 4 && out.norm() > q; ++guard)
        out *= q / out.norm();
    return out;
}

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

}  // namespace

Vec radial_truncate(const Vec& x, double q) { return truncate_impl(x, q); }
Mat radial_truncate(const Mat& x, double q) { return truncate_impl(x, q); }

Mollifier::Mollifier(int k, int panels, int nodes_per_panel) : k_(k) {
    if (k < 1) throw std::invalid_argument("Mollifier: k < 1");
    if (panels < 1 || nodes_per_panel < 2) throw std::invalid_argument("Mollifier: bad rule size");

    auto composite_gl = [](int np, int nn, std::vector<double>& xs, std::vector<double>& ws) {
        std::vector<double> gx, gw;
        gauss_legendre(nn, gx, gw);
        xs.clear();
        ws.clear();
        for (int p = 0; p < np; ++p) {
            double lo = -1.0 + 2.0 * p / np, hi = -1.0 + 2.0 * (p + 1) / np;
            for (int i = 0; i < nn; ++i) {
                xs.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[i]);
                ws.push_back(0.5 * (hi - lo) * gw[i]);
            }
        }
    };

    double quad_mass = 0.0;
    if (k <= 2) {
        std::vector<double> xs, ws;
        composite_gl(panels, nodes_per_panel, xs, ws);
        if (k == 1) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                Vec x(1);
                x(0) = xs[i];
                double wv = ws[i] * bump(x.squaredNorm());
                if (wv > 0.0) {
                    nodes_.push_back(x);
                    weights_.push_back(wv);
                    quad_mass += wv;
                }
            }
        } else {
            for (std::size_t i = 0; i < xs.size(); ++i)
                for (std::size_t j = 0; j < xs.size(); ++j) {
                    Vec x(2);
                    x << xs[i], xs[j];
                    double wv = ws[i] * ws[j] * bump(x.squaredNorm());
                    if (wv > 0.0) {
                        nodes_.push_back(x);
                        weights_.push_back(wv);
                        quad_mass += wv;
                    }
                }
        }
        // Reference mass from a much finer rule of the same type.
        std::vector<double> rx, rw;
        composite_gl(16, 24, rx, rw);
        if (k == 1) {
            for (std::size_t i = 0; i < rx.size(); ++i) mass_ += rw[i] * bump(rx[i] * rx[i]);
        } else {
            for (std::size_t i = 0; i < rx.size(); ++i)
                for (std::size_t j = 0; j < rx.size(); ++j)
                    mass_ += rw[i] * rw[j] * bump(rx[i] * rx[i] + rx[j] * rx[j]);
        }
    } else {
        // Monte Carlo ball rule for higher dimensions: rejection-sampled
        // uniform points, each representing volume vol/q.
        const int q = 20000;
        double vol = std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
        std::uint64_t ctr = 0;
        for (int s = 0; s < q; ++s) {
            Vec x(k);
            double r2;
            do {
                for (int i = 0; i < k; ++i)
                    x(i) = 2.0 * uniform01(mix64(0xB0B5EEDULL + 7919ULL * ctr++)) - 1.0;
                r2 = x.squaredNorm();
            } while (r2 >= 1.0);
            double wv = (vol / q) * bump(r2);
            nodes_.push_back(x);
            weights_.push_back(wv);
            quad_mass += wv;
        }
        mass_ = quad_mass;  // statistical reference; k >= 3 rules are MC-grade
    }
    if (!(quad_mass > 0.0)) throw std::runtime_error("Mollifier: degenerate rule");
    for (auto& w : weights_) w /= quad_mass;
}

double Mollifier::density(const Vec& x) const {
    if (x.size() != k_) throw std::invalid_argument("Mollifier::density: wrong dimension");
    return bump(x.squaredNorm()) / mass_;
}

Generator mollify(const Generator& g, const Mollifier& moll, int n) {
    if (moll.k() != g.dims.k) throw std::invalid_argument("mollify: mollifier dimension mismatch");
    if (n < 1) throw std::invalid_argument("mollify: n < 1");
    Generator out = g;
    out.name = g.name + "_mollified";
    auto base = g.eval;
    auto nodes = moll.nodes();
    auto weights = moll.weights();
    out.eval = [base, nodes, weights, n](double t, const Vec& y, const Mat& z,
                                         const PathContext& ctx) -> Vec {
        Vec acc = weights[0] * base(t, y - nodes[0] / n, z, ctx);
        for (std::size_t q = 1; q < nodes.size(); ++q)
            acc += weights[q] * base(t, y - nodes[q] / n, z, ctx);
        return acc;
    };
    return out;
}

Generator truncate_compose(const Generator& g, const Mollifier& moll, int n, double q) {
    Generator smooth = mollify(g, moll, n);
    Generator out = smooth;
    out.name = g.name + "_mollified_truncated";
    auto base = smooth.eval;
    out.eval = [base, q](double t, const Vec& y, const Mat& z, const PathContext& ctx) -> Vec {
        return base(t, radial_truncate(y, q), z, ctx);
    };
    return out;
}

double smooth_cutoff(double r, double rp) {
    if (!(rp >= 0.0)) throw std::invalid_argument("smooth_cutoff: rp must be nonnegative");
    double s = r - rp;
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

double smooth_cutoff_lipschitz() { return 1.5; }

Generator build_tempered_driver(const Generator& g, const ScalarFn& psi_rp1, int n,
                                double rp, bool with_cutoff) {
    if (n < 1) throw std::invalid_argument("build_tempered_driver: n < 1");
    if (!psi_rp1) throw std::invalid_argument("build_tempered_driver: missing psi");
    Generator out = g;
    out.name = g.name + (with_cutoff ? "_tempered" : "_tempered_nocut");
    auto base = g.eval;
    int k = g.dims.k;
    out.eval = [base, psi_rp1, n, rp, with_cutoff, k](double t, const Vec& y, const Mat& z,
                                                      const PathContext& ctx) -> Vec {
        double level = n * std::exp(-t);
        Mat zq = radial_truncate(z, level);
        Vec zero = Vec::Zero(k);
        Vec core = base(t, y, zq, ctx) - base(t, zero, zq, ctx);
        double fac = level / std::max(psi_rp1(t), level);
        double theta = with_cutoff ? smooth_cutoff(y.norm(), rp) : 1.0;
        return theta * fac * core + base(t, zero, z, ctx);
    };
    // Rate bookkeeping: the fade-out adds a slope of at most
    // C_theta * n e^{-t} (2 v(t) + 1) on top of the base rate, and each of
    // the three z-differences is v-Lipschitz (the radial projection is
    // 1-Lipschitz), so 3v is a valid z-rate.
    auto u0 = g.coeffs.u;
    auto v0 = g.coeffs.v;
    if (with_cutoff) {
        double ct = smooth_cutoff_lipschitz();
        out.coeffs.u = [u0, v0, n, ct](double t) {
            return u0(t) + ct * n * std::exp(-t) * (2.0 * v0(t) + 1.0);
        };
    }
    out.coeffs.v = [v0](double t) { return 3.0 * v0(t); };
    out.claims.zero_monotone = false;
    return out;
}

Generator truncate_driver(const Generator& g, int n) {
    if (n < 1) throw std::invalid_argument("truncate_driver: n < 1");
    Generator out = g;
    out.name = g.name + "_rung";
    auto base = g.eval;
    int k = g.dims.k;
    out.eval = [base, n, k](double t, const Vec& y, const Mat& z,
                            const PathContext& ctx) -> Vec {
        Vec zero = Vec::Zero(k);
        Vec g0 = base(t, zero, z, ctx);
        return base(t, y, z, ctx) - g0 + radial_truncate(Vec(g0), n * std::exp(-t));
    };
    // The origin part is now bounded by n e^{-t}, so the rung is
    // square-integrable at the origin whatever the base driver's order was.
    out.claims.p = 2.0;
    out.claims.integrable_driver = true;
    auto v0 = g.coeffs.v;
    out.coeffs.v = [v0](double t) { return 3.0 * v0(t); };
    return out;
}

Mat truncate_terminal(const Mat& xi, double n) {
    Mat out = xi;
    for (int m = 0; m < xi.cols(); ++m) out.col(m) = radial_truncate(Vec(xi.col(m)), n);
    return out;
}

MonotoneShift transform_monotone_to_zero(const Generator& g, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("transform_monotone_to_zero: T must be positive");
    auto table = std::make_shared<CumTable>(g.coeffs.u, T);
    MonotoneShift shift;
    shift.cumulative = [table](double t) { return table->at(t); };
    Generator out = g;
    out.name = g.name + "_shifted";
    auto base = g.eval;
    auto u0 = g.coeffs.u;
    auto U = shift.cumulative;
    out.eval = [base, u0, U](double t, const Vec& y, const Mat& z,
                             const PathContext& ctx) -> Vec {
        double w = std::exp(U(t));
        return w * base(t, y / w, z / w, ctx) - u0(t) * y;
    };
    out.coeffs.u = [](double) { return 0.0; };
    out.claims.zero_monotone = true;
    shift.driver = std::move(out);
    return shift;
}

ExpWeights exp_weights(const TimeGrid& grid, const ScalarFn& beta) {
    CumTable table(beta, grid.horizon());
    ExpWeights w;
    w.half.resize(static_cast<std::size_t>(grid.steps()) + 1);
    w.full.resize(w.half.size());
    w.half_at_quad.resize(static_cast<std::size_t>(grid.steps()));
    for (int i = 0; i <= grid.steps(); ++i) {
        double c = table.at(grid.node(i));
        w.half[static_cast<std::size_t>(i)] = std::exp(0.5 * c);
        w.full[static_cast<std::size_t>(i)] = std::exp(c);
    }
    for (int i = 0; i < grid.steps(); ++i)
        w.half_at_quad[static_cast<std::size_t>(i)] = std::exp(0.5 * table.at(grid.quad_node(i)));
    return w;
}

void apply_weights(AdaptedField& y, AdaptedField& z, const ExpWeights& w) {
    for (int i = 0; i < y.nodes(); ++i) y.step(i) *= w.half[static_cast<std::size_t>(i)];
    for (int i = 0; i < z.nodes(); ++i) z.step(i) *= w.half[static_cast<std::size_t>(i)];
}

void remove_weights(AdaptedField& y, AdaptedField& z, const ExpWeights& w) {
    for (int i = 0; i < y.nodes(); ++i) y.step(i) /= w.half[static_cast<std::size_t>(i)];
    for (int i = 0; i < z.nodes(); ++i) z.step(i) /= w.half[static_cast<std::size_t>(i)];
}

}  // namespace bsde
