#include "bsde/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsde {

namespace {
void validate_spec(const NormSpec& spec) {
    if (!(spec.p > 0.0)) throw std::invalid_argument("norm exponent must be positive");
}

double finish(double expectation, const NormSpec& spec) {
    if (!spec.apply_root || spec.p <= 1.0) return expectation;
    return std::pow(expectation, 1.0 / spec.p);
}

int resolve_hi(int hi, int last) {
    return hi < 0 ? last : hi;
}
}  // namespace

double sp_norm(const AdaptedField& y, NormSpec spec, int lo, int hi) {
    validate_spec(spec);
    hi = resolve_hi(hi, y.nodes() - 1);
    if (lo < 0 || hi >= y.nodes() || lo > hi)
        throw std::invalid_argument("sp_norm node range out of bounds");
    int M = y.paths();
    double acc = 0.0;
    for (int m = 0; m < M; ++m) {
        double sup = 0.0;
        for (int i = lo; i <= hi; ++i) sup = std::max(sup, y.step(i).col(m).norm());
        acc += std::pow(sup, spec.p);
    }
    return finish(acc / M, spec);
}

double mp_norm(const AdaptedField& z, const TimeGrid& grid, NormSpec spec,
               int lo, int hi) {
    validate_spec(spec);
    hi = resolve_hi(hi, std::min(z.nodes(), grid.steps()));
    if (lo < 0 || hi > z.nodes() || lo > hi)
        throw std::invalid_argument("mp_norm step range out of bounds");
    int M = z.paths();
    double acc = 0.0;
    for (int m = 0; m < M; ++m) {
        double energy = 0.0;
        for (int i = lo; i < hi; ++i) energy += z.step(i).col(m).squaredNorm() * grid.dt(i);
        acc += std::pow(energy, 0.5 * spec.p);
    }
    return finish(acc / M, spec);
}

double product_norm(const AdaptedField& y, const AdaptedField& z,
                    const TimeGrid& grid, NormSpec spec, int lo, int hi) {
    validate_spec(spec);
    int node_hi = resolve_hi(hi, y.nodes() - 1);
    int step_hi = resolve_hi(hi, std::min(z.nodes(), grid.steps()));
    if (lo < 0 || node_hi >= y.nodes() || step_hi > z.nodes() || lo > node_hi)
        throw std::invalid_argument("product_norm range out of bounds");
    if (y.paths() != z.paths())
        throw std::invalid_argument("y and z path counts differ");
    int M = y.paths();
    double acc = 0.0;
    for (int m = 0; m < M; ++m) {
        double sup = 0.0;
        for (int i = lo; i <= node_hi; ++i) sup = std::max(sup, y.step(i).col(m).norm());
        double energy = 0.0;
        for (int i = lo; i < step_hi; ++i)
            energy += z.step(i).col(m).squaredNorm() * grid.dt(i);
        acc += std::pow(sup, spec.p) + std::pow(energy, 0.5 * spec.p);
    }
    return finish(acc / M, spec);
}

AdaptedField difference(const AdaptedField& a, const AdaptedField& b) {
    if (a.nodes() != b.nodes() || a.rows != b.rows || a.cols != b.cols ||
        a.paths() != b.paths())
        throw std::invalid_argument("field shapes differ");
    AdaptedField out = a;
    for (int i = 0; i < a.nodes(); ++i) out.step(i) -= b.step(i);
    return out;
}

ClassDResult class_d_norm(const AdaptedField& y, const TimeGrid& grid,
                          int levels) {
    if (y.nodes() != grid.steps() + 1)
        throw std::invalid_argument("field does not cover the grid's nodes");
    int M = y.paths();
    int N = y.nodes();
    ClassDResult best;

    // Deterministic rules: stop at a fixed node.
    for (int i = 0; i < N; ++i) {
        double mean = 0.0;
        for (int m = 0; m < M; ++m) mean += y.step(i).col(m).norm();
        mean /= M;
        if (mean > best.value) {
            best.value = mean;
            best.time = grid.node(i);
            best.rule = "node " + std::to_string(i);
        }
    }

    // First-passage rules across log-spaced magnitude levels. Paths that
    // never reach a level contribute their terminal value (tau = T).
    double ymax = 0.0;
    for (int i = 0; i < N; ++i)
        for (int m = 0; m < M; ++m) ymax = std::max(ymax, y.step(i).col(m).norm());
    if (ymax > 0.0) {
        for (int l = 1; l <= levels; ++l) {
            double level = ymax * std::pow(2.0, -0.5 * l);
            double mean = 0.0, mean_time = 0.0;
            for (int m = 0; m < M; ++m) {
                int stop = N - 1;
                for (int i = 0; i < N; ++i) {
                    if (y.step(i).col(m).norm() >= level) {
                        stop = i;
                        break;
                    }
                }
                mean += y.step(stop).col(m).norm();
                mean_time += grid.node(stop);
            }
            mean /= M;
            if (mean > best.value) {
                best.value = mean;
                best.time = mean_time / M;
                best.rule = "hit level " + std::to_string(level);
            }
        }
    }
    return best;
}

double pth_power_constant(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("exponent must be >= 1");
    return 0.5 * p * std::min(p - 1.0, 1.0);
}

}  // namespace bsde
