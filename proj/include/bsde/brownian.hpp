#pragma once

#include <cstdint>
#include <vector>

#include "bsde/time_grid.hpp"
#include "bsde/types.hpp"

namespace bsde {

// Values of a matrix-valued process at every grid node for every path.
// step(i) is a (rows*cols) x paths matrix whose column m stacks the value for
// path m column-major; col(i, m) reshapes one sample back to rows x cols.
struct AdaptedField {
    int rows = 1;
    int cols = 1;
    std::vector<Mat> data;  // one (rows*cols) x paths matrix per grid node

    AdaptedField() = default;
    AdaptedField(int n_nodes, int rows_, int cols_, int paths)
        : rows(rows_), cols(cols_), data(static_cast<std::size_t>(n_nodes),
                                         Mat::Zero(rows_ * cols_, paths)) {}

    int nodes() const { return static_cast<int>(data.size()); }
    int paths() const { return data.empty() ? 0 : static_cast<int>(data[0].cols()); }
    Mat& step(int i) { return data[static_cast<std::size_t>(i)]; }
    const Mat& step(int i) const { return data[static_cast<std::size_t>(i)]; }
    Mat sample(int i, int m) const {
        return Eigen::Map<const Mat>(step(i).col(m).data(), rows, cols);
    }
};

// Brownian ensemble on a grid: increments dB_i over cell i and accumulated
// node values B_{t_i}, both d x paths per slot. Every increment is a pure
// function of (seed, path, step, dim), so the ensemble is identical for any
// worker count and any fill order.
struct BrownianEnsemble {
    TimeGrid grid;
    int d = 1;
    std::uint64_t seed = 0;
    std::vector<Mat> incr;   // steps() slots, d x paths
    std::vector<Mat> value;  // steps()+1 slots, d x paths

    int paths() const { return incr.empty() ? 0 : static_cast<int>(incr[0].cols()); }
    const Mat& incr_at(int i) const { return incr[static_cast<std::size_t>(i)]; }
    const Mat& value_at(int i) const { return value[static_cast<std::size_t>(i)]; }
};

BrownianEnsemble sample_brownian(const TimeGrid& grid, int d, int paths,
                                 std::uint64_t seed, int workers = 1);

}  // namespace bsde
