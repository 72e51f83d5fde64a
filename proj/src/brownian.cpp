#include "bsde/brownian.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "bsde/rng.hpp"

namespace bsde {

BrownianEnsemble sample_brownian(const TimeGrid& grid, int d, int paths,
                                 std::uint64_t seed, int workers) {
    if (d < 1) throw std::invalid_argument("sample_brownian: d < 1");
    if (paths < 1) throw std::invalid_argument("sample_brownian: paths < 1");
    if (workers < 1) throw std::invalid_argument("sample_brownian: workers < 1");

    const int n = grid.steps();
    BrownianEnsemble ens;
    ens.grid = grid;
    ens.d = d;
    ens.seed = seed;
    ens.incr.assign(static_cast<std::size_t>(n), Mat(d, paths));
    ens.value.assign(static_cast<std::size_t>(n) + 1, Mat(d, paths));
    ens.value[0].setZero();

    auto fill_range = [&](int m0, int m1) {
        for (int m = m0; m < m1; ++m) {
            for (int i = 0; i < n; ++i) {
                double sdt = std::sqrt(grid.dt(i));
                for (int j = 0; j < d; ++j) {
                    double g = normal_variate(seed, static_cast<std::uint64_t>(m),
                                              static_cast<std::uint64_t>(i),
                                              static_cast<std::uint64_t>(j));
                    double inc = sdt * g;
                    ens.incr[static_cast<std::size_t>(i)](j, m) = inc;
                    ens.value[static_cast<std::size_t>(i) + 1](j, m) =
                        ens.value[static_cast<std::size_t>(i)](j, m) + inc;
                }
            }
        }
    };

    if (workers == 1 || paths < 2 * workers) {
        fill_range(0, paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        int chunk = (paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            int m0 = w * chunk;
            int m1 = std::min(paths, m0 + chunk);
            if (m0 >= m1) break;
            pool.emplace_back(fill_range, m0, m1);
        }
        for (auto& th : pool) th.join();
    }
    return ens;
}

}  // namespace bsde
