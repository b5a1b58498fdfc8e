// SPDX-License-Identifier: Apache-2.0
#include "bhfr/velocity_map.hpp"

#include <algorithm>
#include <cmath>

namespace bhfr {

VelocityMap VelocityMap::empty_like(const CellGrid& grid, std::string method) {
    VelocityMap m;
    m.n_ranges = grid.n_ranges;
    m.bearings = grid.bearings;
    m.cells.assign(grid.cells.size(), VelocityCell{});
    m.valid.resize(grid.cells.size());
    m.positions.resize(grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        m.valid[i] = grid.cells[i].valid;
        m.positions[i] = grid.cells[i].patch_position;
    }
    m.method = std::move(method);
    return m;
}

std::size_t VelocityMap::filled_count() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.filled; }));
}

std::size_t VelocityMap::nearest_bearing(double theta) const {
    if (bearings.empty()) throw Error(ErrorKind::data, "map has no bearings");
    const auto it = std::lower_bound(bearings.begin(), bearings.end(), theta);
    if (it == bearings.begin()) return 0;
    if (it == bearings.end()) return bearings.size() - 1;
    const auto hi = static_cast<std::size_t>(it - bearings.begin());
    return (theta - bearings[hi - 1] <= bearings[hi] - theta) ? hi - 1 : hi;
}

double fill_ratio(const VelocityMap& map) {
    std::size_t valid = 0, filled = 0;
    for (std::size_t i = 0; i < map.cells.size(); ++i) {
        if (!map.valid[i]) continue;
        ++valid;
        if (map.cells[i].filled) ++filled;
    }
    return valid == 0 ? 0.0 : static_cast<double>(filled) / static_cast<double>(valid);
}

MapComparison compare_maps(const VelocityMap& a, const VelocityMap& b) {
    if (a.n_ranges != b.n_ranges || a.bearings.size() != b.bearings.size())
        throw Error(ErrorKind::comparison, "maps are on different grids");

    MapComparison out;
    double sse = 0.0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        if (a.cells[i].filled && b.cells[i].filled) {
            const double d = a.cells[i].velocity - b.cells[i].velocity;
            sse += d * d;
            ++out.common;
        }
    }
    if (out.common == 0) throw Error(ErrorKind::comparison, "no common cells");
    out.rmse = std::sqrt(sse / static_cast<double>(out.common));

    const auto B = static_cast<long>(a.bearings.size());
    std::vector<double> shifts;
    for (int r = 0; r < a.n_ranges; ++r) {
        bool any_a = false, any_b = false;
        for (long i = 0; i < B; ++i) {
            any_a |= a.at(r, static_cast<std::size_t>(i)).filled;
            any_b |= b.at(r, static_cast<std::size_t>(i)).filled;
        }
        if (!any_a || !any_b) continue;
        long best_lag = 0, best = -1;
        for (long lag = -(B - 1); lag <= B - 1; ++lag) {
            long corr = 0;
            for (long i = 0; i < B; ++i) {
                const long j = i + lag;
                if (j < 0 || j >= B) continue;
                corr += (a.at(r, static_cast<std::size_t>(i)).filled && b.at(r, static_cast<std::size_t>(j)).filled);
            }
            // Ties favour the smallest |lag|, then the negative one.
            if (corr > best || (corr == best && (std::labs(lag) < std::labs(best_lag) ||
                                                 (std::labs(lag) == std::labs(best_lag) && lag < best_lag)))) {
                best = corr;
                best_lag = lag;
            }
        }
        shifts.push_back(static_cast<double>(best_lag));
    }
    if (!shifts.empty()) {
        std::sort(shifts.begin(), shifts.end());
        const std::size_t m = shifts.size() / 2;
        out.bearing_shift_bins = shifts.size() % 2 ? shifts[m] : 0.5 * (shifts[m - 1] + shifts[m]);
    }
    const double step = a.bearings.size() > 1 ? a.bearings[1] - a.bearings[0] : 0.0;
    out.bearing_shift_deg = rad2deg(out.bearing_shift_bins * step);
    return out;
}

}  // namespace bhfr
