// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "bhfr/geometry.hpp"

namespace bhfr {

struct VelocityCell {
    double velocity = 0.0;  // elliptical velocity, m/s; meaningful only when filled
    double weight = 0.0;
    int n_contributions = 0;
    bool filled = false;
    /// Detection strength (BF peak SNR or MUSIC factor); not serialized.
    double peak = 0.0;
};

/// Polar (range x bearing) map of elliptical velocities.
struct VelocityMap {
    int n_ranges = 0;
    std::vector<double> bearings;
    std::vector<VelocityCell> cells;  // range-major
    std::vector<bool> valid;
    std::vector<Vec2> positions;
    std::string method;
    Digest config_hash{};
    Digest calibration_hash{};

    static VelocityMap empty_like(const CellGrid& grid, std::string method);

    std::size_t n_bearings() const { return bearings.size(); }
    std::size_t index(int range, std::size_t bearing) const {
        return static_cast<std::size_t>(range) * bearings.size() + bearing;
    }
    VelocityCell& at(int range, std::size_t bearing) { return cells[index(range, bearing)]; }
    const VelocityCell& at(int range, std::size_t bearing) const { return cells[index(range, bearing)]; }

    std::size_t filled_count() const;
    /// Bearing bin nearest to theta (clamped to the grid).
    std::size_t nearest_bearing(double theta) const;
};

/// Filled cells over valid cells; 0 for a map without valid cells.
double fill_ratio(const VelocityMap& map);

struct MapComparison {
    double rmse = 0.0;  // m/s over cells filled in both maps
    std::size_t common = 0;
    double bearing_shift_bins = 0.0;
    double bearing_shift_deg = 0.0;
};

/// Compares two maps on the same grid. The bearing shift is the integer bin
/// lag maximizing the cross-correlation of the filled masks, per range, with
/// b assumed to be a shifted by that lag (b[i] ~ a[i - lag]); the reported
/// value is the median across ranges where both maps have fills.
MapComparison compare_maps(const VelocityMap& a, const VelocityMap& b);

}  // namespace bhfr
