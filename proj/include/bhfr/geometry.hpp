// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "bhfr/types.hpp"

namespace bhfr {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kGravity = 9.81;

// Toulon defaults.
inline constexpr double kDefaultRadarFrequency = 16.150e6;
inline constexpr double kDefaultChirpDuration = 0.26;
inline constexpr double kDefaultRangeResolution = 1500.0;
inline constexpr int kDefaultAntennaCount = 12;
inline constexpr double kDefaultSpacingWavelengths = 0.45;

/// Bistatic angles are capped below pi/2 by this margin; cells beyond are invalid.
inline constexpr double kBistaticAngleMargin = 1e-3;

struct RadarConstants {
    double radar_frequency = kDefaultRadarFrequency;
    double wavelength = kSpeedOfLight / kDefaultRadarFrequency;
    double wavenumber = kTwoPi * kDefaultRadarFrequency / kSpeedOfLight;
    double gravity = kGravity;
    double speed_of_light = kSpeedOfLight;

    static RadarConstants from_frequency(double frequency_hz, double gravity = kGravity);
};

struct SitePair {
    Vec2 tx;
    Vec2 rx;

    double baseline() const { return norm(tx - rx); }
    bool monostatic() const { return baseline() == 0.0; }
};

/// Receiving array.
///
/// Positions are East/North offsets from the first (reference) antenna, so
/// positions[0] is always the zero vector. Bearings theta are measured from the
/// array normal; the compass azimuth of bearing theta is
/// `normal_azimuth + theta` (clockwise from North). For a linear array built
/// by `linear()`, antenna n sits at n*spacing along the direction theta = +pi/2.
class ArrayGeometry {
public:
    ArrayGeometry(std::vector<Vec2> relative_positions, double normal_azimuth);

    static ArrayGeometry linear(int count, double spacing_m, double normal_azimuth);

    std::size_t size() const { return positions_.size(); }
    const std::vector<Vec2>& positions() const { return positions_; }
    double normal_azimuth() const { return normal_azimuth_; }

    /// Outgoing unit vector for array bearing theta.
    Vec2 direction(double theta) const;
    /// Array bearing of a world-frame direction vector.
    double bearing_of(Vec2 dir) const;

    /// Sub-array made of the given antennas (0-based), re-referenced to the first.
    ArrayGeometry subset(std::span<const int> antennas) const;

private:
    std::vector<Vec2> positions_;
    double normal_azimuth_;
};

struct SteeringVector {
    double bearing = 0.0;
    std::vector<cplx> entries;
};

/// Sea patch on an iso-range ellipse, seen from the receiver along `bearing`.
struct RadarCell {
    int range_index = 0;
    double bistatic_range = 0.0;
    double bearing = 0.0;
    Vec2 patch_position;
    double bistatic_angle = 0.0;
    bool valid = true;
};

/// Radar cells for every (range, bearing) pair of a polar grid.
struct CellGrid {
    int n_ranges = 0;
    std::vector<double> bearings;
    std::vector<RadarCell> cells;  // range-major

    const RadarCell& at(int range, std::size_t bearing_index) const {
        return cells[static_cast<std::size_t>(range) * bearings.size() + bearing_index];
    }
};

double bistatic_angle(const SitePair& pair, Vec2 patch);
double bragg_frequency(const RadarConstants& c, double bistatic_angle);
double elliptical_velocity(const RadarConstants& c, double doppler_shift_hz, double bistatic_angle);
/// Absolute Doppler of a patch drifting at elliptical velocity `velocity` on the
/// Bragg line with sign `bragg_sign` (+1 approaching line, -1 receding line).
double doppler_for_velocity(const RadarConstants& c, double velocity, double bistatic_angle, int bragg_sign);

SteeringVector steering_vector(const ArrayGeometry& geom, const RadarConstants& c, double theta);

/// Bistatic range (half focal sum) of a range cell: baseline/2 + index*resolution.
double bistatic_range(const SitePair& pair, int range_index, double range_resolution);

RadarCell cell_from_range_bearing(const SitePair& pair, const ArrayGeometry& geom, const RadarConstants& c,
                                  int range_index, double range_resolution, double theta);

/// Builds the full grid; cells that cannot exist (inside the minimal range, or
/// with bistatic angle past the cap) are kept but flagged invalid.
CellGrid make_cell_grid(const SitePair& pair, const ArrayGeometry& geom, const RadarConstants& c, int n_ranges,
                        double range_resolution, std::span<const double> bearings);

/// Equirectangular local tangent plane around an origin; adequate at the
/// few-tens-of-km scale of a radar site.
struct LocalFrame {
    double origin_lat_deg = 0.0;
    double origin_lon_deg = 0.0;

    Vec2 to_local(double lat_deg, double lon_deg) const;
    void to_geodetic(Vec2 p, double& lat_deg, double& lon_deg) const;
};

}  // namespace bhfr
