// SPDX-License-Identifier: Apache-2.0
#include "bhfr/geometry.hpp"

#include <algorithm>

namespace bhfr {

RadarConstants RadarConstants::from_frequency(double frequency_hz, double gravity) {
    if (!(frequency_hz > 0.0)) throw Error(ErrorKind::config, "radar frequency must be positive");
    RadarConstants c;
    c.radar_frequency = frequency_hz;
    c.wavelength = kSpeedOfLight / frequency_hz;
    c.wavenumber = kTwoPi / c.wavelength;
    c.gravity = gravity;
    return c;
}

ArrayGeometry::ArrayGeometry(std::vector<Vec2> relative_positions, double normal_azimuth)
    : positions_(std::move(relative_positions)), normal_azimuth_(normal_azimuth) {
    if (positions_.size() < 2) throw Error(ErrorKind::config, "array needs at least 2 antennas");
    if (!(positions_[0] == Vec2{})) throw Error(ErrorKind::config, "first antenna position must be the origin");
}

ArrayGeometry ArrayGeometry::linear(int count, double spacing_m, double normal_azimuth) {
    if (count < 2) throw Error(ErrorKind::config, "array needs at least 2 antennas");
    // Array axis points toward bearing +pi/2.
    const double axis_az = normal_azimuth + kPi / 2.0;
    const Vec2 axis{std::sin(axis_az), std::cos(axis_az)};
    std::vector<Vec2> pos(static_cast<std::size_t>(count));
    for (int n = 1; n < count; ++n) pos[static_cast<std::size_t>(n)] = (n * spacing_m) * axis;
    return ArrayGeometry(std::move(pos), normal_azimuth);
}

Vec2 ArrayGeometry::direction(double theta) const {
    const double az = normal_azimuth_ + theta;
    return {std::sin(az), std::cos(az)};
}

double ArrayGeometry::bearing_of(Vec2 dir) const {
    const double az = std::atan2(dir.x, dir.y);
    return wrap_phase(az - normal_azimuth_);
}

ArrayGeometry ArrayGeometry::subset(std::span<const int> antennas) const {
    if (antennas.size() < 2) throw Error(ErrorKind::usage, "subarray needs at least 2 antennas");
    std::vector<Vec2> pos;
    pos.reserve(antennas.size());
    const Vec2 origin = positions_.at(static_cast<std::size_t>(antennas[0]));
    for (int a : antennas) pos.push_back(positions_.at(static_cast<std::size_t>(a)) - origin);
    return ArrayGeometry(std::move(pos), normal_azimuth_);
}

double bistatic_angle(const SitePair& pair, Vec2 patch) {
    const Vec2 to_tx = pair.tx - patch;
    const Vec2 to_rx = pair.rx - patch;
    if (norm(to_tx) == 0.0 || norm(to_rx) == 0.0) throw Error(ErrorKind::data, "patch at focus");
    if (pair.monostatic()) return 0.0;
    // atan2 keeps accuracy for nearly parallel directions.
    const double full = std::atan2(std::abs(cross(to_tx, to_rx)), dot(to_tx, to_rx));
    return 0.5 * full;
}

double bragg_frequency(const RadarConstants& c, double phi) {
    if (phi < 0.0 || phi >= kPi / 2.0) throw Error(ErrorKind::data, "forward-scatter geometry unsupported");
    return std::sqrt(c.gravity * std::cos(phi) / (kPi * c.wavelength));
}

double elliptical_velocity(const RadarConstants& c, double doppler_shift_hz, double phi) {
    if (phi < 0.0 || phi >= kPi / 2.0) throw Error(ErrorKind::data, "forward-scatter geometry unsupported");
    return c.wavelength * doppler_shift_hz / (2.0 * std::cos(phi));
}

double doppler_for_velocity(const RadarConstants& c, double velocity, double phi, int bragg_sign) {
    const double fb = bragg_frequency(c, phi);
    return (bragg_sign >= 0 ? fb : -fb) + 2.0 * velocity * std::cos(phi) / c.wavelength;
}

SteeringVector steering_vector(const ArrayGeometry& geom, const RadarConstants& c, double theta) {
    SteeringVector sv;
    sv.bearing = theta;
    sv.entries.resize(geom.size());
    const Vec2 u = geom.direction(theta);
    for (std::size_t n = 0; n < geom.size(); ++n) {
        const double phase = c.wavenumber * dot(u, geom.positions()[n]);
        sv.entries[n] = std::polar(1.0, phase);
    }
    return sv;
}

double bistatic_range(const SitePair& pair, int range_index, double range_resolution) {
    return 0.5 * pair.baseline() + range_index * range_resolution;
}

RadarCell cell_from_range_bearing(const SitePair& pair, const ArrayGeometry& geom, const RadarConstants& /*c*/,
                                  int range_index, double range_resolution, double theta) {
    const double R = bistatic_range(pair, range_index, range_resolution);
    const double half_baseline = 0.5 * pair.baseline();
    if (!(R > half_baseline)) throw Error(ErrorKind::data, "inside minimal range");

    // Ray p = rx + s*u meets |p - tx| + |p - rx| = 2R at
    // s = (4R^2 - |w|^2) / (4R + 2 w.u), with w = rx - tx.
    const Vec2 u = geom.direction(theta);
    const Vec2 w = pair.rx - pair.tx;
    const double s = (4.0 * R * R - dot(w, w)) / (4.0 * R + 2.0 * dot(w, u));

    RadarCell cell;
    cell.range_index = range_index;
    cell.bistatic_range = R;
    cell.bearing = theta;
    cell.patch_position = pair.rx + s * u;
    cell.bistatic_angle = bistatic_angle(pair, cell.patch_position);
    cell.valid = cell.bistatic_angle < kPi / 2.0 - kBistaticAngleMargin;
    return cell;
}

CellGrid make_cell_grid(const SitePair& pair, const ArrayGeometry& geom, const RadarConstants& c, int n_ranges,
                        double range_resolution, std::span<const double> bearings) {
    CellGrid grid;
    grid.n_ranges = n_ranges;
    grid.bearings.assign(bearings.begin(), bearings.end());
    grid.cells.reserve(static_cast<std::size_t>(n_ranges) * bearings.size());
    for (int r = 0; r < n_ranges; ++r) {
        for (double theta : bearings) {
            if (bistatic_range(pair, r, range_resolution) > 0.5 * pair.baseline()) {
                grid.cells.push_back(cell_from_range_bearing(pair, geom, c, r, range_resolution, theta));
            } else {
                RadarCell cell;
                cell.range_index = r;
                cell.bistatic_range = bistatic_range(pair, r, range_resolution);
                cell.bearing = theta;
                cell.patch_position = pair.rx;
                cell.valid = false;
                grid.cells.push_back(cell);
            }
        }
    }
    return grid;
}

namespace {
constexpr double kEarthRadius = 6371008.8;
}

Vec2 LocalFrame::to_local(double lat_deg, double lon_deg) const {
    const double lat0 = deg2rad(origin_lat_deg);
    return {kEarthRadius * deg2rad(lon_deg - origin_lon_deg) * std::cos(lat0),
            kEarthRadius * deg2rad(lat_deg - origin_lat_deg)};
}

void LocalFrame::to_geodetic(Vec2 p, double& lat_deg, double& lon_deg) const {
    const double lat0 = deg2rad(origin_lat_deg);
    lat_deg = origin_lat_deg + rad2deg(p.y / kEarthRadius);
    lon_deg = origin_lon_deg + rad2deg(p.x / (kEarthRadius * std::cos(lat0)));
}

}  // namespace bhfr
