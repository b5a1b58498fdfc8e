// SPDX-License-Identifier: Apache-2.0
#include "bhfr/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bhfr/kernels.hpp"
#include "bhfr/parallel.hpp"

namespace bhfr {

BearingGrid BearingGrid::uniform(double min_deg, double max_deg, double step_deg) {
    if (!(step_deg > 0.0) || max_deg < min_deg) throw Error(ErrorKind::usage, "invalid bearing grid");
    if (min_deg <= -90.0 || max_deg >= 90.0) throw Error(ErrorKind::usage, "bearing grid must stay within +/-90 degrees");
    BearingGrid g;
    g.resolution = deg2rad(step_deg);
    const auto n = static_cast<std::size_t>(std::floor((max_deg - min_deg) / step_deg + 1e-9)) + 1;
    g.bearings.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.bearings.push_back(deg2rad(min_deg + static_cast<double>(i) * step_deg));
    return g;
}

cplx array_factor(const ArrayGeometry& geom, const RadarConstants& c, double theta, double source_bearing) {
    const std::vector<double> ones(geom.size(), 1.0);
    return array_factor(geom, c, theta, source_bearing, ones);
}

cplx array_factor(const ArrayGeometry& geom, const RadarConstants& c, double theta, double source_bearing,
                  std::span<const double> taper) {
    const Vec2 du = geom.direction(theta) - geom.direction(source_bearing);
    cplx af{};
    for (std::size_t n = 0; n < geom.size(); ++n)
        af += taper[n] * std::polar(1.0, c.wavenumber * dot(du, geom.positions()[n]));
    return af;
}

DirectionalSeries beamform_series(const ChirpCube& cube, const ArrayGeometry& geom, const RadarConstants& c,
                                  const BearingGrid& grid, const CalibrationSolution* cal, Window taper) {
    const std::size_t N = cube.n_antennas(), R = cube.n_ranges(), T = cube.n_chirps(), G = grid.size();
    if (geom.size() != N) throw Error(ErrorKind::data, "array and cube disagree on antenna count");
    if (cal != nullptr && (cal->size() != N || (!cal->gains.empty() && cal->gains.size() != N)))
        throw Error(ErrorKind::data, "calibration antenna count mismatch");

    // coef(g, n) = w_n a_n(theta_g) exp(-i dphi_n)
    const auto w = make_window(taper, N);
    std::vector<cplx> coef(G * N);
    for (std::size_t g = 0; g < G; ++g) {
        const auto a = steering_vector(geom, c, grid.bearings[g]);
        for (std::size_t n = 0; n < N; ++n) {
            cplx k = w[n] * a.entries[n];
            if (cal != nullptr) k *= correction_factor(*cal, n);
            coef[g * N + n] = k;
        }
    }

    DirectionalSeries ds;
    ds.data = Array3<cplx>(R, G, T);
    ds.bearings = grid.bearings;
    ds.chirp_duration = cube.chirp_duration;
    ds.taper = taper;
    if (cal != nullptr) ds.calibration_hash = cal->hash();

    const auto& k = kernels::active();
    parallel_for(R * G, [&](std::size_t i) {
        const std::size_t r = i / G, g = i % G;
        auto out = ds.data.row(r, g);
        for (std::size_t n = 0; n < N; ++n) k.caxpy(coef[g * N + n], cube.data.row(n, r).data(), out.data(), T);
    });
    return ds;
}

DirectionalPsd directional_psd(const DirectionalSeries& ds, Window window) {
    const std::size_t R = ds.data.dim0(), G = ds.data.dim1(), T = ds.data.dim2();
    if (T < 2) throw Error(ErrorKind::data, "Doppler processing needs at least 2 chirps");
    DirectionalPsd out;
    out.power = Array3<double>(R, G, T);
    out.bearings = ds.bearings;
    out.doppler_bin_hz = 1.0 / (static_cast<double>(T) * ds.chirp_duration);
    const auto taper = make_window(window, T);
    parallel_for(R * G, [&](std::size_t i) {
        const std::size_t r = i / G, g = i % G;
        std::vector<cplx> spec(T);
        tapered_spectrum(ds.data.row(r, g), taper, spec);
        kernels::active().power(spec.data(), out.power.row(r, g).data(), T);
    });
    return out;
}

namespace {

double median_of(std::span<const double> v) {
    std::vector<double> tmp(v.begin(), v.end());
    if (tmp.empty()) return 0.0;
    const std::size_t mid = tmp.size() / 2;
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid), tmp.end());
    double m = tmp[mid];
    if (tmp.size() % 2 == 0) m = 0.5 * (m + *std::max_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid)));
    return m;
}

// Vertex offset of the parabola through three log-power samples, in bins.
double parabolic_offset(double lm, double l0, double lp) {
    const double denom = lm - 2.0 * l0 + lp;
    if (!(denom < 0.0)) return 0.0;
    return std::clamp(0.5 * (lm - lp) / denom, -0.5, 0.5);
}

}  // namespace

BraggPeak find_bragg_peak(std::span<const double> psd, double bin_hz, double bragg_hz, const BraggPeakParams& params) {
    const std::size_t B = psd.size();
    BraggPeak best;
    if (B < 3) return best;
    const double floor = median_of(psd);

    std::size_t best_bin = 0;
    double best_power = 0.0;
    for (int sign : {+1, -1}) {
        const double line = sign * bragg_hz;
        for (std::size_t k = 0; k < B; ++k) {
            const double f = bin_frequency(k, B, bin_hz);
            if (std::abs(f - line) > params.band_hz) continue;
            if (psd[k] > best_power) {
                best_power = psd[k];
                best_bin = k;
                best.bragg_sign = sign;
            }
        }
    }
    if (best_power <= 0.0) return best;

    best.snr = floor > 0.0 ? best_power / floor : std::numeric_limits<double>::infinity();
    if (10.0 * std::log10(best.snr) < params.snr_threshold_db) return best;

    double offset = 0.0;
    if (best_bin > 0 && best_bin + 1 < B && psd[best_bin - 1] > 0.0 && psd[best_bin + 1] > 0.0)
        offset = parabolic_offset(std::log(psd[best_bin - 1]), std::log(psd[best_bin]), std::log(psd[best_bin + 1]));
    best.frequency_hz = bin_frequency(best_bin, B, bin_hz) + offset * bin_hz;
    best.doppler_shift_hz = best.frequency_hz - best.bragg_sign * bragg_hz;
    best.found = true;
    return best;
}

VelocityMap bf_velocity_map(const DirectionalPsd& psd, const CellGrid& cells, const RadarConstants& c,
                            const BraggPeakParams& params) {
    if (psd.power.dim0() != static_cast<std::size_t>(cells.n_ranges) || psd.power.dim1() != cells.bearings.size())
        throw Error(ErrorKind::data, "PSD grid does not match the radar cells");
    VelocityMap map = VelocityMap::empty_like(cells, "bf");
    const std::size_t G = cells.bearings.size();
    parallel_for(static_cast<std::size_t>(cells.n_ranges) * G, [&](std::size_t i) {
        const auto r = static_cast<int>(i / G);
        const std::size_t g = i % G;
        const RadarCell& cell = cells.at(r, g);
        if (!cell.valid) return;
        const double fb = bragg_frequency(c, cell.bistatic_angle);
        const auto peak = find_bragg_peak(psd.power.row(static_cast<std::size_t>(r), g), psd.doppler_bin_hz, fb, params);
        if (!peak.found) return;
        auto& out = map.at(r, g);
        out.velocity = elliptical_velocity(c, peak.doppler_shift_hz, cell.bistatic_angle);
        out.weight = 1.0;
        out.n_contributions = 1;
        out.filled = true;
        out.peak = peak.snr;
    });
    return map;
}

}  // namespace bhfr
