// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bhfr/calibration.hpp"
#include "bhfr/cube.hpp"
#include "bhfr/geometry.hpp"
#include "bhfr/velocity_map.hpp"

namespace bhfr {

struct BearingGrid {
    std::vector<double> bearings;  // strictly increasing, radians
    double resolution = 0.0;

    /// Grid from min to max inclusive (degrees), e.g. uniform(-80, 80, 1).
    static BearingGrid uniform(double min_deg, double max_deg, double step_deg);
    std::size_t size() const { return bearings.size(); }
};

/// sum_n exp(+i K (u(theta) - u(theta_s)).d_n)
cplx array_factor(const ArrayGeometry& geom, const RadarConstants& c, double theta, double source_bearing);

/// Same with a real per-antenna taper.
cplx array_factor(const ArrayGeometry& geom, const RadarConstants& c, double theta, double source_bearing,
                  std::span<const double> taper);

/// Steered series X(range, bearing, chirp).
struct DirectionalSeries {
    Array3<cplx> data;
    std::vector<double> bearings;
    double chirp_duration = 0.26;
    Window taper = Window::rectangular;
    Digest calibration_hash{};
};

/// X(r, theta, t) = sum_n w_n a_n(theta) S~_n(r, t), where S~ is the cube with
/// the calibration removed (when given) and w the spatial taper.
DirectionalSeries beamform_series(const ChirpCube& cube, const ArrayGeometry& geom, const RadarConstants& c,
                                  const BearingGrid& grid, const CalibrationSolution* cal = nullptr,
                                  Window taper = Window::rectangular);

/// Doppler power per (range, bearing, bin), center-ordered bins.
struct DirectionalPsd {
    Array3<double> power;
    std::vector<double> bearings;
    double doppler_bin_hz = 0.0;

    std::size_t n_bins() const { return power.dim2(); }
    double frequency(std::size_t bin) const { return bin_frequency(bin, n_bins(), doppler_bin_hz); }
};

DirectionalPsd directional_psd(const DirectionalSeries& ds, Window window = Window::hamming);

struct BraggPeakParams {
    double band_hz = 0.5;          // half-width of the search band around each Bragg line
    double snr_threshold_db = 10;  // peak over median PSD of the cell
};

/// Dominant Bragg-region peak of one Doppler PSD row.
struct BraggPeak {
    bool found = false;
    int bragg_sign = 0;
    double frequency_hz = 0.0;  // parabolically refined
    double doppler_shift_hz = 0.0;
    double snr = 0.0;  // linear
};

BraggPeak find_bragg_peak(std::span<const double> psd_row, double bin_hz, double bragg_hz,
                          const BraggPeakParams& params);

VelocityMap bf_velocity_map(const DirectionalPsd& psd, const CellGrid& cells, const RadarConstants& c,
                            const BraggPeakParams& params = {});

}  // namespace bhfr
