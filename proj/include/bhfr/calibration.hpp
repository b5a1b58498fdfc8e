// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "bhfr/cube.hpp"
#include "bhfr/geometry.hpp"

namespace bhfr {

inline constexpr double kDefaultDirectSnrFloorDb = 10.0;

/// Direct-path samples read from the zero-Doppler bin of one range cell.
struct DirectSignal {
    std::vector<cplx> values;
    std::vector<double> snr_db;  // +inf when the neighbourhood is exactly zero
    std::vector<bool> live;      // false for antennas with an identically zero cell
    std::vector<bool> low_snr;   // live antennas below the SNR floor
    double snr_floor_db = kDefaultDirectSnrFloorDb;

    bool any_low_snr() const;
};

/// Per-antenna phase corrections relative to a reference antenna.
///
/// corrections[n] = wrap(arg(D_n / D_ref) - phi_n + phi_ref), in (-pi, pi],
/// with corrections[reference] == 0. Antennas without a direct-signal
/// measurement carry has_correction == false and a zero correction.
struct CalibrationSolution {
    std::vector<double> corrections;
    std::vector<bool> has_correction;
    std::vector<double> snr_db;
    /// |D_n / D_ref| when amplitude equalization was requested, else empty.
    std::vector<double> gains;
    int reference = 0;
    double source_bearing = 0.0;
    Digest config_hash{};

    std::size_t size() const { return corrections.size(); }
    static CalibrationSolution zero(std::size_t n_antennas);
    /// Digest of the correction values, used to tag processed products.
    Digest hash() const;
};

DirectSignal extract_direct_signal(const RangeDopplerCube& rd, std::size_t range_cell = 0,
                                   double snr_floor_db = kDefaultDirectSnrFloorDb);

/// Expected direct-path phases -K u(theta_s).d_n (zero for antenna 0).
std::vector<double> theoretical_phases(const ArrayGeometry& geom, const RadarConstants& c, double source_bearing);

struct CorrectionOptions {
    /// Re-reference to the lowest-index live antenna when antenna 0 is dead
    /// instead of failing.
    bool allow_rereference = false;
    /// Also divide out |D_n / D_ref|. Off by default: antennas are assumed to share unit gain.
    bool equalize_amplitude = false;
};

CalibrationSolution compute_corrections(const DirectSignal& direct, std::span<const double> theoretical,
                                        double source_bearing, const CorrectionOptions& options = {});

/// Removes the measured gain error: antenna n is multiplied by exp(-i corrections[n]),
/// and divided by gains[n] when gains are present.
cplx correction_factor(const CalibrationSolution& cal, std::size_t antenna);
void apply_calibration(std::span<cplx> antenna_values, const CalibrationSolution& cal);
ChirpCube apply_calibration(const ChirpCube& cube, const CalibrationSolution& cal);
RangeDopplerCube apply_calibration(const RangeDopplerCube& rd, const CalibrationSolution& cal);

/// Sum of two solutions (A then B), wrapped; both must share the reference.
CalibrationSolution compose(const CalibrationSolution& a, const CalibrationSolution& b);

/// Residual of a solution derived from one transmitter against the direct
/// signal of another transmitter at bearing `second_bearing`:
/// wrap(arg(D2_n / D2_ref) - (phi_n - phi_ref)(second_bearing) - corrections[n]).
std::vector<double> cross_validate(const CalibrationSolution& cal, const RangeDopplerCube& rd_second,
                                   const ArrayGeometry& geom, const RadarConstants& c, double second_bearing,
                                   std::size_t range_cell = 0);

}  // namespace bhfr
