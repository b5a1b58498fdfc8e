// SPDX-License-Identifier: Apache-2.0
#include "bhfr/calibration.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "bhfr/kernels.hpp"

namespace bhfr {

namespace {
// Bins closer than this to the zero bin belong to the taper's main lobe.
constexpr std::size_t kSnrGuardBins = 3;
constexpr std::size_t kSnrSpanBins = 32;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

void check_size(std::size_t n, const CalibrationSolution& cal) {
    if (cal.size() != n) throw Error(ErrorKind::data, "calibration antenna count mismatch");
    if (!cal.gains.empty() && cal.gains.size() != n) throw Error(ErrorKind::data, "calibration gain count mismatch");
}

}  // namespace

cplx correction_factor(const CalibrationSolution& cal, std::size_t n) {
    const double g = cal.gains.empty() || !(cal.gains[n] > 0.0) ? 1.0 : cal.gains[n];
    return std::polar(1.0 / g, -cal.corrections[n]);
}

bool DirectSignal::any_low_snr() const { return std::find(low_snr.begin(), low_snr.end(), true) != low_snr.end(); }

CalibrationSolution CalibrationSolution::zero(std::size_t n_antennas) {
    CalibrationSolution s;
    s.corrections.assign(n_antennas, 0.0);
    s.has_correction.assign(n_antennas, true);
    s.snr_db.assign(n_antennas, std::numeric_limits<double>::infinity());
    return s;
}

Digest CalibrationSolution::hash() const {
    const std::size_t nc = corrections.size() * sizeof(double), ng = gains.size() * sizeof(double);
    std::vector<std::uint8_t> bytes(nc + sizeof(int) + ng);
    std::memcpy(bytes.data(), corrections.data(), nc);
    std::memcpy(bytes.data() + nc, &reference, sizeof(int));
    if (ng) std::memcpy(bytes.data() + nc + sizeof(int), gains.data(), ng);
    return sha256(bytes);
}

DirectSignal extract_direct_signal(const RangeDopplerCube& rd, std::size_t range_cell, double snr_floor_db) {
    if (range_cell >= rd.n_ranges() || rd.n_bins() == 0) throw Error(ErrorKind::data, "direct-signal cell missing");
    const std::size_t N = rd.n_antennas(), B = rd.n_bins(), k0 = rd.zero_bin();

    DirectSignal d;
    d.snr_floor_db = snr_floor_db;
    d.values.resize(N);
    d.snr_db.resize(N);
    d.live.resize(N);
    d.low_snr.resize(N);

    std::vector<std::size_t> neighbours;
    for (std::size_t k = 0; k < B; ++k) {
        const std::size_t off = k > k0 ? k - k0 : k0 - k;
        if (off >= kSnrGuardBins && off < kSnrGuardBins + kSnrSpanBins) neighbours.push_back(k);
    }
    if (neighbours.empty())
        for (std::size_t k = 0; k < B; ++k)
            if (k != k0) neighbours.push_back(k);

    for (std::size_t n = 0; n < N; ++n) {
        const auto row = rd.spectra.row(n, range_cell);
        d.values[n] = row[k0];
        d.live[n] = kernels::active().energy(row.data(), B) > 0.0;
        std::vector<double> p;
        p.reserve(neighbours.size());
        for (std::size_t k : neighbours) p.push_back(std::norm(row[k]));
        const double floor = median(std::move(p));
        const double peak = std::norm(row[k0]);
        if (peak == 0.0)
            d.snr_db[n] = -std::numeric_limits<double>::infinity();
        else if (floor == 0.0)
            d.snr_db[n] = std::numeric_limits<double>::infinity();
        else
            d.snr_db[n] = 10.0 * std::log10(peak / floor);
        d.low_snr[n] = d.live[n] && d.snr_db[n] < snr_floor_db;
    }
    return d;
}

std::vector<double> theoretical_phases(const ArrayGeometry& geom, const RadarConstants& c, double source_bearing) {
    const Vec2 u = geom.direction(source_bearing);
    std::vector<double> phi(geom.size());
    for (std::size_t n = 0; n < geom.size(); ++n) phi[n] = -c.wavenumber * dot(u, geom.positions()[n]);
    return phi;
}

CalibrationSolution compute_corrections(const DirectSignal& direct, std::span<const double> theoretical,
                                        double source_bearing, const CorrectionOptions& options) {
    const std::size_t N = direct.values.size();
    if (theoretical.size() != N) throw Error(ErrorKind::data, "theoretical phase count mismatch");

    std::size_t ref = 0;
    if (direct.values[0] == cplx{}) {
        if (!options.allow_rereference) throw Error(ErrorKind::data, "reference antenna dead; re-reference");
        ref = N;
        for (std::size_t n = 1; n < N; ++n)
            if (direct.values[n] != cplx{}) {
                ref = n;
                break;
            }
        if (ref == N) throw Error(ErrorKind::data, "direct signal not found on any antenna");
    }

    CalibrationSolution s;
    s.reference = static_cast<int>(ref);
    s.source_bearing = source_bearing;
    s.corrections.assign(N, 0.0);
    s.has_correction.assign(N, false);
    s.snr_db = direct.snr_db;
    const cplx dref = direct.values[ref];
    if (options.equalize_amplitude) s.gains.assign(N, 1.0);
    for (std::size_t n = 0; n < N; ++n) {
        if (n == ref) {
            s.has_correction[n] = true;
            continue;
        }
        if (direct.values[n] == cplx{}) continue;
        if (options.equalize_amplitude) s.gains[n] = std::abs(direct.values[n] / dref);
        const double measured = std::arg(direct.values[n] / dref);
        s.corrections[n] = wrap_phase(measured - (theoretical[n] - theoretical[ref]));
        s.has_correction[n] = true;
    }
    return s;
}

void apply_calibration(std::span<cplx> antenna_values, const CalibrationSolution& cal) {
    check_size(antenna_values.size(), cal);
    for (std::size_t n = 0; n < antenna_values.size(); ++n) antenna_values[n] *= correction_factor(cal, n);
}

ChirpCube apply_calibration(const ChirpCube& cube, const CalibrationSolution& cal) {
    check_size(cube.n_antennas(), cal);
    ChirpCube out = cube;
    for (std::size_t n = 0; n < out.n_antennas(); ++n) {
        const cplx rot = correction_factor(cal, n);
        if (rot == cplx(1.0, 0.0)) continue;
        for (std::size_t r = 0; r < out.n_ranges(); ++r) {
            auto row = out.data.row(n, r);
            kernels::active().cscale(rot, row.data(), row.size());
        }
    }
    return out;
}

RangeDopplerCube apply_calibration(const RangeDopplerCube& rd, const CalibrationSolution& cal) {
    check_size(rd.n_antennas(), cal);
    RangeDopplerCube out = rd;
    for (std::size_t n = 0; n < out.n_antennas(); ++n) {
        const cplx rot = correction_factor(cal, n);
        if (rot == cplx(1.0, 0.0)) continue;
        for (std::size_t r = 0; r < out.n_ranges(); ++r) {
            auto row = out.spectra.row(n, r);
            kernels::active().cscale(rot, row.data(), row.size());
        }
    }
    return out;
}

CalibrationSolution compose(const CalibrationSolution& a, const CalibrationSolution& b) {
    check_size(a.size(), b);
    if (a.reference != b.reference) throw Error(ErrorKind::data, "cannot compose solutions with different references");
    CalibrationSolution out = a;
    for (std::size_t n = 0; n < a.size(); ++n) {
        out.corrections[n] = wrap_phase(a.corrections[n] + b.corrections[n]);
        out.has_correction[n] = a.has_correction[n] && b.has_correction[n];
    }
    if (!b.gains.empty()) {
        if (out.gains.empty()) out.gains.assign(a.size(), 1.0);
        for (std::size_t n = 0; n < a.size(); ++n) out.gains[n] *= b.gains[n];
    }
    return out;
}

std::vector<double> cross_validate(const CalibrationSolution& cal, const RangeDopplerCube& rd_second,
                                   const ArrayGeometry& geom, const RadarConstants& c, double second_bearing,
                                   std::size_t range_cell) {
    check_size(rd_second.n_antennas(), cal);
    const auto direct = extract_direct_signal(rd_second, range_cell);
    const auto phi = theoretical_phases(geom, c, second_bearing);
    const auto ref = static_cast<std::size_t>(cal.reference);
    if (direct.values[ref] == cplx{}) throw Error(ErrorKind::data, "reference antenna dead in second direct signal");
    std::vector<double> residual(cal.size(), 0.0);
    for (std::size_t n = 0; n < cal.size(); ++n) {
        if (!cal.has_correction[n] || direct.values[n] == cplx{}) {
            residual[n] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double measured = std::arg(direct.values[n] / direct.values[ref]);
        residual[n] = wrap_phase(measured - (phi[n] - phi[ref]) - cal.corrections[n]);
    }
    residual[ref] = 0.0;
    return residual;
}

}  // namespace bhfr
