// SPDX-License-Identifier: Apache-2.0
#include "bhfr/doppler.hpp"

#include <cmath>

#include "bhfr/kernels.hpp"
#include "bhfr/parallel.hpp"

namespace bhfr {

std::size_t segment_hop(std::size_t segment_length, double overlap) {
    const auto hop = static_cast<std::size_t>(std::floor(static_cast<double>(segment_length) * (1.0 - overlap) + 1e-9));
    return hop == 0 ? 1 : hop;
}

std::size_t segment_count(std::size_t n_chirps, std::size_t segment_length, double overlap) {
    if (segment_length == 0 || segment_length > n_chirps) return 0;
    return (n_chirps - segment_length) / segment_hop(segment_length, overlap) + 1;
}

RangeDopplerCube doppler_spectrum(const ChirpCube& cube, Window window) {
    const std::size_t N = cube.n_antennas(), R = cube.n_ranges(), T = cube.n_chirps();
    if (T < 2) throw Error(ErrorKind::data, "Doppler processing needs at least 2 chirps");

    RangeDopplerCube rd;
    rd.spectra = Array3<cplx>(N, R, T);
    rd.doppler_bin_hz = 1.0 / (static_cast<double>(T) * cube.chirp_duration);
    rd.chirp_duration = cube.chirp_duration;
    rd.window = window;
    rd.config_hash = cube.config_hash;

    const auto taper = make_window(window, T);
    parallel_for(N * R, [&](std::size_t i) {
        const std::size_t n = i / R, r = i % R;
        tapered_spectrum(cube.data.row(n, r), taper, rd.spectra.row(n, r));
    });
    return rd;
}

SegmentedSpectra segment_spectra(const ChirpCube& cube, std::size_t segment_length, double overlap,
                                 Window window) {
    const std::size_t N = cube.n_antennas(), R = cube.n_ranges(), T = cube.n_chirps();
    if (segment_length < 2) throw Error(ErrorKind::usage, "segment length must be at least 2");
    if (segment_length > T) throw Error(ErrorKind::usage, "segment length exceeds chirp count");
    if (overlap < 0.0 || overlap >= 1.0) throw Error(ErrorKind::usage, "overlap must be in [0, 1)");

    SegmentedSpectra out;
    out.segment_length = segment_length;
    out.overlap = overlap;
    out.hop = segment_hop(segment_length, overlap);
    out.doppler_bin_hz = 1.0 / (static_cast<double>(segment_length) * cube.chirp_duration);
    out.window = window;
    const std::size_t S = segment_count(T, segment_length, overlap);
    out.segments.assign(S, Array3<cplx>(N, R, segment_length));

    const auto taper = make_window(window, segment_length);
    parallel_for(S * N * R, [&](std::size_t i) {
        const std::size_t s = i / (N * R), n = (i / R) % N, r = i % R;
        const auto series = cube.data.row(n, r).subspan(s * out.hop, segment_length);
        tapered_spectrum(series, taper, out.segments[s].row(n, r));
    });
    return out;
}

std::vector<double> omnidirectional_psd(const RangeDopplerCube& rd, std::size_t antenna) {
    if (antenna >= rd.n_antennas()) throw Error(ErrorKind::usage, "antenna index out of range");
    const std::size_t R = rd.n_ranges(), B = rd.n_bins();
    std::vector<double> psd(R * B);
    for (std::size_t r = 0; r < R; ++r) kernels::active().power(rd.spectra.row(antenna, r).data(), psd.data() + r * B, B);
    return psd;
}

}  // namespace bhfr
