// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bhfr/cube.hpp"

namespace bhfr {

/// Short-time spectra over overlapping chirp segments, used as independent
/// samples for covariance estimation. Indexed (segment, antenna, range, bin).
struct SegmentedSpectra {
    std::vector<Array3<cplx>> segments;  // each (antenna, range, bin), center order
    std::size_t segment_length = 0;
    double overlap = 0.0;
    std::size_t hop = 0;
    double doppler_bin_hz = 0.0;
    Window window = Window::hamming;

    std::size_t n_segments() const { return segments.size(); }
    std::size_t n_antennas() const { return segments.empty() ? 0 : segments[0].dim0(); }
    std::size_t n_ranges() const { return segments.empty() ? 0 : segments[0].dim1(); }
    std::size_t n_bins() const { return segment_length; }
    double frequency(std::size_t bin) const { return bin_frequency(bin, segment_length, doppler_bin_hz); }
};

/// Hop in chirps for a segment length and overlap fraction (at least 1).
std::size_t segment_hop(std::size_t segment_length, double overlap);
/// floor((n_chirps - segment_length) / hop) + 1.
std::size_t segment_count(std::size_t n_chirps, std::size_t segment_length, double overlap);

RangeDopplerCube doppler_spectrum(const ChirpCube& cube, Window window = Window::hamming);

SegmentedSpectra segment_spectra(const ChirpCube& cube, std::size_t segment_length, double overlap,
                                 Window window = Window::hamming);

/// Squared modulus of one antenna's spectra, (range x bin) row-major.
std::vector<double> omnidirectional_psd(const RangeDopplerCube& rd, std::size_t antenna);

}  // namespace bhfr
