// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "bhfr/fft.hpp"
#include "bhfr/types.hpp"

namespace bhfr {

/// Range-gated complex series, indexed (antenna, range cell, chirp).
struct ChirpCube {
    Array3<cplx> data;
    double chirp_duration = 0.26;
    std::uint64_t seed = 0;
    Digest config_hash{};

    std::size_t n_antennas() const { return data.dim0(); }
    std::size_t n_ranges() const { return data.dim1(); }
    std::size_t n_chirps() const { return data.dim2(); }

    friend bool operator==(const ChirpCube&, const ChirpCube&) = default;
};

/// Complex Doppler spectra, indexed (antenna, range cell, Doppler bin), in
/// center order (zero bin at n_bins/2).
struct RangeDopplerCube {
    Array3<cplx> spectra;
    double doppler_bin_hz = 0.0;
    double chirp_duration = 0.26;
    Window window = Window::hamming;
    Digest config_hash{};

    std::size_t n_antennas() const { return spectra.dim0(); }
    std::size_t n_ranges() const { return spectra.dim1(); }
    std::size_t n_bins() const { return spectra.dim2(); }
    std::size_t zero_bin() const { return bhfr::zero_bin(n_bins()); }
    double frequency(std::size_t bin) const { return bin_frequency(bin, n_bins(), doppler_bin_hz); }
};

}  // namespace bhfr
