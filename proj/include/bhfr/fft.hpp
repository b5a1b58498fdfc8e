// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "bhfr/types.hpp"

namespace bhfr {

enum class Window { rectangular, hamming, hann };

Window parse_window(const std::string& name);
std::string window_name(Window w);
/// Symmetric taper of length n (n == 1 gives {1}).
std::vector<double> make_window(Window w, std::size_t n);

/// Forward DFT, X[k] = sum_t x[t] exp(-2 pi i k t / n), unnormalized,
/// natural (unshifted) bin order. Thread-safe; plans are cached per length.
void forward_dft(std::span<const cplx> in, std::span<cplx> out);

/// Index of the zero-frequency bin in center-ordered output.
inline std::size_t zero_bin(std::size_t n) { return n / 2; }

/// Frequency of center-ordered bin k.
inline double bin_frequency(std::size_t k, std::size_t n, double bin_hz) {
    return (static_cast<double>(k) - static_cast<double>(zero_bin(n))) * bin_hz;
}

/// Tapered, energy-normalized spectrum in center order:
///   out[k'] = (1/sqrt(sum w^2)) * sum_t w[t] x[t] exp(-2 pi i k t / n),
/// with k' = k + n/2 (mod n) so the zero bin sits at index n/2 and, for even n,
/// the Nyquist bin at index 0. For a rectangular taper sum |out|^2 == sum |x|^2.
void tapered_spectrum(std::span<const cplx> series, std::span<const double> taper, std::span<cplx> out);

}  // namespace bhfr
