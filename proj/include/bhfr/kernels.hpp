// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2/FMA variant selected once at runtime. Both variants compute the same
// expressions; they differ only in rounding (FMA contraction, summation order
// of horizontal reductions).

#include <complex>
#include <cstddef>

namespace bhfr::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    /// y[i] += alpha * x[i]
    void (*caxpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
    /// y[i] += alpha * conj(x[i])
    void (*caxpy_conj)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
    /// x[i] *= alpha
    void (*cscale)(cplx alpha, cplx* x, std::size_t n);
    /// out[i] = |x[i]|^2
    void (*power)(const cplx* x, double* out, std::size_t n);
    /// sum_i conj(x[i]) * y[i]
    cplx (*cdotc)(const cplx* x, const cplx* y, std::size_t n);
    /// sum_i |x[i]|^2
    double (*energy)(const cplx* x, std::size_t n);
    /// out[i] = w[i] * x[i] with real w
    void (*real_mul)(const double* w, const cplx* x, cplx* out, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table();

/// True when the running CPU supports AVX2 and FMA.
bool cpu_has_avx2();

/// Kernel table in use. Picks AVX2 when the CPU supports it, unless the
/// environment variable BHFR_FORCE_SCALAR is set to a non-empty value other than "0".
const KernelTable& active();

/// Overrides the selection for the whole process; intended for tests and benchmarks.
void force(Isa isa);

}  // namespace bhfr::kernels
