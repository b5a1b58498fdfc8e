// SPDX-License-Identifier: Apache-2.0
#include "bhfr/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define BHFR_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

namespace bhfr::kernels {

#if BHFR_HAVE_AVX2_KERNELS

// Per-function target attributes rather than a per-file -mavx2: inline code
// from shared headers must stay baseline so the linker can never pick an AVX2
// copy of it for callers running on older CPUs.
#define BHFR_AVX2 __attribute__((target("avx2,fma")))

namespace {

// Interleaved complex layout: one __m256d holds two complex numbers
// [re0, im0, re1, im1].

BHFR_AVX2 inline __m256d swap_ri(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

BHFR_AVX2 inline __m256d conj_mask() { return _mm256_set_pd(-0.0, 0.0, -0.0, 0.0); }

// alpha * x for two complex lanes; ar/ai are broadcast parts of alpha.
BHFR_AVX2 inline __m256d cmul2(__m256d ar, __m256d ai, __m256d x) {
    return _mm256_fmaddsub_pd(ar, x, _mm256_mul_pd(ai, swap_ri(x)));
}

BHFR_AVX2 void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const double* xs = reinterpret_cast<const double*>(x);
    double* ys = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
        const __m256d yv = _mm256_loadu_pd(ys + 2 * i);
        _mm256_storeu_pd(ys + 2 * i, _mm256_add_pd(yv, cmul2(ar, ai, xv)));
    }
    for (; i < n; ++i) {
        const double xr = xs[2 * i], xi = xs[2 * i + 1];
        ys[2 * i] += alpha.real() * xr - alpha.imag() * xi;
        ys[2 * i + 1] += alpha.real() * xi + alpha.imag() * xr;
    }
}

BHFR_AVX2 void caxpy_conj(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const double* xs = reinterpret_cast<const double*>(x);
    double* ys = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    const __m256d mask = conj_mask();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_xor_pd(_mm256_loadu_pd(xs + 2 * i), mask);
        const __m256d yv = _mm256_loadu_pd(ys + 2 * i);
        _mm256_storeu_pd(ys + 2 * i, _mm256_add_pd(yv, cmul2(ar, ai, xv)));
    }
    for (; i < n; ++i) {
        const double xr = xs[2 * i], xi = -xs[2 * i + 1];
        ys[2 * i] += alpha.real() * xr - alpha.imag() * xi;
        ys[2 * i + 1] += alpha.real() * xi + alpha.imag() * xr;
    }
}

BHFR_AVX2 void cscale(cplx alpha, cplx* x, std::size_t n) {
    double* xs = reinterpret_cast<double*>(x);
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
        _mm256_storeu_pd(xs + 2 * i, cmul2(ar, ai, xv));
    }
    for (; i < n; ++i) {
        const double xr = xs[2 * i], xi = xs[2 * i + 1];
        xs[2 * i] = alpha.real() * xr - alpha.imag() * xi;
        xs[2 * i + 1] = alpha.real() * xi + alpha.imag() * xr;
    }
}

BHFR_AVX2 void power(const cplx* x, double* out, std::size_t n) {
    const double* xs = reinterpret_cast<const double*>(x);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(xs + 2 * i);
        const __m256d b = _mm256_loadu_pd(xs + 2 * i + 4);
        // hadd yields [p0, p2, p1, p3]
        const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
        _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0b11011000));
    }
    for (; i < n; ++i) out[i] = xs[2 * i] * xs[2 * i] + xs[2 * i + 1] * xs[2 * i + 1];
}

BHFR_AVX2 cplx cdotc(const cplx* x, const cplx* y, std::size_t n) {
    const double* xs = reinterpret_cast<const double*>(x);
    const double* ys = reinterpret_cast<const double*>(y);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
        const __m256d yv = _mm256_loadu_pd(ys + 2 * i);
        acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
        acc_im = _mm256_fmadd_pd(xv, swap_ri(yv), acc_im);
    }
    alignas(32) double re[4], im[4];
    _mm256_store_pd(re, acc_re);
    _mm256_store_pd(im, acc_im);
    double sr = (re[0] + re[1]) + (re[2] + re[3]);
    double si = (im[0] - im[1]) + (im[2] - im[3]);
    for (; i < n; ++i) {
        const double xr = xs[2 * i], xi = xs[2 * i + 1];
        const double yr = ys[2 * i], yi = ys[2 * i + 1];
        sr += xr * yr + xi * yi;
        si += xr * yi - xi * yr;
    }
    return {sr, si};
}

BHFR_AVX2 double energy(const cplx* x, std::size_t n) {
    const double* xs = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    alignas(32) double a[4];
    _mm256_store_pd(a, acc);
    double s = (a[0] + a[1]) + (a[2] + a[3]);
    for (; i < n; ++i) s += xs[2 * i] * xs[2 * i] + xs[2 * i + 1] * xs[2 * i + 1];
    return s;
}

BHFR_AVX2 void real_mul(const double* w, const cplx* x, cplx* out, std::size_t n) {
    const double* xs = reinterpret_cast<const double*>(x);
    double* os = reinterpret_cast<double*>(out);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d wv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w + i)), 0b01010000);
        _mm256_storeu_pd(os + 2 * i, _mm256_mul_pd(wv, _mm256_loadu_pd(xs + 2 * i)));
    }
    for (; i < n; ++i) {
        os[2 * i] = w[i] * xs[2 * i];
        os[2 * i + 1] = w[i] * xs[2 * i + 1];
    }
}

constexpr KernelTable kAvx2{Isa::avx2, "avx2", caxpy, caxpy_conj, cscale, power, cdotc, energy, real_mul};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

const KernelTable* avx2_table() { return nullptr; }
bool cpu_has_avx2() { return false; }

#endif

}  // namespace bhfr::kernels
