// SPDX-License-Identifier: Apache-2.0
#include "bhfr/kernels.hpp"

namespace bhfr::kernels {
namespace {

// Explicit real arithmetic keeps the reference free of the NaN/Inf recovery
// branches in std::complex operator*.
inline void cmul_acc(double ar, double ai, double xr, double xi, double& yr, double& yi) {
    yr += ar * xr - ai * xi;
    yi += ar * xi + ai * xr;
}

void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const double ar = alpha.real(), ai = alpha.imag();
    for (std::size_t i = 0; i < n; ++i) {
        double yr = y[i].real(), yi = y[i].imag();
        cmul_acc(ar, ai, x[i].real(), x[i].imag(), yr, yi);
        y[i] = {yr, yi};
    }
}

void caxpy_conj(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const double ar = alpha.real(), ai = alpha.imag();
    for (std::size_t i = 0; i < n; ++i) {
        double yr = y[i].real(), yi = y[i].imag();
        cmul_acc(ar, ai, x[i].real(), -x[i].imag(), yr, yi);
        y[i] = {yr, yi};
    }
}

void cscale(cplx alpha, cplx* x, std::size_t n) {
    const double ar = alpha.real(), ai = alpha.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        x[i] = {ar * xr - ai * xi, ar * xi + ai * xr};
    }
}

void power(const cplx* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
}

cplx cdotc(const cplx* x, const cplx* y, std::size_t n) {
    double sr = 0.0, si = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        sr += xr * yr + xi * yi;
        si += xr * yi - xi * yr;
    }
    return {sr, si};
}

double energy(const cplx* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void real_mul(const double* w, const cplx* x, cplx* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = {w[i] * x[i].real(), w[i] * x[i].imag()};
}

constexpr KernelTable kScalar{Isa::scalar, "scalar", caxpy, caxpy_conj, cscale, power, cdotc, energy, real_mul};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace bhfr::kernels
