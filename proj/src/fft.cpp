// SPDX-License-Identifier: Apache-2.0
#include "bhfr/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "bhfr/kernels.hpp"

namespace bhfr {

Window parse_window(const std::string& name) {
    if (name == "rectangular" || name == "rect" || name == "none" || name == "uniform") return Window::rectangular;
    if (name == "hamming") return Window::hamming;
    if (name == "hann" || name == "hanning") return Window::hann;
    throw Error(ErrorKind::usage, "unknown window '" + name + "'");
}

std::string window_name(Window w) {
    switch (w) {
        case Window::rectangular: return "rectangular";
        case Window::hamming: return "hamming";
        case Window::hann: return "hann";
    }
    return "rectangular";
}

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (n < 2 || w == Window::rectangular) return out;
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = std::cos(kTwoPi * static_cast<double>(i) / denom);
        out[i] = (w == Window::hamming) ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
    }
    return out;
}

namespace {

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer alloc_buffer(std::size_t n) {
    return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * std::max<std::size_t>(n, 1))));
}

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays with the planner's alignment is. All buffers come from fftw_malloc,
// so every execution takes the same codelet path regardless of caller.
class PlanCache {
public:
    fftw_plan get(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        auto in = alloc_buffer(n);
        auto out = alloc_buffer(n);
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
        if (p == nullptr) throw Error(ErrorKind::data, "FFT planning failed for length " + std::to_string(n));
        plans_.emplace(n, p);
        return p;
    }

    ~PlanCache() {
        for (auto& [n, p] : plans_) fftw_destroy_plan(p);
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

}  // namespace

void forward_dft(std::span<const cplx> in, std::span<cplx> out) {
    const std::size_t n = in.size();
    if (out.size() != n) throw Error(ErrorKind::usage, "forward_dft: size mismatch");
    if (n == 0) return;
    fftw_plan plan = plan_cache().get(n);
    auto a = alloc_buffer(n);
    auto b = alloc_buffer(n);
    std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(a.get()));
    fftw_execute_dft(plan, a.get(), b.get());
    const cplx* res = reinterpret_cast<const cplx*>(b.get());
    std::copy(res, res + n, out.begin());
}

void tapered_spectrum(std::span<const cplx> series, std::span<const double> taper, std::span<cplx> out) {
    const std::size_t n = series.size();
    if (taper.size() != n || out.size() != n) throw Error(ErrorKind::usage, "tapered_spectrum: size mismatch");
    if (n == 0) return;

    double wsum2 = 0.0;
    for (double w : taper) wsum2 += w * w;

    std::vector<cplx> tapered(n), spec(n);
    kernels::active().real_mul(taper.data(), series.data(), tapered.data(), n);
    forward_dft(tapered, spec);

    const double scale = wsum2 > 0.0 ? 1.0 / std::sqrt(wsum2) : 0.0;
    const std::size_t shift = zero_bin(n);
    for (std::size_t k = 0; k < n; ++k) out[(k + shift) % n] = spec[k] * scale;
}

}  // namespace bhfr
