// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "bhfr/doppler.hpp"
#include "bhfr/fft.hpp"
#include "bhfr/scene_sim.hpp"
#include "oracles.hpp"

using namespace bhfr;

namespace {

ChirpCube cube_from(const std::vector<cplx>& series, std::size_t antennas = 1) {
    ChirpCube c;
    c.data = Array3<cplx>(antennas, 1, series.size());
    for (std::size_t n = 0; n < antennas; ++n) std::copy(series.begin(), series.end(), c.data.row(n, 0).begin());
    return c;
}

}  // namespace

TEST_CASE("DFT agrees with the naive oracle") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (std::size_t n : {2u, 7u, 64u, 100u, 257u}) {
        std::vector<cplx> x(n);
        for (auto& v : x) v = {nd(rng), nd(rng)};
        std::vector<cplx> got(n);
        forward_dft(x, got);
        const auto want = oracle::naive_dft(x);
        double err = 0, mag = 0;
        for (std::size_t k = 0; k < n; ++k) {
            err = std::max(err, std::abs(got[k] - want[k]));
            mag = std::max(mag, std::abs(want[k]));
        }
        CHECK(err <= 1e-10 * mag);
    }
}

TEST_CASE("windows") {
    const auto h = make_window(Window::hamming, 5);
    CHECK(h[0] == doctest::Approx(0.08));
    CHECK(h[2] == doctest::Approx(1.0));
    CHECK(h[4] == doctest::Approx(0.08));
    const auto hn = make_window(Window::hann, 5);
    CHECK(hn[0] == doctest::Approx(0.0));
    CHECK(hn[1] == doctest::Approx(0.5));
    CHECK(make_window(Window::hamming, 1) == std::vector<double>{1.0});
    CHECK(parse_window("hanning") == Window::hann);
    CHECK_THROWS(parse_window("kaiser"));
    CHECK(window_name(Window::rectangular) == "rectangular");
}

TEST_CASE("DC and exact-bin tone") {
    const std::size_t T = 64;
    const auto dc = doppler_spectrum(cube_from(std::vector<cplx>(T, cplx(2, 1))), Window::rectangular);
    CHECK(dc.zero_bin() == 32);
    for (std::size_t k = 0; k < T; ++k)
        if (k != 32) CHECK(std::abs(dc.spectra(0, 0, k)) < 1e-12);

    std::vector<cplx> tone(T);
    const double dt = 0.26, bin = 1.0 / (T * dt);
    for (std::size_t t = 0; t < T; ++t) tone[t] = std::polar(1.0, 2 * kPi * 5 * bin * dt * static_cast<double>(t));
    auto c = cube_from(tone);
    c.chirp_duration = dt;
    const auto rd = doppler_spectrum(c, Window::rectangular);
    CHECK(rd.doppler_bin_hz == doctest::Approx(bin));
    for (std::size_t k = 0; k < T; ++k) {
        if (k == 37)
            CHECK(std::abs(rd.spectra(0, 0, k)) == doctest::Approx(std::sqrt(T)));
        else
            CHECK(std::abs(rd.spectra(0, 0, k)) < 1e-10);
    }
    CHECK(rd.frequency(37) == doctest::Approx(5 * bin));
}

TEST_CASE("bin spacing for the default chirp") {
    ChirpCube c;
    c.data = Array3<cplx>(1, 1, 2048);
    c.chirp_duration = 0.26;
    CHECK(doppler_spectrum(c).doppler_bin_hz == doctest::Approx(1.878e-3).epsilon(1e-3));
}

TEST_CASE("Parseval on windowed series") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t T = 32 + static_cast<std::size_t>(trial) * 7;
        std::vector<cplx> x(T);
        for (auto& v : x) v = {nd(rng), nd(rng)};
        for (Window w : {Window::rectangular, Window::hamming, Window::hann}) {
            const auto rd = doppler_spectrum(cube_from(x), w);
            const auto win = make_window(w, T);
            double sw2 = 0, e_in = 0, e_out = 0;
            for (std::size_t t = 0; t < T; ++t) {
                sw2 += win[t] * win[t];
                e_in += std::norm(win[t] * x[t]);
            }
            for (const auto& v : rd.spectra.row(0, 0)) e_out += std::norm(v);
            CHECK(std::abs(e_out - double(T) * e_in / sw2) <= 1e-9 * e_out);
        }
    }
}

TEST_CASE("segmentation") {
    CHECK(segment_hop(256, 0.5) == 128);
    CHECK(segment_count(1024, 256, 0.5) == 7);
    CHECK(segment_count(1000, 100, 0.0) == 10);

    SceneConfig s;
    s.n_ranges = 2;
    s.n_chirps = 256;
    s.noise_sigma = 1.0;
    const auto cube = synthesize(s);
    const auto seg = segment_spectra(cube, 64, 0.5);
    CHECK(seg.n_segments() == 7);
    CHECK(seg.n_antennas() == 12);
    CHECK(seg.n_bins() == 64);
    CHECK(seg.doppler_bin_hz == doctest::Approx(1.0 / (64 * 0.26)));

    const auto full = segment_spectra(cube, 256, 0.0, Window::hann);
    const auto rd = doppler_spectrum(cube, Window::hann);
    REQUIRE(full.n_segments() == 1);
    CHECK(full.segments[0] == rd.spectra);

    CHECK_THROWS(segment_spectra(cube, 512, 0.5));
    CHECK_THROWS(segment_spectra(cube, 64, 1.0));
    CHECK_THROWS(segment_spectra(cube, 1, 0.0));
}

TEST_CASE("omnidirectional PSD") {
    SceneConfig s;
    s.n_ranges = 5;
    s.n_chirps = 128;
    s.noise_sigma = 0.1;
    const auto rd = doppler_spectrum(synthesize(s));
    const auto psd = omnidirectional_psd(rd, 3);
    const auto it = std::max_element(psd.begin(), psd.end());
    const auto idx = static_cast<std::size_t>(it - psd.begin());
    CHECK(idx / rd.n_bins() == 0);
    CHECK(idx % rd.n_bins() == rd.zero_bin());
    for (double p : psd) CHECK(p >= 0.0);

    auto rotated = rd;
    for (auto& v : rotated.spectra.raw()) v *= std::polar(1.0, 0.7);
    const auto psd2 = omnidirectional_psd(rotated, 3);
    for (std::size_t i = 0; i < psd.size(); ++i) CHECK(psd2[i] == doctest::Approx(psd[i]).epsilon(1e-12));

    RangeDopplerCube zero = rd;
    for (auto& v : zero.spectra.raw()) v = {};
    for (double p : omnidirectional_psd(zero, 0)) CHECK(p == 0.0);
    CHECK_THROWS(omnidirectional_psd(rd, 12));
}

TEST_CASE("simulated tone lands on its bin on every antenna") {
    SceneConfig s;
    s.n_ranges = 3;
    s.n_chirps = 256;
    s.direct_amplitude = 0.0;
    Source src;
    src.range_index = 2;
    src.bearing = 0.3;
    src.doppler_hz = 11.0 / (256 * 0.26);
    s.sources.push_back(src);
    const auto rd = doppler_spectrum(synthesize(s), Window::rectangular);
    for (std::size_t n = 0; n < 12; ++n) {
        const auto row = rd.spectra.row(n, 2);
        double total = 0, peak = 0;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            total += std::norm(row[k]);
            if (std::norm(row[k]) > peak) {
                peak = std::norm(row[k]);
                arg = k;
            }
        }
        CHECK(arg == rd.zero_bin() + 11);
        CHECK(peak >= 0.99 * total);
    }
}
