// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "bhfr/beamform.hpp"
#include "bhfr/scene_sim.hpp"
#include "oracles.hpp"

using namespace bhfr;

namespace {
const RadarConstants kC = RadarConstants::from_frequency(16.150e6);

double hamming_sidelobe_db(const ArrayGeometry& geom, std::span<const double> w) {
    const double main = std::norm(array_factor(geom, kC, 0.0, 0.0, w));
    double sidelobe = 0.0, prev = main;
    bool past_null = false;
    for (double t = 1e-4; t < kPi / 2; t += 1e-4) {
        const double p = std::norm(array_factor(geom, kC, t, 0.0, w));
        if (!past_null && p > prev) past_null = true;
        if (past_null) sidelobe = std::max(sidelobe, p);
        prev = p;
    }
    return 10 * std::log10(sidelobe / main);
}

std::size_t argmax_bearing(const DirectionalPsd& psd, std::size_t r, std::size_t k) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < psd.bearings.size(); ++g)
        if (psd.power(r, g, k) > psd.power(r, best, k)) best = g;
    return best;
}
}  // namespace

TEST_CASE("bearing grid") {
    const auto g = BearingGrid::uniform(-80, 80, 1);
    CHECK(g.size() == 161);
    CHECK(rad2deg(g.bearings.front()) == doctest::Approx(-80));
    CHECK(rad2deg(g.bearings.back()) == doctest::Approx(80));
    CHECK_THROWS(BearingGrid::uniform(-90, 80, 1));
    CHECK_THROWS(BearingGrid::uniform(10, 0, 1));
}

TEST_CASE("array factor") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-30, 30), th(-1.5, 1.5);
    for (int i = 0; i < 50; ++i) {
        std::vector<Vec2> pos(7);
        for (std::size_t n = 1; n < pos.size(); ++n) pos[n] = {u(rng), u(rng)};
        const ArrayGeometry geom(pos, th(rng));
        const double ts = th(rng);
        CHECK(std::abs(array_factor(geom, kC, ts, ts) - cplx(7, 0)) < 1e-10);
        for (int j = 0; j < 20; ++j) CHECK(std::abs(array_factor(geom, kC, th(rng), ts)) <= 7 + 1e-12);
        // equals a(theta) . conj(a(theta_s))
        const double t = th(rng);
        const auto a = steering_vector(geom, kC, t), as = steering_vector(geom, kC, ts);
        cplx dotp{};
        for (std::size_t n = 0; n < 7; ++n) dotp += a.entries[n] * std::conj(as.entries[n]);
        CHECK(std::abs(array_factor(geom, kC, t, ts) - dotp) < 1e-10);
    }
}

TEST_CASE("first-null beamwidth and Hamming sidelobes") {
    const double d = 0.45 * kC.wavelength;
    std::vector<double> x(12);
    for (std::size_t n = 0; n < 12; ++n) x[n] = static_cast<double>(n) * d;
    // main lobe from peak to first null, against lambda / (N d)
    const double width = oracle::first_null_width(x, kC.wavenumber, 0.0, 1e-5);
    CHECK(width / 2 == doctest::Approx(kC.wavelength / (12 * d)).epsilon(0.05));
    CHECK(width / 2 == doctest::Approx(0.1852).epsilon(0.05));

    const auto geom = ArrayGeometry::linear(12, d, 0.0);
    // library AF on the same fine grid matches the oracle magnitude
    for (double t = -1.5; t < 1.5; t += 0.01)
        CHECK(std::abs(array_factor(geom, kC, t, 0.0)) ==
              doctest::Approx(oracle::linear_af_magnitude(x, kC.wavenumber, t, 0.0)).epsilon(1e-9));

    const auto w = make_window(Window::hamming, 12);
    const auto ow = oracle::hamming(12);
    for (std::size_t n = 0; n < 12; ++n) CHECK(w[n] == doctest::Approx(ow[n]).epsilon(1e-12));
    const double level = oracle::peak_sidelobe_db(x, kC.wavenumber, ow, 1e-4);
    CHECK(hamming_sidelobe_db(geom, w) == doctest::Approx(level).epsilon(1e-6));
    CHECK(level == doctest::Approx(-37.40).epsilon(0.002));
    const std::vector<double> flat(12, 1.0);
    CHECK(hamming_sidelobe_db(geom, flat) == doctest::Approx(-13.06).epsilon(0.002));
}

// A 12-element symmetric Hamming taper reaches -37.4 dB, not -40 dB.
TEST_CASE("Hamming sidelobe at or below -40 dB" * doctest::should_fail()) {
    const auto geom = ArrayGeometry::linear(12, 0.45 * kC.wavelength, 0.0);
    CHECK(hamming_sidelobe_db(geom, make_window(Window::hamming, 12)) <= -40.0);
}

TEST_CASE("beamformed plane wave equals the array factor") {
    SceneConfig s;
    s.n_ranges = 2;
    s.n_chirps = 8;
    s.direct_amplitude = 0.0;
    Source src;
    src.range_index = 1;
    src.bearing = deg2rad(12);
    s.sources.push_back(src);
    const auto cube = synthesize(s);
    const auto grid = BearingGrid::uniform(-60, 60, 3);
    const auto ds = beamform_series(cube, s.array, s.constants, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const cplx af = array_factor(s.array, s.constants, grid.bearings[g], src.bearing);
        CHECK(std::abs(ds.data(1, g, 0) - af) < 1e-10);
    }
    CHECK(std::abs(ds.data(1, 24, 3)) == doctest::Approx(12.0));
}

TEST_CASE("calibration restores the beam") {
    SceneConfig s;
    s.n_ranges = 3;
    s.n_chirps = 128;
    s.perturbations = uniform_phase_perturbations(12, deg2rad(50), 1);
    Source src;
    src.range_index = 2;
    src.bearing = deg2rad(20);
    src.doppler_hz = 40.0 / (128 * 0.26);
    s.sources.push_back(src);
    const auto cube = synthesize(s);
    CalibrationSolution cal = CalibrationSolution::zero(12);
    for (std::size_t n = 0; n < 12; ++n)
        cal.corrections[n] = wrap_phase(s.perturbations[n].phase - s.perturbations[0].phase);
    const auto grid = BearingGrid::uniform(-80, 80, 1);
    const auto k = static_cast<std::size_t>(64 + 40);
    const auto p_cal = directional_psd(beamform_series(cube, s.array, s.constants, grid, &cal), Window::rectangular);
    CHECK(argmax_bearing(p_cal, 2, k) == 100);
    CHECK(p_cal.power(2, 100, k) == doctest::Approx(144.0 * 128).epsilon(1e-9));
    auto bad = cal;
    bad.corrections.resize(5);
    CHECK_THROWS(beamform_series(cube, s.array, s.constants, grid, &bad));
}

TEST_CASE("Bragg peak search") {
    const std::size_t B = 512;
    const double bin = 0.01, fb = 0.41;
    std::vector<double> psd(B, 1.0);
    const std::size_t k = zero_bin(B) + 47;  // +0.47 Hz
    psd[k] = 1e4;
    psd[k - 1] = 1e3;
    psd[k + 1] = 1e3;
    BraggPeakParams p;
    auto peak = find_bragg_peak(psd, bin, fb, p);
    REQUIRE(peak.found);
    CHECK(peak.bragg_sign == 1);
    CHECK(peak.frequency_hz == doctest::Approx(0.47));
    CHECK(peak.doppler_shift_hz == doctest::Approx(0.06));

    std::vector<double> flat(B, 1.0);
    CHECK_FALSE(find_bragg_peak(flat, bin, fb, p).found);

    psd[zero_bin(B) - 30] = 1e6;  // stronger line near -f_B
    peak = find_bragg_peak(psd, bin, fb, p);
    CHECK(peak.bragg_sign == -1);
    CHECK(peak.doppler_shift_hz == doctest::Approx(-0.30 + 0.41));
}

TEST_CASE("BF velocity map round trip") {
    SceneConfig s;
    s.n_ranges = 10;
    s.n_chirps = 512;
    s.noise_sigma = 0.05;
    const double velocities[2] = {0.35, -0.2};
    const double bearings[2] = {-30, 25};
    for (int i = 0; i < 2; ++i) {
        const auto cell = cell_from_range_bearing(s.site, s.array, s.constants, 7, s.range_resolution,
                                                  deg2rad(bearings[i]));
        Source src;
        src.range_index = 7;
        src.bearing = deg2rad(bearings[i]);
        src.doppler_hz = doppler_for_velocity(s.constants, velocities[i], cell.bistatic_angle, i == 0 ? 1 : -1);
        s.sources.push_back(src);
    }
    const auto cube = synthesize(s);
    const auto grid = BearingGrid::uniform(-80, 80, 1);
    const auto cells = make_cell_grid(s.site, s.array, s.constants, 10, s.range_resolution, grid.bearings);
    const auto psd = directional_psd(beamform_series(cube, s.array, s.constants, grid, nullptr, Window::hamming));
    const auto map = bf_velocity_map(psd, cells, s.constants);
    for (int i = 0; i < 2; ++i) {
        const auto g = map.nearest_bearing(deg2rad(bearings[i]));
        const auto& c = map.at(7, g);
        REQUIRE(c.filled);
        const double phi = cells.at(7, g).bistatic_angle;
        const double bin_v = s.constants.wavelength * psd.doppler_bin_hz / (2 * std::cos(phi));
        CHECK(std::abs(c.velocity - velocities[i]) <= bin_v);
    }
    std::size_t noise_fills = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) noise_fills += map.at(4, g).filled;
    CHECK(noise_fills * 10 <= grid.size() * 3);

    SceneConfig quiet = s;
    quiet.noise_sigma = 0.0;
    const auto qmap = bf_velocity_map(
        directional_psd(beamform_series(synthesize(quiet), s.array, s.constants, grid, nullptr, Window::hamming)),
        cells, s.constants);
    for (std::size_t g = 0; g < grid.size(); ++g) CHECK_FALSE(qmap.at(4, g).filled);
}
