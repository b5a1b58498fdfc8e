// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "bhfr/calibration.hpp"
#include "bhfr/doppler.hpp"
#include "bhfr/scene_sim.hpp"

using namespace bhfr;

namespace {

SceneConfig direct_only(std::uint64_t pert_seed) {
    SceneConfig s;
    s.n_ranges = 2;
    s.n_chirps = 64;
    s.array = ArrayGeometry::linear(12, 0.45 * s.constants.wavelength, deg2rad(160));
    s.site = {{-20000, -22000}, {0, 0}};
    if (pert_seed) s.perturbations = uniform_phase_perturbations(12, deg2rad(50), pert_seed);
    return s;
}

CalibrationSolution solve(const SceneConfig& s, const ChirpCube& cube, CorrectionOptions opts = {}) {
    const auto rd = doppler_spectrum(cube);
    const double th = direct_path_bearing(s.site, s.array);
    return compute_corrections(extract_direct_signal(rd), theoretical_phases(s.array, s.constants, th), th, opts);
}

}  // namespace

TEST_CASE("theoretical phases") {
    SceneConfig s;
    const auto phi0 = theoretical_phases(s.array, s.constants, 0.0);
    for (double p : phi0) CHECK(std::abs(p) < 1e-12);
    const auto phi = theoretical_phases(s.array, s.constants, deg2rad(30));
    CHECK(phi[0] == 0.0);
    // K = 0.3385 rad/m, d = 8.353 m, 30 deg
    CHECK(phi[1] == doctest::Approx(-1.4138).epsilon(1e-4));
    const double kd = s.constants.wavenumber * 0.45 * s.constants.wavelength;
    for (std::size_t n = 0; n < 12; ++n) CHECK(phi[n] == doctest::Approx(-double(n) * kd * 0.5).epsilon(1e-12));
}

TEST_CASE("unperturbed scene gives zero corrections") {
    const auto s = direct_only(0);
    const auto cal = solve(s, synthesize(s));
    CHECK(cal.reference == 0);
    for (double c : cal.corrections) CHECK(std::abs(c) < 1e-10);
}

TEST_CASE("exact recovery of injected perturbations") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = direct_only(seed);
        const auto cal = solve(s, synthesize(s));
        CHECK(cal.corrections[0] == 0.0);
        for (std::size_t n = 0; n < 12; ++n) {
            const double truth = wrap_phase(s.perturbations[n].phase - s.perturbations[0].phase);
            CHECK(std::abs(wrap_phase(cal.corrections[n] - truth)) <= 1e-10);
            CHECK(cal.corrections[n] > -kPi);
            CHECK(cal.corrections[n] <= kPi);
        }
    }
}

TEST_CASE("closed loop is idempotent and composes") {
    const auto s = direct_only(7);
    const auto cube = synthesize(s);
    const auto cal = solve(s, cube);
    const auto again = solve(s, apply_calibration(cube, cal));
    for (double c : again.corrections) CHECK(std::abs(c) < 1e-10);

    auto zero = CalibrationSolution::zero(12);
    CHECK(apply_calibration(cube, zero) == cube);

    auto half = cal;
    for (auto& c : half.corrections) c *= 0.5;
    const auto both = compose(half, half);
    const auto a = apply_calibration(apply_calibration(cube, half), half);
    const auto b = apply_calibration(cube, both);
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(std::abs(a.data.raw()[i] - b.data.raw()[i]) < 1e-9);

    std::vector<cplx> v(12, cplx(1, 0));
    apply_calibration(v, cal);
    CHECK(std::arg(v[3]) == doctest::Approx(wrap_phase(-cal.corrections[3])));
    CHECK_THROWS(apply_calibration(std::span<cplx>(v.data(), 5), cal));
}

TEST_CASE("failed antennas and dead reference") {
    auto s = direct_only(3);
    s.failed_antennas = {4};
    auto cube = synthesize(s);
    const auto rd = doppler_spectrum(cube);
    const auto d = extract_direct_signal(rd);
    CHECK(d.values[4] == cplx{});
    CHECK_FALSE(d.live[4]);
    const auto cal = solve(s, cube);
    CHECK_FALSE(cal.has_correction[4]);
    CHECK(cal.corrections[4] == 0.0);

    s.failed_antennas = {0};
    cube = synthesize(s);
    CHECK_THROWS_WITH(solve(s, cube), "reference antenna dead; re-reference");
    CorrectionOptions opts;
    opts.allow_rereference = true;
    const auto re = solve(s, cube, opts);
    CHECK(re.reference == 1);
    CHECK(re.corrections[1] == 0.0);
    for (std::size_t n = 2; n < 12; ++n) {
        const double truth = wrap_phase(s.perturbations[n].phase - s.perturbations[1].phase);
        CHECK(std::abs(wrap_phase(re.corrections[n] - truth)) <= 1e-10);
    }
}

TEST_CASE("direct-signal SNR flag") {
    auto s = direct_only(0);
    s.n_chirps = 256;
    s.noise_sigma = 1.0;
    s.direct_amplitude = 0.05;
    auto d = extract_direct_signal(doppler_spectrum(synthesize(s)));
    CHECK(d.any_low_snr());
    s.direct_amplitude = 1.0;
    d = extract_direct_signal(doppler_spectrum(synthesize(s)));
    CHECK_FALSE(d.any_low_snr());
    for (double snr : d.snr_db) CHECK(snr > 20.0);
}

TEST_CASE("cross validation with a second transmitter") {
    auto s = direct_only(9);
    s.second_tx = Vec2{25000, -10000};
    const auto cal = solve(s, synthesize(s, 0));
    const double th2 = direct_path_bearing(s.pair_for(1), s.array);
    const auto res = cross_validate(cal, doppler_spectrum(synthesize(s, 1)), s.array, s.constants, th2);
    for (double r : res) CHECK(std::abs(r) < 1e-9);

    // bearing-dependent error on one antenna shows up as that antenna's residual
    s.perturbations[6].bearing_slope = 0.2;
    const double th1 = direct_path_bearing(s.site, s.array);
    const auto cal2 = solve(s, synthesize(s, 0));
    const auto res2 = cross_validate(cal2, doppler_spectrum(synthesize(s, 1)), s.array, s.constants, th2);
    for (std::size_t n = 0; n < 12; ++n) {
        if (n == 6)
            CHECK(res2[n] == doctest::Approx(wrap_phase(0.2 * (th2 - th1))).epsilon(1e-9));
        else
            CHECK(std::abs(res2[n]) < 1e-9);
    }
}

TEST_CASE("noisy recovery at 30 dB") {
    int good = 0;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        auto s = direct_only(100 + trial);
        s.n_chirps = 64;
        s.direct_amplitude = 1.0;
        s.noise_sigma = std::pow(10.0, -30.0 / 20.0);
        s.seed = trial + 1;
        const auto cal = solve(s, synthesize(s));
        double worst = 0;
        for (std::size_t n = 0; n < 12; ++n)
            worst = std::max(worst, std::abs(wrap_phase(
                                        cal.corrections[n] - (s.perturbations[n].phase - s.perturbations[0].phase))));
        good += worst < deg2rad(2);
    }
    CHECK(good >= 190);
}

TEST_CASE("optional amplitude equalization") {
    auto s = direct_only(12);
    for (std::size_t n = 0; n < 12; ++n) s.perturbations[n].amplitude = 0.5 + 0.1 * static_cast<double>(n);
    const auto cube = synthesize(s);
    const auto phase_only = solve(s, cube);
    CHECK(phase_only.gains.empty());
    CorrectionOptions opts;
    opts.equalize_amplitude = true;
    const auto cal = solve(s, cube, opts);
    REQUIRE(cal.gains.size() == 12);
    for (std::size_t n = 0; n < 12; ++n) {
        CHECK(cal.gains[n] == doctest::Approx(s.perturbations[n].amplitude / s.perturbations[0].amplitude));
        CHECK(cal.corrections[n] == doctest::Approx(phase_only.corrections[n]).epsilon(1e-12));
    }
    CHECK(cal.hash() != phase_only.hash());
    const auto d = extract_direct_signal(doppler_spectrum(apply_calibration(cube, cal)));
    for (std::size_t n = 1; n < 12; ++n) CHECK(std::abs(d.values[n]) == doctest::Approx(std::abs(d.values[0])));
    const auto again = solve(s, apply_calibration(cube, cal), opts);
    for (std::size_t n = 0; n < 12; ++n) CHECK(again.gains[n] == doctest::Approx(1.0));
}
