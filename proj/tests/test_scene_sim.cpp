// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "bhfr/scene_sim.hpp"
#include "oracles.hpp"

using namespace bhfr;

namespace {

SceneConfig quiet_scene() {
    SceneConfig s;
    s.n_ranges = 4;
    s.n_chirps = 64;
    s.direct_amplitude = 0.0;
    return s;
}

}  // namespace

TEST_CASE("empty scene is all zero") {
    const auto cube = synthesize(quiet_scene());
    CHECK(cube.n_antennas() == 12);
    CHECK(cube.n_ranges() == 4);
    CHECK(cube.n_chirps() == 64);
    for (const auto& v : cube.data.raw()) CHECK(v == cplx{});
}

TEST_CASE("single source phases and Doppler") {
    auto s = quiet_scene();
    Source src;
    src.range_index = 2;
    src.bearing = deg2rad(23);
    src.doppler_hz = 0.1;
    s.sources.push_back(src);
    const auto cube = synthesize(s);
    const Vec2 u = s.array.direction(src.bearing);
    for (std::size_t n = 1; n < 12; ++n) {
        const double want = wrap_phase(-s.constants.wavenumber * dot(u, s.array.positions()[n]));
        for (std::size_t t : {0u, 17u, 63u})
            CHECK(std::abs(wrap_phase(std::arg(cube.data(n, 2, t) / cube.data(0, 2, t)) - want)) < 1e-10);
    }
    for (std::size_t t = 1; t < 64; ++t)
        CHECK(std::abs(wrap_phase(std::arg(cube.data(3, 2, t) / cube.data(3, 2, t - 1)) - 2 * kPi * 0.1 * 0.26)) <
              1e-10);
    for (std::size_t r : {0u, 1u, 3u})
        for (const auto& v : cube.data.row(0, r)) CHECK(v == cplx{});
}

TEST_CASE("direct path, perturbations and failures") {
    auto s = quiet_scene();
    s.direct_amplitude.reset();
    s.perturbations = uniform_phase_perturbations(12, deg2rad(50), 4);
    s.failed_antennas = {5};
    Source src;
    src.amplitude = 0.5;
    s.sources.push_back(src);
    const auto cube = synthesize(s);

    const double theta = direct_path_bearing(s.site, s.array);
    CHECK(theta == doctest::Approx(-kPi / 2));  // transmitter due west, array normal north
    const Vec2 u = s.array.direction(theta);
    for (std::size_t n = 1; n < 12; ++n) {
        if (n == 5) {
            for (std::size_t r = 0; r < 4; ++r)
                for (const auto& v : cube.data.row(n, r)) CHECK(v == cplx{});
            continue;
        }
        const double want = wrap_phase(-s.constants.wavenumber * dot(u, s.array.positions()[n]) +
                                       s.perturbations[n].phase - s.perturbations[0].phase);
        CHECK(std::abs(wrap_phase(std::arg(cube.data(n, 0, 9) / cube.data(0, 0, 9)) - want)) < 1e-10);
    }
    // default direct amplitude: 30 dB above the strongest source
    CHECK(std::abs(cube.data(0, 0, 0)) == doctest::Approx(0.5 * std::pow(10.0, 1.5)));
}

TEST_CASE("direct path bearing") {
    const auto geom = ArrayGeometry::linear(4, 10, 0.0);
    CHECK(direct_path_bearing({{0, 20000}, {0, 0}}, geom) == doctest::Approx(0.0));
    CHECK(direct_path_bearing({{20000, 0}, {0, 0}}, geom) == doctest::Approx(kPi / 2));
    CHECK_THROWS_WITH(direct_path_bearing({{1, 1}, {1, 1}}, geom), "no direct path in monostatic mode");
    // Sites 30 km apart, receiver looking 160 deg: the transmitter at azimuth
    // atan2(-24000, -18000) + 360 = 233.13 deg sits at 73.13 deg off the normal.
    const auto g2 = ArrayGeometry::linear(4, 10, deg2rad(160));
    const double want = std::atan2(-24000.0, -18000.0) + 2 * kPi - deg2rad(160);
    CHECK(direct_path_bearing({{-24000, -18000}, {0, 0}}, g2) == doctest::Approx(want));
}

TEST_CASE("determinism and thread independence") {
    SceneConfig s;
    s.n_ranges = 6;
    s.n_chirps = 128;
    s.noise_sigma = 0.3;
    Source a;
    a.range_index = 3;
    a.linewidth_hz = 0.05;
    s.sources.push_back(a);
    const auto c1 = synthesize(s);
    const auto c2 = synthesize(s);
    CHECK(c1 == c2);
    s.seed = 2;
    CHECK_FALSE(c1 == synthesize(s));
}

TEST_CASE("noise power and linewidth source power") {
    SceneConfig s;
    s.n_ranges = 2;
    s.n_chirps = 4096;
    s.direct_amplitude = 0.0;
    s.noise_sigma = 2.0;
    Source a;
    a.range_index = 1;
    a.amplitude = 3.0;
    a.linewidth_hz = 0.2;
    s.sources.push_back(a);
    const auto cube = synthesize(s);
    double noise = 0.0, src = 0.0;
    for (std::size_t n = 0; n < 12; ++n) {
        for (const auto& v : cube.data.row(n, 0)) noise += std::norm(v);
        for (const auto& v : cube.data.row(n, 1)) src += std::norm(v);
    }
    noise /= 12.0 * 4096;
    src /= 12.0 * 4096;
    CHECK(noise == doctest::Approx(4.0).epsilon(0.05));
    CHECK(src == doctest::Approx(9.0 + 4.0).epsilon(0.25));
}

TEST_CASE("config validation") {
    SceneConfig s;
    s.n_chirps = 0;
    CHECK_THROWS_WITH(synthesize(s), "scene.n_chirps: must be positive");
    s = SceneConfig{};
    Source bad;
    bad.range_index = 99;
    s.sources.push_back(bad);
    CHECK_THROWS(synthesize(s));
    s = SceneConfig{};
    s.perturbations.resize(3);
    CHECK_THROWS(synthesize(s));
    s = SceneConfig{};
    CHECK_THROWS(synthesize(s, 1));
}

TEST_CASE("second transmitter floor") {
    SceneConfig s;
    s.n_ranges = 3;
    s.n_chirps = 32;
    s.second_tx = Vec2{15000, 30000};
    Source a;
    a.range_index = 2;
    a.transmitter = 1;
    s.sources.push_back(a);
    const auto c0 = synthesize(s, 0);
    const auto c1 = synthesize(s, 1);
    for (const auto& v : c0.data.row(0, 2)) CHECK(v == cplx{});
    CHECK(std::abs(c1.data(0, 2, 0)) == doctest::Approx(1.0));
    const double th2 = direct_path_bearing(s.pair_for(1), s.array);
    const Vec2 u = s.array.direction(th2);
    const double want = wrap_phase(-s.constants.wavenumber * dot(u, s.array.positions()[4]));
    CHECK(std::abs(wrap_phase(std::arg(c1.data(4, 0, 0) / c1.data(0, 0, 0)) - want)) < 1e-10);
}
