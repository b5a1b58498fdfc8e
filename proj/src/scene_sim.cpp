// SPDX-License-Identifier: Apache-2.0
#include "bhfr/scene_sim.hpp"

#include <algorithm>
#include <random>

#include "bhfr/parallel.hpp"

namespace bhfr {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent generator per (purpose, i, j) so that output does not depend on
// the order or parallel split in which cells are synthesized.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t i, std::uint64_t j) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ tag);
    s = splitmix64(s ^ i);
    s = splitmix64(s ^ j);
    return std::mt19937_64(s);
}

enum : std::uint64_t { kTagNoise = 0x6e6f697365ull, kTagSource = 0x736f75726365ull, kTagPert = 0x70657274ull };

cplx complex_normal(std::mt19937_64& rng, std::normal_distribution<double>& nd) {
    constexpr double kHalfSqrt2 = 0.70710678118654752440;
    const double re = nd(rng);
    const double im = nd(rng);
    return {re * kHalfSqrt2, im * kHalfSqrt2};
}

std::vector<cplx> source_envelope(const SceneConfig& cfg, const Source& src, std::size_t index, int transmitter) {
    const auto n = static_cast<std::size_t>(cfg.n_chirps);
    std::vector<cplx> env(n);
    const double step = kTwoPi * src.doppler_hz * cfg.chirp_duration;
    if (src.linewidth_hz <= 0.0) {
        for (std::size_t k = 0; k < n; ++k) env[k] = std::polar(src.amplitude, step * static_cast<double>(k));
        return env;
    }
    auto rng = stream(cfg.seed, kTagSource, static_cast<std::uint64_t>(transmitter), index);
    std::normal_distribution<double> nd;
    const double rho = std::exp(-kPi * src.linewidth_hz * cfg.chirp_duration);
    const double innov = std::sqrt(1.0 - rho * rho);
    cplx z = complex_normal(rng, nd);
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) z = rho * z + innov * complex_normal(rng, nd);
        env[k] = src.amplitude * z * std::polar(1.0, step * static_cast<double>(k));
    }
    return env;
}

cplx gain(const SceneConfig& cfg, std::size_t antenna, double bearing) {
    if (cfg.perturbations.empty()) return {1.0, 0.0};
    const auto& p = cfg.perturbations[antenna];
    return std::polar(p.amplitude, p.phase + p.bearing_slope * bearing);
}

}  // namespace

SitePair SceneConfig::pair_for(int transmitter) const {
    if (transmitter == 0) return site;
    if (transmitter == 1 && second_tx) return SitePair{*second_tx, site.rx};
    throw Error(ErrorKind::config, "scene has no transmitter " + std::to_string(transmitter + 1));
}

void SceneConfig::validate() const {
    if (array.size() < 2) throw Error(ErrorKind::config, "array.count: need at least 2 antennas");
    if (n_chirps < 1) throw Error(ErrorKind::config, "scene.n_chirps: must be positive");
    if (n_ranges < 1) throw Error(ErrorKind::config, "scene.n_ranges: must be positive");
    if (!(chirp_duration > 0.0)) throw Error(ErrorKind::config, "scene.chirp_duration_s: must be positive");
    if (!(range_resolution > 0.0)) throw Error(ErrorKind::config, "scene.range_resolution_m: must be positive");
    if (noise_sigma < 0.0) throw Error(ErrorKind::config, "scene.noise_sigma: must be non-negative");
    if (!perturbations.empty() && perturbations.size() != array.size())
        throw Error(ErrorKind::config, "array.perturbation: need one entry per antenna");
    for (const auto& p : perturbations)
        if (std::abs(p.phase) > kPi) throw Error(ErrorKind::config, "array.perturbation: |phase| must be <= pi");
    for (int f : failed_antennas)
        if (f < 0 || static_cast<std::size_t>(f) >= array.size())
            throw Error(ErrorKind::config, "array.failed: antenna index out of range");
    for (const auto& s : sources) {
        if (s.range_index < 0 || s.range_index >= n_ranges)
            throw Error(ErrorKind::config, "source.range_index: outside [0, n_ranges)");
        if (s.transmitter != 0 && !(s.transmitter == 1 && second_tx))
            throw Error(ErrorKind::config, "source.transmitter: no such transmitter");
        if (s.linewidth_hz < 0.0) throw Error(ErrorKind::config, "source.linewidth_hz: must be non-negative");
    }
}

double direct_path_bearing(const SitePair& pair, const ArrayGeometry& array) {
    if (pair.monostatic()) throw Error(ErrorKind::data, "no direct path in monostatic mode");
    return array.bearing_of(pair.tx - pair.rx);
}

ChirpCube synthesize(const SceneConfig& cfg, int transmitter) {
    cfg.validate();
    const SitePair pair = cfg.pair_for(transmitter);
    const std::size_t N = cfg.array.size();
    const auto R = static_cast<std::size_t>(cfg.n_ranges);
    const auto T = static_cast<std::size_t>(cfg.n_chirps);

    ChirpCube cube;
    cube.data = Array3<cplx>(N, R, T);
    cube.chirp_duration = cfg.chirp_duration;
    cube.seed = cfg.seed;
    cube.config_hash = cfg.config_hash;

    std::vector<bool> failed(N, false);
    for (int f : cfg.failed_antennas) failed[static_cast<std::size_t>(f)] = true;

    // Per-source envelopes and per-antenna spatial factors.
    struct Placed {
        std::size_t range;
        std::vector<cplx> envelope;
        std::vector<cplx> spatial;
    };
    std::vector<Placed> placed;
    double strongest = 0.0;
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
        const Source& s = cfg.sources[i];
        strongest = std::max(strongest, s.amplitude);
        if (s.transmitter != transmitter) continue;
        Placed p;
        p.range = static_cast<std::size_t>(s.range_index);
        p.envelope = source_envelope(cfg, s, i, transmitter);
        const Vec2 u = cfg.array.direction(s.bearing);
        p.spatial.resize(N);
        for (std::size_t n = 0; n < N; ++n)
            p.spatial[n] = std::polar(1.0, -cfg.constants.wavenumber * dot(u, cfg.array.positions()[n])) *
                           gain(cfg, n, s.bearing);
        placed.push_back(std::move(p));
    }

    double direct_amp = cfg.direct_amplitude.value_or(cfg.sources.empty() ? 1.0 : strongest * std::pow(10.0, 1.5));
    if (pair.monostatic()) direct_amp = 0.0;
    std::vector<cplx> direct(N);
    if (direct_amp != 0.0) {
        const double theta = direct_path_bearing(pair, cfg.array);
        const Vec2 u = cfg.array.direction(theta);
        for (std::size_t n = 0; n < N; ++n)
            direct[n] = direct_amp * std::polar(1.0, -cfg.constants.wavenumber * dot(u, cfg.array.positions()[n])) *
                        gain(cfg, n, theta);
    }

    parallel_for(R, [&](std::size_t r) {
        for (std::size_t n = 0; n < N; ++n) {
            if (failed[n]) continue;
            auto row = cube.data.row(n, r);
            for (const auto& p : placed) {
                if (p.range != r) continue;
                const cplx g = p.spatial[n];
                for (std::size_t t = 0; t < T; ++t) row[t] += g * p.envelope[t];
            }
            if (r == 0 && direct_amp != 0.0)
                for (std::size_t t = 0; t < T; ++t) row[t] += direct[n];
            if (cfg.noise_sigma > 0.0) {
                auto rng = stream(cfg.seed, kTagNoise + static_cast<std::uint64_t>(transmitter), n, r);
                std::normal_distribution<double> nd;
                for (std::size_t t = 0; t < T; ++t) row[t] += cfg.noise_sigma * complex_normal(rng, nd);
            }
        }
    });
    return cube;
}

std::vector<GainPerturbation> uniform_phase_perturbations(std::size_t n_antennas, double max_phase,
                                                          std::uint64_t seed) {
    auto rng = stream(seed, kTagPert, n_antennas, 0);
    std::uniform_real_distribution<double> ud(-max_phase, max_phase);
    std::vector<GainPerturbation> out(n_antennas);
    for (auto& p : out) p.phase = ud(rng);
    return out;
}

}  // namespace bhfr
