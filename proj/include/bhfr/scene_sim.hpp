// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "bhfr/cube.hpp"
#include "bhfr/geometry.hpp"

namespace bhfr {

/// Point scatterer in one range cell. With linewidth_hz == 0 the source is a
/// pure tone at doppler_hz; otherwise its complex envelope is a unit-power
/// first-order Gauss-Markov process (Lorentzian line of that full width),
/// which decorrelates co-located sources across Doppler segments.
struct Source {
    int range_index = 1;
    double bearing = 0.0;     // radians from array normal
    double doppler_hz = 0.0;  // absolute Doppler
    double amplitude = 1.0;
    double linewidth_hz = 0.0;
    int transmitter = 0;  // 0 = primary, 1 = second transmitter
};

/// Complex gain error on one antenna: amplitude * exp(i (phase + bearing_slope * theta)).
/// A non-zero slope makes the error bearing-dependent.
struct GainPerturbation {
    double phase = 0.0;
    double amplitude = 1.0;
    double bearing_slope = 0.0;
};

struct SceneConfig {
    SitePair site{{-15000.0, 0.0}, {15000.0, 0.0}};
    std::optional<Vec2> second_tx;
    RadarConstants constants{};
    ArrayGeometry array = ArrayGeometry::linear(kDefaultAntennaCount,
                                                kDefaultSpacingWavelengths * (kSpeedOfLight / kDefaultRadarFrequency),
                                                0.0);
    std::vector<Source> sources;
    /// Direct-path amplitude; unset means 30 dB above the strongest source
    /// (1.0 when there are no sources). Zero disables the direct signal.
    std::optional<double> direct_amplitude;
    /// Empty, or one entry per antenna.
    std::vector<GainPerturbation> perturbations;
    std::vector<int> failed_antennas;  // 0-based
    double noise_sigma = 0.0;
    int n_chirps = 1024;
    double chirp_duration = kDefaultChirpDuration;
    int n_ranges = 32;
    double range_resolution = kDefaultRangeResolution;
    std::uint64_t seed = 1;
    Digest config_hash{};

    /// Site pair seen by the given transmitter (0 primary, 1 second).
    SitePair pair_for(int transmitter) const;
    void validate() const;
};

/// Bearing of the transmitter as seen from the receiving array.
double direct_path_bearing(const SitePair& pair, const ArrayGeometry& array);

/// Cube for one transmitter's range floor: that transmitter's sources plus its
/// direct path in range cell 0. Floors share the cube layout.
ChirpCube synthesize(const SceneConfig& config, int transmitter = 0);

/// Uniform phase draw in [-max_phase, max_phase] per antenna, unit amplitude.
std::vector<GainPerturbation> uniform_phase_perturbations(std::size_t n_antennas, double max_phase,
                                                          std::uint64_t seed);

}  // namespace bhfr
