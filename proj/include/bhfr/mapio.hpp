// SPDX-License-Identifier: Apache-2.0
#pragma once

// File formats.
//
// Cube binary (little-endian, 64-byte header then payload):
//   0  magic      "BHFR" (chirp cube) or "BHRD" (range-Doppler cube)
//   4  version    u16, major in the high byte (readers reject other majors)
//   6  N          u16 antennas
//   8  n_ranges   u32
//  12  n_chirps   u32 (Doppler bins for BHRD)
//  16  chirp_duration f64 seconds
//  24  seed       u64
//  32  config_hash 32 bytes (SHA-256)
//  64  payload    complex64 (re f32, im f32), antenna-major, then range, then chirp
//
// Velocity map CSV: one '#' provenance line, one column header line
//   range_index,bearing_deg,x_m,y_m,velocity_mps,weight,n_contributions,method
// then one row per filled cell.
//
// Calibration text: '#' key=value provenance lines, then
//   antenna,correction_deg,snr_db,status,correction_rad
// with 1-based antenna numbers; correction_rad repeats the value losslessly.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bhfr/calibration.hpp"
#include "bhfr/cube.hpp"
#include "bhfr/music.hpp"
#include "bhfr/scene_sim.hpp"
#include "bhfr/velocity_map.hpp"

namespace bhfr {

inline constexpr std::uint16_t kCubeFormatVersion = 0x0100;
inline constexpr int kMapFormatVersion = 1;
inline constexpr int kCalibrationFormatVersion = 1;

void write_cube(std::ostream& os, const ChirpCube& cube);
ChirpCube read_cube(std::istream& is);
void write_cube(const std::filesystem::path& path, const ChirpCube& cube);
ChirpCube read_cube(const std::filesystem::path& path);

void write_rd_cube(std::ostream& os, const RangeDopplerCube& rd);
RangeDopplerCube read_rd_cube(std::istream& is);

/// Cube as it comes back from disk (samples rounded to complex64).
ChirpCube quantize_like_file(const ChirpCube& cube);

void write_map_csv(std::ostream& os, const VelocityMap& map);
/// Rebuilds the grid from the provenance line; positions and validity of
/// cells without a row are not recoverable and are marked valid at (0,0).
VelocityMap read_map_csv(std::istream& is);
void write_map_csv(const std::filesystem::path& path, const VelocityMap& map);
VelocityMap read_map_csv(const std::filesystem::path& path);

void write_calibration(std::ostream& os, const CalibrationSolution& cal);
CalibrationSolution read_calibration(std::istream& is);
void write_calibration(const std::filesystem::path& path, const CalibrationSolution& cal);
CalibrationSolution read_calibration(const std::filesystem::path& path);

/// Processing settings that live in the [processing] section of a scene file.
struct ProcessingConfig {
    std::string method = "bf";
    std::string doppler_window = "hamming";
    std::string spatial_taper = "rectangular";
    std::size_t segment_length = 0;  // 0 = n_chirps / 4
    double overlap = 0.5;
    double bearing_min_deg = -80.0;
    double bearing_max_deg = 80.0;
    double bearing_step_deg = 1.0;
    double bragg_band_hz = 0.5;
    double bf_snr_db = 10.0;
    int music_sources = kDefaultMusicSources;
    double music_threshold = kDefaultMusicThreshold;
    int n_min = 4;
    bool trim_outliers = true;
};

struct ScenarioFile {
    SceneConfig scene;
    ProcessingConfig processing;
    std::string text;  // raw bytes; hashed into scene.config_hash
};

/// Parses the INI-style scenario schema documented in configs/README.md.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile read_scenario(const std::filesystem::path& path);

}  // namespace bhfr
