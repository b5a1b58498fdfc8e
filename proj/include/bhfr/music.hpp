// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "bhfr/doppler.hpp"
#include "bhfr/geometry.hpp"
#include "bhfr/velocity_map.hpp"

namespace bhfr {

/// Returned by music_factor when the steering vector lies in the signal subspace.
inline constexpr double kMusicFactorCap = 1e12;
inline constexpr double kDefaultMusicThreshold = 4.0;
inline constexpr int kDefaultMusicSources = 3;

/// Zero-mean second moment of the per-segment Doppler rays of a subset of
/// antennas, S_ij = (1/S) sum_s conj(Y_i^(s)) Y_j^(s). Received phases are
/// exp(-i K u.d), so this orientation puts a(theta_s) itself in the signal
/// subspace.
struct CovarianceEstimate {
    Eigen::MatrixXcd matrix;
    std::size_t n_samples = 0;
    std::size_t range = 0;
    std::size_t bin = 0;
    std::vector<int> antennas;
};

/// Eigenpairs in descending eigenvalue order; columns signal_dim.. span the noise subspace.
struct SubspaceDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    int signal_dim = 1;

    Eigen::MatrixXcd signal_projector() const;
    Eigen::MatrixXcd noise_projector() const;
};

struct Doa {
    double bearing = 0.0;  // refined, radians
    std::size_t grid_index = 0;
    double music_factor = 0.0;
};

struct DoaSet {
    std::vector<Doa> doas;  // descending music_factor
    double threshold = 0.0;
};

CovarianceEstimate estimate_covariance(const SegmentedSpectra& samples, std::size_t range, std::size_t bin,
                                       std::span<const int> antennas);

SubspaceDecomposition decompose(const CovarianceEstimate& cov, int signal_dim);

/// Q(theta) = |a| / |P_noise a|; kMusicFactorCap when the projection vanishes.
double music_factor(const SubspaceDecomposition& decomp, std::span<const cplx> steering);

/// Q over a bearing grid, steering vectors taken from `geom` (which must match
/// the decomposition's antenna subset).
std::vector<double> music_spectrum(const SubspaceDecomposition& decomp, const ArrayGeometry& geom,
                                   const RadarConstants& c, std::span<const double> bearings);

/// Up to `max_sources` interior local maxima of Q, strongest first, kept only
/// if Q >= threshold; each bearing refined by a parabola through the
/// projection power 1/Q^2 around the peak.
DoaSet find_doas(std::span<const double> q, std::span<const double> bearings, int max_sources, double threshold);

struct MusicParams {
    int sources = kDefaultMusicSources;
    double threshold = kDefaultMusicThreshold;
    double band_hz = 0.5;  // around each Bragg line
};

/// Sparse DF map: MUSIC on every Doppler ray inside the Bragg bands of every
/// range, using the given antennas (empty = all). Each DOA contributes the
/// elliptical velocity of its ray to the nearest bearing bin; the larger
/// MUSIC factor wins collisions.
VelocityMap df_velocity_map(const SegmentedSpectra& samples, const ArrayGeometry& geom, const RadarConstants& c,
                            const CellGrid& cells, const MusicParams& params, std::span<const int> antennas = {});

}  // namespace bhfr
