// SPDX-License-Identifier: Apache-2.0
#include "bhfr/music.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "bhfr/kernels.hpp"
#include "bhfr/parallel.hpp"

namespace bhfr {

Eigen::MatrixXcd SubspaceDecomposition::signal_projector() const {
    const auto Us = eigenvectors.leftCols(signal_dim);
    return Us * Us.adjoint();
}

Eigen::MatrixXcd SubspaceDecomposition::noise_projector() const {
    const auto Un = eigenvectors.rightCols(eigenvectors.cols() - signal_dim);
    return Un * Un.adjoint();
}

CovarianceEstimate estimate_covariance(const SegmentedSpectra& samples, std::size_t range, std::size_t bin,
                                       std::span<const int> antennas) {
    const std::size_t S = samples.n_segments();
    const std::size_t L = antennas.size();
    if (S < 2) throw Error(ErrorKind::data, "covariance needs at least 2 segments");
    if (L < 2) throw Error(ErrorKind::data, "covariance needs at least 2 antennas");
    if (range >= samples.n_ranges() || bin >= samples.n_bins()) throw Error(ErrorKind::usage, "cell out of range");

    CovarianceEstimate cov;
    cov.range = range;
    cov.bin = bin;
    cov.n_samples = S;
    cov.antennas.assign(antennas.begin(), antennas.end());
    cov.matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L));

    std::vector<bool> alive(L, false);
    std::vector<cplx> y(L);
    const auto& k = kernels::active();
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t i = 0; i < L; ++i) {
            y[i] = samples.segments[s](static_cast<std::size_t>(antennas[i]), range, bin);
            if (y[i] != cplx{}) alive[i] = true;
        }
        // Column-major: column j += y_j * conj(y)
        for (std::size_t j = 0; j < L; ++j)
            k.caxpy_conj(y[j], y.data(), cov.matrix.col(static_cast<Eigen::Index>(j)).data(), L);
    }
    for (std::size_t i = 0; i < L; ++i)
        if (!alive[i]) throw Error(ErrorKind::data, "dead antenna in subset");

    cov.matrix /= static_cast<double>(S);
    // Exact Hermitian symmetry regardless of kernel rounding.
    cov.matrix = (0.5 * (cov.matrix + cov.matrix.adjoint())).eval();
    return cov;
}

SubspaceDecomposition decompose(const CovarianceEstimate& cov, int signal_dim) {
    const auto L = static_cast<int>(cov.matrix.rows());
    if (signal_dim < 1 || signal_dim > L - 1)
        throw Error(ErrorKind::usage, "signal dimension must be in [1, N-1]");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(cov.matrix);
    if (solver.info() != Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(cov.matrix);
        const auto sv = svd.singularValues();
        const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
        throw Error(ErrorKind::data, "eigendecomposition failed (condition number " + std::to_string(cond) + ")");
    }

    // Eigen returns ascending order.
    SubspaceDecomposition d;
    d.signal_dim = signal_dim;
    d.eigenvalues = solver.eigenvalues().reverse();
    d.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return d;
}

namespace {

double projection_power(const SubspaceDecomposition& d, const cplx* a, std::size_t n) {
    const auto& k = kernels::active();
    double p = 0.0;
    for (Eigen::Index m = d.signal_dim; m < d.eigenvectors.cols(); ++m) {
        const cplx c = k.cdotc(d.eigenvectors.col(m).data(), a, n);
        p += std::norm(c);
    }
    return p;
}

double factor_from(double steering_energy, double proj) {
    if (proj <= 0.0) return kMusicFactorCap;
    return std::min(kMusicFactorCap, std::sqrt(steering_energy / proj));
}

}  // namespace

double music_factor(const SubspaceDecomposition& decomp, std::span<const cplx> steering) {
    if (static_cast<Eigen::Index>(steering.size()) != decomp.eigenvectors.rows())
        throw Error(ErrorKind::usage, "steering vector size mismatch");
    const double e = kernels::active().energy(steering.data(), steering.size());
    return factor_from(e, projection_power(decomp, steering.data(), steering.size()));
}

std::vector<double> music_spectrum(const SubspaceDecomposition& decomp, const ArrayGeometry& geom,
                                   const RadarConstants& c, std::span<const double> bearings) {
    std::vector<double> q(bearings.size());
    for (std::size_t g = 0; g < bearings.size(); ++g) {
        const auto a = steering_vector(geom, c, bearings[g]);
        q[g] = music_factor(decomp, a.entries);
    }
    return q;
}

DoaSet find_doas(std::span<const double> q, std::span<const double> bearings, int max_sources, double threshold) {
    if (q.size() != bearings.size()) throw Error(ErrorKind::usage, "MUSIC spectrum and grid size mismatch");
    DoaSet set;
    set.threshold = threshold;
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < q.size(); ++i)
        if (q[i] > q[i - 1] && q[i] >= q[i + 1]) peaks.push_back(i);
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
    if (peaks.size() > static_cast<std::size_t>(std::max(max_sources, 0)))
        peaks.resize(static_cast<std::size_t>(std::max(max_sources, 0)));

    for (std::size_t i : peaks) {
        if (q[i] < threshold) continue;
        // 1/Q^2 is the normalized noise-subspace projection power, smooth near a null.
        const double dm = 1.0 / (q[i - 1] * q[i - 1]);
        const double d0 = 1.0 / (q[i] * q[i]);
        const double dp = 1.0 / (q[i + 1] * q[i + 1]);
        const double denom = dm - 2.0 * d0 + dp;
        double offset = denom > 0.0 ? std::clamp(0.5 * (dm - dp) / denom, -0.5, 0.5) : 0.0;
        const double step = offset >= 0.0 ? bearings[i + 1] - bearings[i] : bearings[i] - bearings[i - 1];
        set.doas.push_back({bearings[i] + offset * step, i, q[i]});
    }
    return set;
}

VelocityMap df_velocity_map(const SegmentedSpectra& samples, const ArrayGeometry& geom, const RadarConstants& c,
                            const CellGrid& cells, const MusicParams& params, std::span<const int> antennas) {
    std::vector<int> subset(antennas.begin(), antennas.end());
    if (subset.empty()) {
        subset.resize(geom.size());
        std::iota(subset.begin(), subset.end(), 0);
    }
    if (samples.n_ranges() != static_cast<std::size_t>(cells.n_ranges))
        throw Error(ErrorKind::data, "segmented spectra and radar cells disagree on range count");
    const ArrayGeometry sub = geom.subset(subset);
    const std::size_t L = subset.size(), G = cells.bearings.size(), B = samples.n_bins();
    const int M = std::min(params.sources, static_cast<int>(L) - 1);

    VelocityMap map = VelocityMap::empty_like(cells, "music");

    // Steering matrix, column g = a(theta_g) for the subset.
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(G));
    std::vector<double> energy(G);
    for (std::size_t g = 0; g < G; ++g) {
        const auto a = steering_vector(sub, c, cells.bearings[g]);
        for (std::size_t n = 0; n < L; ++n) A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g)) = a.entries[n];
        energy[g] = static_cast<double>(L);
    }

    parallel_for(static_cast<std::size_t>(cells.n_ranges), [&](std::size_t r) {
        const auto ri = static_cast<int>(r);
        double fb_min = std::numeric_limits<double>::infinity(), fb_max = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const RadarCell& cell = cells.at(ri, g);
            if (!cell.valid) continue;
            const double fb = bragg_frequency(c, cell.bistatic_angle);
            fb_min = std::min(fb_min, fb);
            fb_max = std::max(fb_max, fb);
        }
        if (!(fb_max > 0.0)) return;

        std::vector<double> q(G);
        for (std::size_t bin = 0; bin < B; ++bin) {
            const double f = samples.frequency(bin);
            if (std::abs(f) < fb_min - params.band_hz || std::abs(f) > fb_max + params.band_hz) continue;

            double total = 0.0;
            for (const auto& seg : samples.segments)
                for (int a : subset) total += std::norm(seg(static_cast<std::size_t>(a), r, bin));
            if (total == 0.0) continue;

            const auto cov = estimate_covariance(samples, r, bin, subset);
            const auto dec = decompose(cov, M);
            for (std::size_t g = 0; g < G; ++g)
                q[g] = factor_from(energy[g], projection_power(dec, A.col(static_cast<Eigen::Index>(g)).data(), L));
            const auto doas = find_doas(q, cells.bearings, M, params.threshold);

            const int sign = f >= 0.0 ? +1 : -1;
            for (const auto& doa : doas.doas) {
                const std::size_t g = map.nearest_bearing(doa.bearing);
                const RadarCell& cell = cells.at(ri, g);
                if (!cell.valid) continue;
                const double shift = f - sign * bragg_frequency(c, cell.bistatic_angle);
                if (std::abs(shift) > params.band_hz) continue;
                auto& out = map.at(ri, g);
                if (out.filled && out.peak >= doa.music_factor) continue;
                out.velocity = elliptical_velocity(c, shift, cell.bistatic_angle);
                out.weight = 1.0;
                out.n_contributions = 1;
                out.filled = true;
                out.peak = doa.music_factor;
            }
        }
    });
    return map;
}

}  // namespace bhfr
