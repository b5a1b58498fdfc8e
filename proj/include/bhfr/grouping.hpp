// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "bhfr/music.hpp"

namespace bhfr {

/// Contiguous run of antennas [start, start + length), 0-based.
struct Subarray {
    int start = 0;
    int length = 0;

    std::vector<int> antennas() const;
    friend bool operator==(const Subarray&, const Subarray&) = default;
};

struct SubarraySet {
    std::vector<Subarray> runs;  // ordered by (start, length)
    int n_antennas = 0;
    int n_min = 0;
    std::vector<int> failed;
};

/// (N - N_min + 1)(N - N_min + 2) / 2, the run count of a fully live array.
std::size_t subarray_count(int n_antennas, int n_min);

/// All runs of consecutive live antennas with length in [n_min, N].
SubarraySet enumerate_subarrays(int n_antennas, int n_min, std::span<const int> failed = {});

struct GroupLengthParams {
    int sources = 1;
    double threshold = kDefaultMusicThreshold;
    double weight = 1.0;
};

struct GroupParams {
    std::vector<GroupLengthParams> by_length;  // index = subarray length
    double band_hz = 0.5;
    bool trim_outliers = true;
    double trim_mads = 3.0;

    /// M = min(L-1, 3), uniform threshold, weight L^2.
    static GroupParams defaults(int n_antennas, double threshold = kDefaultMusicThreshold);
    const GroupLengthParams& for_length(int length) const;
    void validate() const;
};

struct RunResult {
    Subarray run;
    VelocityMap map;
    bool ok = true;
    std::string warning;
};

/// DF map for every run; a failing run yields ok == false and a warning.
std::vector<RunResult> group_process(const SegmentedSpectra& samples, const ArrayGeometry& geom,
                                     const RadarConstants& c, const CellGrid& cells, const SubarraySet& set,
                                     const GroupParams& params);

/// Per-bin weighted mean of run velocities, weight w_L of each run's length.
/// Contributions are summed in sorted order so the result does not depend on
/// run order.
VelocityMap weighted_merge(std::span<const RunResult> runs, const GroupParams& params, const CellGrid& cells);

}  // namespace bhfr
