// SPDX-License-Identifier: Apache-2.0
#include "bhfr/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bhfr/parallel.hpp"

namespace bhfr {

std::vector<int> Subarray::antennas() const {
    std::vector<int> a(static_cast<std::size_t>(length));
    std::iota(a.begin(), a.end(), start);
    return a;
}

std::size_t subarray_count(int n, int n_min) {
    if (n_min > n) return 0;
    const auto k = static_cast<std::size_t>(n - n_min);
    return (k + 1) * (k + 2) / 2;
}

SubarraySet enumerate_subarrays(int n, int n_min, std::span<const int> failed) {
    if (n_min < 2) throw Error(ErrorKind::usage, "minimal subarray size must be at least 2");
    SubarraySet set;
    set.n_antennas = n;
    set.n_min = n_min;
    set.failed.assign(failed.begin(), failed.end());
    std::sort(set.failed.begin(), set.failed.end());

    std::vector<bool> dead(static_cast<std::size_t>(std::max(n, 0)), false);
    for (int f : failed) {
        if (f < 0 || f >= n) throw Error(ErrorKind::usage, "failed antenna index out of range");
        dead[static_cast<std::size_t>(f)] = true;
    }
    for (int start = 0; start < n; ++start) {
        for (int len = n_min; start + len <= n; ++len) {
            if (dead[static_cast<std::size_t>(start + len - 1)]) break;
            bool ok = true;
            for (int i = start; i < start + len && ok; ++i) ok = !dead[static_cast<std::size_t>(i)];
            if (!ok) break;
            set.runs.push_back({start, len});
        }
    }
    return set;
}

GroupParams GroupParams::defaults(int n, double threshold) {
    GroupParams p;
    p.by_length.resize(static_cast<std::size_t>(n) + 1);
    for (int L = 2; L <= n; ++L) {
        auto& g = p.by_length[static_cast<std::size_t>(L)];
        g.sources = std::min(L - 1, kDefaultMusicSources);
        g.threshold = threshold;
        g.weight = static_cast<double>(L) * L;
    }
    return p;
}

const GroupLengthParams& GroupParams::for_length(int length) const {
    if (length < 0 || static_cast<std::size_t>(length) >= by_length.size())
        throw Error(ErrorKind::usage, "no grouping parameters for subarray length " + std::to_string(length));
    return by_length[static_cast<std::size_t>(length)];
}

void GroupParams::validate() const {
    double prev = 0.0;
    for (std::size_t L = 2; L < by_length.size(); ++L) {
        const auto& g = by_length[L];
        if (g.weight < 0.0) throw Error(ErrorKind::config, "grouping weights must be non-negative");
        if (g.weight < prev) throw Error(ErrorKind::config, "grouping weights must not decrease with length");
        if (g.sources < 1 || g.sources > static_cast<int>(L) - 1)
            throw Error(ErrorKind::config, "grouping source count must be in [1, L-1]");
        prev = g.weight;
    }
}

std::vector<RunResult> group_process(const SegmentedSpectra& samples, const ArrayGeometry& geom,
                                     const RadarConstants& c, const CellGrid& cells, const SubarraySet& set,
                                     const GroupParams& params) {
    params.validate();
    std::vector<RunResult> out(set.runs.size());
    // Nested parallel_for calls inside df_velocity_map run serially.
    parallel_for(set.runs.size(), [&](std::size_t i) {
        RunResult& res = out[i];
        res.run = set.runs[i];
        const auto& lp = params.for_length(res.run.length);
        MusicParams mp;
        mp.sources = lp.sources;
        mp.threshold = lp.threshold;
        mp.band_hz = params.band_hz;
        const auto antennas = res.run.antennas();
        try {
            res.map = df_velocity_map(samples, geom, c, cells, mp, antennas);
            res.map.method = "music-run";
        } catch (const Error& e) {
            res.ok = false;
            res.warning = "run [" + std::to_string(res.run.start + 1) + ".." +
                          std::to_string(res.run.start + res.run.length) + "]: " + e.what();
            res.map = VelocityMap::empty_like(cells, "music-run");
        }
    });
    return out;
}

VelocityMap weighted_merge(std::span<const RunResult> runs, const GroupParams& params, const CellGrid& cells) {
    VelocityMap merged = VelocityMap::empty_like(cells, "grouping");
    const std::size_t G = cells.bearings.size();

    struct Contribution {
        double velocity;
        double weight;
        bool operator<(const Contribution& o) const {
            return velocity < o.velocity || (velocity == o.velocity && weight < o.weight);
        }
    };
    std::vector<std::vector<Contribution>> bins(merged.cells.size());
    for (const auto& run : runs) {
        if (!run.ok) continue;
        const double w = params.for_length(run.run.length).weight;
        const auto& m = run.map;
        if (m.n_ranges != cells.n_ranges) throw Error(ErrorKind::data, "run map range count mismatch");
        for (int r = 0; r < m.n_ranges; ++r) {
            for (std::size_t g = 0; g < m.n_bearings(); ++g) {
                const auto& cell = m.at(r, g);
                if (!cell.filled) continue;
                const std::size_t target = (m.bearings.size() == G && m.bearings == cells.bearings)
                                               ? g
                                               : merged.nearest_bearing(m.bearings[g]);
                bins[merged.index(r, target)].push_back({cell.velocity, w});
            }
        }
    }

    for (std::size_t i = 0; i < bins.size(); ++i) {
        auto& contribs = bins[i];
        if (contribs.empty() || !merged.valid[i]) continue;
        std::sort(contribs.begin(), contribs.end());

        if (params.trim_outliers && contribs.size() >= 3) {
            std::vector<double> v(contribs.size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = contribs[k].velocity;
            const std::size_t mid = v.size() / 2;
            const double med = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
            std::vector<double> dev(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) dev[k] = std::abs(v[k] - med);
            std::sort(dev.begin(), dev.end());
            const double mad = dev.size() % 2 ? dev[mid] : 0.5 * (dev[mid - 1] + dev[mid]);
            if (mad > 0.0) {
                const double limit = params.trim_mads * mad;
                std::erase_if(contribs, [&](const Contribution& c) { return std::abs(c.velocity - med) > limit; });
            }
        }

        double sw = 0.0, swv = 0.0;
        for (const auto& c : contribs) {
            sw += c.weight;
            swv += c.weight * c.velocity;
        }
        if (!(sw > 0.0)) continue;
        auto& out = merged.cells[i];
        out.velocity = swv / sw;
        out.weight = sw;
        out.n_contributions = static_cast<int>(contribs.size());
        out.filled = true;
    }
    return merged;
}

}  // namespace bhfr
