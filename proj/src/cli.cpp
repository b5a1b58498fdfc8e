// SPDX-License-Identifier: Apache-2.0
#include "bhfr/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "bhfr/beamform.hpp"
#include "bhfr/calibration.hpp"
#include "bhfr/doppler.hpp"
#include "bhfr/grouping.hpp"
#include "bhfr/mapio.hpp"
#include "bhfr/music.hpp"
#include "bhfr/parallel.hpp"
#include "bhfr/scene_sim.hpp"

namespace bhfr::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::config: return "config";
        case ErrorKind::data: return "data";
        case ErrorKind::comparison: return "comparison";
    }
    return "data";
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

std::string file_digest(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error(ErrorKind::usage, "cannot open " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return to_hex(sha256(ss.str()));
}

fs::path resolve_config(const std::string& given) {
    fs::path p(given);
    if (fs::exists(p) || p.is_absolute()) return p;
    if (const char* dir = std::getenv("BHFR_CONFIG_DIR"); dir && *dir) {
        const fs::path alt = fs::path(dir) / p;
        if (fs::exists(alt)) return alt;
    }
    return p;
}

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw Error(ErrorKind::usage, "no such file: " + p.string());
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Manifest {
    json doc;
    fs::path path;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Manifest(const std::string& sub, const std::vector<std::string>& args) {
        doc["tool"] = "bhfr";
        doc["version"] = kVersion;
        doc["subcommand"] = sub;
        doc["argv"] = std::vector<std::string>(args.begin() + 1, args.end());
        doc["parameters"] = json::object();
        doc["inputs"] = json::object();
        doc["outputs"] = json::object();
    }
    void input(const std::string& key, const fs::path& p) {
        doc["inputs"][key] = {{"path", p.string()}, {"sha256", file_digest(p)}};
    }
    void output(const std::string& key, const fs::path& p) {
        doc["outputs"][key] = {{"path", p.string()}, {"sha256", file_digest(p)}};
    }
    void write() {
        if (path.empty()) return;
        doc["threads"] = default_threads();
        doc["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream os(path, std::ios::trunc);
        if (!os) throw Error(ErrorKind::usage, "cannot write " + path.string());
        os << doc.dump(2) << '\n';
    }
};

fs::path default_manifest(const std::string& given, const fs::path& out) {
    if (!given.empty()) return given;
    return fs::path(out.string() + ".manifest.json");
}

std::vector<int> to_zero_based(const std::vector<int>& one_based, std::size_t n, const char* what) {
    std::vector<int> out;
    for (int a : one_based) {
        if (a < 1 || static_cast<std::size_t>(a) > n)
            throw Error(ErrorKind::usage, std::string(what) + ": antenna " + std::to_string(a) + " outside 1.." +
                                              std::to_string(n));
        out.push_back(a - 1);
    }
    return out;
}

std::string antenna_list(const std::vector<int>& zero_based) {
    std::string s;
    for (int a : zero_based) s += (s.empty() ? "" : ",") + std::to_string(a + 1);
    return s;
}

void check_cube_matches(const ChirpCube& cube, const ScenarioFile& sc, std::ostream& err) {
    if (cube.n_antennas() != sc.scene.array.size())
        throw Error(ErrorKind::data, "cube has " + std::to_string(cube.n_antennas()) + " antennas, config has " +
                                         std::to_string(sc.scene.array.size()));
    if (cube.config_hash != sc.scene.config_hash)
        err << "warning: cube was simulated from a different config (hash " << to_hex(cube.config_hash).substr(0, 12)
            << ")\n";
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string config, out, out_tx2, manifest;
};

int do_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const fs::path cfg = resolve_config(a.config);
    require_file(cfg);
    const auto sc = read_scenario(cfg);
    Manifest m("simulate", args);
    m.input("config", cfg);
    m.doc["parameters"] = {{"seed", sc.scene.seed},
                           {"n_chirps", sc.scene.n_chirps},
                           {"n_ranges", sc.scene.n_ranges},
                           {"n_antennas", sc.scene.array.size()},
                           {"n_sources", sc.scene.sources.size()},
                           {"config_hash", to_hex(sc.scene.config_hash)}};

    write_cube(fs::path(a.out), synthesize(sc.scene, 0));
    m.output("cube", a.out);
    if (!a.out_tx2.empty()) {
        if (!sc.scene.second_tx) throw Error(ErrorKind::config, "scene.tx2: required by --out-tx2");
        write_cube(fs::path(a.out_tx2), synthesize(sc.scene, 1));
        m.output("cube_tx2", a.out_tx2);
    }
    m.path = default_manifest(a.manifest, a.out);
    m.write();
    out << "wrote " << a.out << " (" << sc.scene.array.size() << " antennas, " << sc.scene.n_ranges << " ranges, "
        << sc.scene.n_chirps << " chirps)\n";
    return 0;
}

// ------------------------------------------------------------ calibrate

struct CalibrateArgs {
    std::string cube, config, out, manifest, window = "hamming";
    int transmitter = 1;
    std::size_t range_cell = 0;
    double snr_floor_db = kDefaultDirectSnrFloorDb;
    bool equalize_amplitude = false;
};

int do_calibrate(const CalibrateArgs& a, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
    require_file(a.cube);
    const fs::path cfg = resolve_config(a.config);
    require_file(cfg);
    const auto sc = read_scenario(cfg);
    const auto cube = read_cube(fs::path(a.cube));
    check_cube_matches(cube, sc, err);
    if (a.transmitter < 1 || a.transmitter > 2) throw Error(ErrorKind::usage, "--transmitter must be 1 or 2");
    if (a.transmitter == 2 && !sc.scene.second_tx) throw Error(ErrorKind::config, "scene.tx2: not set");

    const auto rd = doppler_spectrum(cube, parse_window(a.window));
    const auto direct = extract_direct_signal(rd, a.range_cell, a.snr_floor_db);
    bool any_good = false;
    for (std::size_t n = 0; n < direct.values.size(); ++n) any_good |= direct.live[n] && !direct.low_snr[n];
    if (!any_good) throw Error(ErrorKind::data, "direct signal not found");

    const auto pair = sc.scene.pair_for(a.transmitter - 1);
    const double theta_s = direct_path_bearing(pair, sc.scene.array);
    CorrectionOptions opts;
    opts.allow_rereference = true;
    opts.equalize_amplitude = a.equalize_amplitude;
    auto cal = compute_corrections(direct, theoretical_phases(sc.scene.array, sc.scene.constants, theta_s), theta_s,
                                   opts);
    cal.config_hash = cube.config_hash;
    if (cal.reference != 0)
        err << "warning: reference antenna 1 dead; re-referenced to antenna " << cal.reference + 1 << '\n';
    for (std::size_t n = 0; n < direct.values.size(); ++n)
        if (direct.low_snr[n])
            err << "warning: antenna " << n + 1 << " direct-signal SNR " << fmt("%.1f", direct.snr_db[n])
                << " dB below floor\n";

    write_calibration(fs::path(a.out), cal);

    out << "source bearing " << fmt("%.3f", rad2deg(theta_s)) << " deg, reference antenna " << cal.reference + 1
        << '\n';
    out << "antenna  correction_deg   snr_db  status\n";
    for (std::size_t n = 0; n < cal.size(); ++n) {
        const char* status = !cal.has_correction[n] ? "dead" : (static_cast<int>(n) == cal.reference ? "ref" : "ok");
        char line[128];
        std::snprintf(line, sizeof line, "%7zu  %14.3f  %7.1f  %s\n", n + 1, rad2deg(cal.corrections[n]),
                      cal.snr_db[n], status);
        out << line;
    }

    Manifest m("calibrate", args);
    m.input("cube", a.cube);
    m.input("config", cfg);
    m.doc["parameters"] = {{"transmitter", a.transmitter},
                           {"range_cell", a.range_cell},
                           {"snr_floor_db", a.snr_floor_db},
                           {"window", a.window},
                           {"equalize_amplitude", a.equalize_amplitude},
                           {"source_bearing_deg", rad2deg(theta_s)},
                           {"reference_antenna", cal.reference + 1}};
    m.output("calibration", a.out);
    m.path = default_manifest(a.manifest, a.out);
    m.write();
    return 0;
}

// ------------------------------------------------------------ process

struct ProcessArgs {
    std::string cube, config, method, cal, out, manifest, emit_psd;
    std::vector<int> failed;
    int transmitter = 1;
    int nmin = 0, sources = 0, psd_range = -1;
    double threshold = 0.0, band = 0.0;
    bool set_threshold = false, set_band = false;
};

void write_psd_files(const fs::path& dir, const ChirpCube& cube, const ScenarioFile& sc, const BearingGrid& grid,
                     const CalibrationSolution* cal, int psd_range, Manifest& m) {
    fs::create_directories(dir);
    const Window w = parse_window(sc.processing.doppler_window);
    const auto rd = doppler_spectrum(cal ? apply_calibration(cube, *cal) : cube, w);
    {
        const fs::path p = dir / "range_doppler.csv";
        std::ofstream os(p, std::ios::trunc);
        os << "range_index,frequency_hz,power\n";
        const auto psd = omnidirectional_psd(rd, 0);
        for (std::size_t r = 0; r < rd.n_ranges(); ++r)
            for (std::size_t k = 0; k < rd.n_bins(); ++k)
                os << r << ',' << fmt("%.9g", rd.frequency(k)) << ',' << fmt("%.9g", psd[r * rd.n_bins() + k])
                   << '\n';
        os.close();
        m.output("range_doppler_csv", p);
    }
    {
        const auto ds = beamform_series(cube, sc.scene.array, sc.scene.constants, grid, cal,
                                        parse_window(sc.processing.spatial_taper));
        const auto psd = directional_psd(ds, w);
        const std::size_t r = psd_range >= 0 ? static_cast<std::size_t>(psd_range) : cube.n_ranges() / 2;
        if (r >= cube.n_ranges()) throw Error(ErrorKind::usage, "--psd-range outside the cube");
        const fs::path p = dir / "bearing_doppler.csv";
        std::ofstream os(p, std::ios::trunc);
        os << "# range_index=" << r << '\n' << "bearing_deg,frequency_hz,power\n";
        for (std::size_t g = 0; g < psd.bearings.size(); ++g)
            for (std::size_t k = 0; k < psd.n_bins(); ++k)
                os << fmt("%.10g", rad2deg(psd.bearings[g])) << ',' << fmt("%.9g", psd.frequency(k)) << ','
                   << fmt("%.9g", psd.power(r, g, k)) << '\n';
        os.close();
        m.output("bearing_doppler_csv", p);
    }
}

bool known_method(const std::string& m) { return m == "bf" || m == "music" || m == "grouping"; }

int do_process(ProcessArgs a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (!a.method.empty() && !known_method(a.method))
        throw Error(ErrorKind::usage, "unknown method '" + a.method + "' (expected bf, music or grouping)");
    require_file(a.cube);
    const fs::path cfg = resolve_config(a.config);
    require_file(cfg);
    const auto sc = read_scenario(cfg);
    if (a.method.empty()) {
        a.method = sc.processing.method;
        if (!known_method(a.method))
            throw Error(ErrorKind::config, "processing.method: unknown method '" + a.method + "'");
    }
    const auto cube = read_cube(fs::path(a.cube));
    check_cube_matches(cube, sc, err);
    if (a.transmitter < 1 || a.transmitter > 2) throw Error(ErrorKind::usage, "--transmitter must be 1 or 2");
    if (a.transmitter == 2 && !sc.scene.second_tx) throw Error(ErrorKind::config, "scene.tx2: not set");

    const ProcessingConfig& p = sc.processing;
    const auto& geom = sc.scene.array;
    const auto& c = sc.scene.constants;
    const std::size_t N = geom.size();
    const double threshold = a.set_threshold ? a.threshold : p.music_threshold;
    const double band = a.set_band ? a.band : p.bragg_band_hz;
    const int sources = a.sources > 0 ? a.sources : p.music_sources;

    std::optional<CalibrationSolution> cal;
    if (!a.cal.empty()) {
        require_file(a.cal);
        cal = read_calibration(fs::path(a.cal));
        if (cal->size() != N) throw Error(ErrorKind::data, "calibration antenna count does not match the cube");
    }

    const auto grid = BearingGrid::uniform(p.bearing_min_deg, p.bearing_max_deg, p.bearing_step_deg);
    const auto cells = make_cell_grid(sc.scene.pair_for(a.transmitter - 1), geom, c,
                                      static_cast<int>(cube.n_ranges()), sc.scene.range_resolution, grid.bearings);

    Manifest m("process", args);
    m.input("cube", a.cube);
    m.input("config", cfg);
    if (cal) m.input("calibration", a.cal);
    json params = {{"method", a.method},
                   {"transmitter", a.transmitter},
                   {"bearing_min_deg", p.bearing_min_deg},
                   {"bearing_max_deg", p.bearing_max_deg},
                   {"bearing_step_deg", p.bearing_step_deg},
                   {"bragg_band_hz", band},
                   {"doppler_window", p.doppler_window}};

    VelocityMap map;
    if (a.method == "bf") {
        BraggPeakParams bp;
        bp.band_hz = band;
        bp.snr_threshold_db = p.bf_snr_db;
        const auto ds = beamform_series(cube, geom, c, grid, cal ? &*cal : nullptr, parse_window(p.spatial_taper));
        map = bf_velocity_map(directional_psd(ds, parse_window(p.doppler_window)), cells, c, bp);
        params["spatial_taper"] = p.spatial_taper;
        params["bf_snr_db"] = p.bf_snr_db;
    } else {
        const std::size_t L = p.segment_length ? p.segment_length : cube.n_chirps() / 4;
        const auto seg = segment_spectra(cal ? apply_calibration(cube, *cal) : cube, L, p.overlap,
                                         parse_window(p.doppler_window));
        params["segment_length"] = L;
        params["overlap"] = p.overlap;
        params["segments"] = seg.n_segments();
        params["music_threshold"] = threshold;
        params["music_sources"] = sources;
        if (a.method == "music") {
            MusicParams mp;
            mp.sources = std::min(sources, static_cast<int>(N) - 1);
            mp.threshold = threshold;
            mp.band_hz = band;
            map = df_velocity_map(seg, geom, c, cells, mp);
        } else {
            std::set<int> failed(sc.scene.failed_antennas.begin(), sc.scene.failed_antennas.end());
            for (int f : to_zero_based(a.failed, N, "--failed")) failed.insert(f);
            std::vector<int> detected;
            for (std::size_t n = 0; n < N; ++n) {
                double e = 0.0;
                for (std::size_t r = 0; r < cube.n_ranges(); ++r)
                    for (const cplx& v : cube.data.row(n, r)) e += std::norm(v);
                if (e == 0.0 && !failed.count(static_cast<int>(n))) detected.push_back(static_cast<int>(n));
            }
            if (!detected.empty()) {
                err << "warning: antennas " << antenna_list(detected) << " carry no signal; treated as failed\n";
                failed.insert(detected.begin(), detected.end());
            }
            const std::vector<int> failed_list(failed.begin(), failed.end());
            const int nmin = a.nmin > 0 ? a.nmin : p.n_min;
            const auto set = enumerate_subarrays(static_cast<int>(N), nmin, failed_list);
            auto gp = GroupParams::defaults(static_cast<int>(N), threshold);
            for (std::size_t len = 2; len < gp.by_length.size(); ++len)
                gp.by_length[len].sources = std::min(static_cast<int>(len) - 1, sources);
            gp.band_hz = band;
            gp.trim_outliers = p.trim_outliers;
            const auto runs = group_process(seg, geom, c, cells, set, gp);
            map = weighted_merge(runs, gp, cells);
            json run_list = json::array();
            std::size_t n_ok = 0;
            for (const auto& r : runs) {
                run_list.push_back(std::to_string(r.run.start + 1) + ".." + std::to_string(r.run.start + r.run.length));
                n_ok += r.ok;
                if (!r.ok) err << "warning: " << r.warning << '\n';
            }
            params["n_min"] = nmin;
            params["failed"] = antenna_list(failed_list);
            params["trim_outliers"] = p.trim_outliers;
            m.doc["runs"] = {{"count", runs.size()}, {"succeeded", n_ok}, {"subarrays", run_list}};
            out << runs.size() << " subarrays (N_min = " << nmin << ")\n";
        }
    }
    map.method = a.method;
    map.config_hash = cube.config_hash;
    map.calibration_hash = cal ? cal->hash() : Digest{};
    write_map_csv(fs::path(a.out), map);
    m.doc["parameters"] = params;
    m.output("map", a.out);
    if (!a.emit_psd.empty()) write_psd_files(a.emit_psd, cube, sc, grid, cal ? &*cal : nullptr, a.psd_range, m);
    m.doc["fill_ratio"] = fill_ratio(map);
    m.path = default_manifest(a.manifest, a.out);
    m.write();
    out << a.method << ": " << map.filled_count() << " cells filled, fill ratio " << fmt("%.4f", fill_ratio(map))
        << '\n';
    return 0;
}

// ------------------------------------------------------------ compare / rd-dump

int do_compare(const std::string& pa, const std::string& pb, const std::string& manifest,
               const std::vector<std::string>& args, std::ostream& out) {
    require_file(pa);
    require_file(pb);
    const auto a = read_map_csv(fs::path(pa));
    const auto b = read_map_csv(fs::path(pb));
    const auto cmp = compare_maps(a, b);
    out << "rmse_mps=" << fmt("%.6g", cmp.rmse) << '\n'
        << "common_cells=" << cmp.common << '\n'
        << "fill_ratio_a=" << fmt("%.6g", fill_ratio(a)) << '\n'
        << "fill_ratio_b=" << fmt("%.6g", fill_ratio(b)) << '\n'
        << "bearing_shift_bins=" << fmt("%.6g", cmp.bearing_shift_bins) << '\n'
        << "bearing_shift_deg=" << fmt("%.6g", cmp.bearing_shift_deg) << '\n';
    if (!manifest.empty()) {
        Manifest m("compare", args);
        m.input("map_a", pa);
        m.input("map_b", pb);
        m.doc["report"] = {{"rmse_mps", cmp.rmse},
                           {"common_cells", cmp.common},
                           {"bearing_shift_bins", cmp.bearing_shift_bins},
                           {"bearing_shift_deg", cmp.bearing_shift_deg}};
        m.path = manifest;
        m.write();
    }
    return 0;
}

int do_rd_dump(const std::string& cube_path, const std::string& outp, int antenna, const std::string& window,
               std::ostream& out) {
    require_file(cube_path);
    const auto cube = read_cube(fs::path(cube_path));
    const auto idx = to_zero_based({antenna}, cube.n_antennas(), "--antenna");
    const auto rd = doppler_spectrum(cube, parse_window(window));
    const auto psd = omnidirectional_psd(rd, static_cast<std::size_t>(idx[0]));
    std::ofstream os(outp, std::ios::trunc);
    if (!os) throw Error(ErrorKind::usage, "cannot write " + outp);
    os << "range_index,frequency_hz,power\n";
    for (std::size_t r = 0; r < rd.n_ranges(); ++r)
        for (std::size_t k = 0; k < rd.n_bins(); ++k)
            os << r << ',' << fmt("%.9g", rd.frequency(k)) << ',' << fmt("%.9g", psd[r * rd.n_bins() + k]) << '\n';
    out << "wrote " << outp << '\n';
    return 0;
}

// ------------------------------------------------------------ replay

int do_replay(const std::string& manifest_path, int threads, std::ostream& out, std::ostream& err) {
    require_file(manifest_path);
    json doc;
    try {
        std::ifstream is(manifest_path);
        doc = json::parse(is);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::data, std::string("manifest: ") + e.what());
    }
    if (!doc.contains("argv") || !doc["argv"].is_array() || !doc.contains("outputs"))
        throw Error(ErrorKind::data, "manifest: missing argv or outputs");
    if (doc.value("subcommand", "") == "replay") throw Error(ErrorKind::usage, "cannot replay a replay");

    for (const auto& [key, in] : doc["inputs"].items()) {
        const std::string path = in.at("path");
        require_file(path);
        if (file_digest(path) != in.at("sha256").get<std::string>())
            throw Error(ErrorKind::data, "input " + key + " (" + path + ") changed since the recorded run");
    }

    std::vector<std::string> argv{"bhfr"};
    for (const auto& s : doc["argv"]) argv.push_back(s.get<std::string>());
    if (threads > 0) {
        std::vector<std::string> cleaned{argv[0]};
        for (std::size_t i = 1; i < argv.size(); ++i) {
            if (argv[i] == "--threads") {
                ++i;
                continue;
            }
            if (argv[i].rfind("--threads=", 0) == 0) continue;
            cleaned.push_back(argv[i]);
        }
        cleaned.push_back("--threads");
        cleaned.push_back(std::to_string(threads));
        argv = std::move(cleaned);
    }

    std::ostringstream sink;
    const int rc = run(argv, sink, err);
    if (rc != 0) return rc;

    std::size_t mismatches = 0;
    for (const auto& [key, o] : doc["outputs"].items()) {
        const std::string path = o.at("path");
        const bool same = fs::exists(path) && file_digest(path) == o.at("sha256").get<std::string>();
        out << key << ' ' << path << ' ' << (same ? "identical" : "DIFFERS") << '\n';
        mismatches += !same;
    }
    if (mismatches) throw Error(ErrorKind::comparison, std::to_string(mismatches) + " output(s) differ from manifest");
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bistatic HF radar surface-current processing"};
    app.name("bhfr");
    app.footer(
        "Exit codes: 0 ok, 2 usage (bad flags, missing files), 3 config, 4 data, 5 comparison.\n"
        "Relative --config paths that do not exist are looked up in $BHFR_CONFIG_DIR.");
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: available parallelism)");

    SimulateArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Synthesize a chirp cube from a scene config");
    s_sim->add_option("--config", sim.config, "Scene config")->required();
    s_sim->add_option("--out", sim.out, "Output cube")->required();
    s_sim->add_option("--out-tx2", sim.out_tx2, "Output cube for the second transmitter");
    s_sim->add_option("--manifest", sim.manifest, "Manifest path (default <out>.manifest.json)");
    s_sim->add_option("--threads", threads);

    CalibrateArgs calib;
    auto* s_cal = app.add_subcommand("calibrate", "Self-calibrate antenna phases from the direct signal");
    s_cal->add_option("--cube", calib.cube, "Input cube")->required();
    s_cal->add_option("--config", calib.config, "Scene config (site and array)")->required();
    s_cal->add_option("--out", calib.out, "Output calibration file")->required();
    s_cal->add_option("--transmitter", calib.transmitter, "Transmitter whose direct path is used (1 or 2)");
    s_cal->add_option("--range-cell", calib.range_cell, "Range cell holding the direct path");
    s_cal->add_option("--snr-floor", calib.snr_floor_db, "Direct-signal SNR floor in dB");
    s_cal->add_option("--window", calib.window, "Doppler window");
    s_cal->add_flag("--equalize-amplitude", calib.equalize_amplitude, "Also normalize per-antenna amplitudes");
    s_cal->add_option("--manifest", calib.manifest);
    s_cal->add_option("--threads", threads);

    ProcessArgs proc;
    auto* s_proc = app.add_subcommand("process", "Build a surface-current velocity map");
    s_proc->add_option("--cube", proc.cube, "Input cube")->required();
    s_proc->add_option("--config", proc.config, "Scene config")->required();
    s_proc->add_option("--method", proc.method, "bf, music or grouping (default: [processing] method)");
    s_proc->add_option("--cal", proc.cal, "Calibration file");
    s_proc->add_option("--out", proc.out, "Output map CSV")->required();
    s_proc->add_option("--nmin", proc.nmin, "Minimal subarray length for grouping");
    s_proc->add_option("--failed", proc.failed, "Failed antennas, 1-based")->delimiter(',');
    s_proc->add_option("--sources", proc.sources, "MUSIC source count");
    auto* o_thr = s_proc->add_option("--threshold", proc.threshold, "MUSIC factor threshold");
    auto* o_band = s_proc->add_option("--band", proc.band, "Half-width of the Bragg search band in Hz");
    s_proc->add_option("--transmitter", proc.transmitter, "Transmitter geometry to use (1 or 2)");
    s_proc->add_option("--emit-psd", proc.emit_psd, "Directory for range-Doppler and bearing-Doppler CSVs");
    s_proc->add_option("--psd-range", proc.psd_range, "Range cell of the bearing-Doppler dump");
    s_proc->add_option("--manifest", proc.manifest);
    s_proc->add_option("--threads", threads);

    std::string map_a, map_b, cmp_manifest;
    auto* s_cmp = app.add_subcommand("compare", "Compare two velocity maps");
    s_cmp->add_option("map_a", map_a)->required();
    s_cmp->add_option("map_b", map_b)->required();
    s_cmp->add_option("--manifest", cmp_manifest);

    std::string rd_cube, rd_out, rd_window = "hamming";
    int rd_antenna = 1;
    auto* s_rd = app.add_subcommand("rd-dump", "Write one antenna's range-Doppler power as CSV");
    s_rd->add_option("--cube", rd_cube)->required();
    s_rd->add_option("--out", rd_out)->required();
    s_rd->add_option("--antenna", rd_antenna, "Antenna, 1-based");
    s_rd->add_option("--window", rd_window);

    std::string replay_manifest;
    auto* s_replay = app.add_subcommand("replay", "Re-run a recorded command and check its outputs");
    s_replay->add_option("manifest", replay_manifest)->required();
    s_replay->add_option("--threads", threads);

    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error[usage]: " << one_line(e.what()) << '\n';
        return static_cast<int>(ErrorKind::usage);
    }

    if (threads > 0) set_default_threads(threads);
    try {
        int rc = 0;
        if (s_sim->parsed()) {
            rc = do_simulate(sim, args, out);
        } else if (s_cal->parsed()) {
            rc = do_calibrate(calib, args, out, err);
        } else if (s_proc->parsed()) {
            proc.set_threshold = o_thr->count() > 0;
            proc.set_band = o_band->count() > 0;
            rc = do_process(proc, args, out, err);
        } else if (s_cmp->parsed()) {
            rc = do_compare(map_a, map_b, cmp_manifest, args, out);
        } else if (s_rd->parsed()) {
            rc = do_rd_dump(rd_cube, rd_out, rd_antenna, rd_window, out);
        } else if (s_replay->parsed()) {
            rc = do_replay(replay_manifest, static_cast<int>(threads), out, err);
        }
        if (threads > 0) set_default_threads(0);
        return rc;
    } catch (const Error& e) {
        if (threads > 0) set_default_threads(0);
        err << "error[" << kind_name(e.kind()) << "]: " << one_line(e.what()) << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        if (threads > 0) set_default_threads(0);
        err << "error[data]: " << one_line(e.what()) << '\n';
        return static_cast<int>(ErrorKind::data);
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace bhfr::cli
