// SPDX-License-Identifier: Apache-2.0
#include "bhfr/mapio.hpp"

#include <bit>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace bhfr {

static_assert(std::endian::native == std::endian::little, "cube I/O assumes a little-endian host");

namespace {

constexpr std::size_t kHeaderSize = 64;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string num17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return fmt("%.17g", v);
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
}

template <class T>
void put(std::string& buf, T v) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <class T>
T get(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

struct CubeHeader {
    char magic[4];
    std::uint16_t version;
    std::uint16_t n_antennas;
    std::uint32_t n_ranges;
    std::uint32_t n_samples;
    double chirp_duration;
    std::uint64_t seed;
    Digest hash;
};

void write_header(std::ostream& os, const CubeHeader& h) {
    std::string buf;
    buf.append(h.magic, 4);
    put(buf, h.version);
    put(buf, h.n_antennas);
    put(buf, h.n_ranges);
    put(buf, h.n_samples);
    put(buf, h.chirp_duration);
    put(buf, h.seed);
    buf.append(reinterpret_cast<const char*>(h.hash.data()), h.hash.size());
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

CubeHeader read_header(std::istream& is, const char* expected_magic) {
    char raw[kHeaderSize];
    is.read(raw, kHeaderSize);
    const auto got = static_cast<std::uint64_t>(is.gcount());
    if (got < 4 || std::memcmp(raw, expected_magic, 4) != 0)
        throw ParseError(std::string("bad magic, expected \"") + expected_magic + "\"", 0);
    if (got < kHeaderSize) throw ParseError("truncated header", got);
    CubeHeader h{};
    std::memcpy(h.magic, raw, 4);
    h.version = get<std::uint16_t>(raw + 4);
    if ((h.version >> 8) != (kCubeFormatVersion >> 8))
        throw ParseError("unsupported cube format major version " + std::to_string(h.version >> 8), 4);
    h.n_antennas = get<std::uint16_t>(raw + 6);
    h.n_ranges = get<std::uint32_t>(raw + 8);
    h.n_samples = get<std::uint32_t>(raw + 12);
    h.chirp_duration = get<double>(raw + 16);
    h.seed = get<std::uint64_t>(raw + 24);
    std::memcpy(h.hash.data(), raw + 32, 32);
    if (h.n_antennas == 0) throw ParseError("zero antennas", 6);
    if (!(h.chirp_duration > 0.0)) throw ParseError("non-positive chirp duration", 16);
    return h;
}

void write_payload(std::ostream& os, const Array3<cplx>& data) {
    std::vector<float> buf(2 * data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        buf[2 * i] = static_cast<float>(data.raw()[i].real());
        buf[2 * i + 1] = static_cast<float>(data.raw()[i].imag());
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Array3<cplx> read_payload(std::istream& is, const CubeHeader& h) {
    Array3<cplx> data(h.n_antennas, h.n_ranges, h.n_samples);
    std::vector<float> buf(2 * data.size());
    const auto want = static_cast<std::streamsize>(buf.size() * sizeof(float));
    is.read(reinterpret_cast<char*>(buf.data()), want);
    if (is.gcount() != want)
        throw ParseError("truncated payload", kHeaderSize + static_cast<std::uint64_t>(is.gcount()));
    for (std::size_t i = 0; i < data.size(); ++i) data.raw()[i] = {buf[2 * i], buf[2 * i + 1]};
    return data;
}

CubeHeader make_header(const char* magic, std::size_t n, std::size_t r, std::size_t t, double dt, std::uint64_t seed,
                       const Digest& hash) {
    if (n > std::numeric_limits<std::uint16_t>::max() || r > std::numeric_limits<std::uint32_t>::max() ||
        t > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorKind::data, "cube dimensions exceed the file format limits");
    CubeHeader h{};
    std::memcpy(h.magic, magic, 4);
    h.version = kCubeFormatVersion;
    h.n_antennas = static_cast<std::uint16_t>(n);
    h.n_ranges = static_cast<std::uint32_t>(r);
    h.n_samples = static_cast<std::uint32_t>(t);
    h.chirp_duration = dt;
    h.seed = seed;
    h.hash = hash;
    return h;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw Error(ErrorKind::usage, "cannot write " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream is(path, mode);
    if (!is) throw Error(ErrorKind::usage, "cannot open " + path.string());
    return is;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_kv_line(const std::string& line) {
    std::map<std::string, std::string> kv;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

Digest parse_digest(const std::string& hex, std::uint64_t offset) {
    Digest d{};
    if (hex.size() != 64) throw ParseError("bad digest", offset);
    for (std::size_t i = 0; i < 32; ++i) {
        unsigned v = 0;
        if (std::sscanf(hex.c_str() + 2 * i, "%2x", &v) != 1) throw ParseError("bad digest", offset);
        d[i] = static_cast<std::uint8_t>(v);
    }
    return d;
}

}  // namespace

// ---------------------------------------------------------------- cubes

void write_cube(std::ostream& os, const ChirpCube& cube) {
    write_header(os, make_header("BHFR", cube.n_antennas(), cube.n_ranges(), cube.n_chirps(), cube.chirp_duration,
                                 cube.seed, cube.config_hash));
    write_payload(os, cube.data);
}

ChirpCube read_cube(std::istream& is) {
    const auto h = read_header(is, "BHFR");
    ChirpCube cube;
    cube.data = read_payload(is, h);
    cube.chirp_duration = h.chirp_duration;
    cube.seed = h.seed;
    cube.config_hash = h.hash;
    return cube;
}

void write_cube(const std::filesystem::path& path, const ChirpCube& cube) {
    auto os = open_out(path, std::ios::binary);
    write_cube(os, cube);
    if (!os) throw Error(ErrorKind::data, "write failed: " + path.string());
}

ChirpCube read_cube(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    return read_cube(is);
}

void write_rd_cube(std::ostream& os, const RangeDopplerCube& rd) {
    write_header(os, make_header("BHRD", rd.n_antennas(), rd.n_ranges(), rd.n_bins(), rd.chirp_duration, 0,
                                 rd.config_hash));
    write_payload(os, rd.spectra);
}

RangeDopplerCube read_rd_cube(std::istream& is) {
    const auto h = read_header(is, "BHRD");
    RangeDopplerCube rd;
    rd.spectra = read_payload(is, h);
    rd.chirp_duration = h.chirp_duration;
    rd.doppler_bin_hz = h.n_samples ? 1.0 / (h.n_samples * h.chirp_duration) : 0.0;
    rd.config_hash = h.hash;
    return rd;
}

ChirpCube quantize_like_file(const ChirpCube& cube) {
    ChirpCube out = cube;
    for (auto& v : out.data.raw()) v = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
    return out;
}

// ---------------------------------------------------------------- maps

void write_map_csv(std::ostream& os, const VelocityMap& map) {
    const double step = map.bearings.size() > 1 ? rad2deg(map.bearings.back() - map.bearings.front()) /
                                                      static_cast<double>(map.bearings.size() - 1)
                                                : 1.0;
    const double bmin = map.bearings.empty() ? 0.0 : rad2deg(map.bearings.front());
    os << "# bhfr-map version=" << kMapFormatVersion << " method=" << map.method << " n_ranges=" << map.n_ranges
       << " n_bearings=" << map.bearings.size() << " bearing_min_deg=" << fmt("%.12g", bmin)
       << " bearing_step_deg=" << fmt("%.12g", step) << " config_hash=" << to_hex(map.config_hash)
       << " calibration_hash=" << to_hex(map.calibration_hash) << "\n";
    os << "range_index,bearing_deg,x_m,y_m,velocity_mps,weight,n_contributions,method\n";
    for (int r = 0; r < map.n_ranges; ++r) {
        for (std::size_t g = 0; g < map.n_bearings(); ++g) {
            const auto& c = map.at(r, g);
            if (!c.filled) continue;
            const Vec2 p = map.positions[map.index(r, g)];
            os << r << ',' << fmt("%.10g", rad2deg(map.bearings[g])) << ',' << fmt("%.3f", p.x) << ','
               << fmt("%.3f", p.y) << ',' << num17(c.velocity) << ',' << num17(c.weight) << ',' << c.n_contributions
               << ',' << map.method << '\n';
        }
    }
}

VelocityMap read_map_csv(std::istream& is) {
    std::uint64_t offset = 0;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# bhfr-map", 0) != 0) throw ParseError("missing map provenance line", 0);
    const auto kv = parse_kv_line(line);
    auto field = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(std::string("provenance line lacks ") + key, 0);
        return it->second;
    };
    VelocityMap map;
    try {
        if (std::stoi(field("version")) != kMapFormatVersion) throw ParseError("unsupported map format version", 0);
        map.method = field("method");
        map.n_ranges = std::stoi(field("n_ranges"));
        const auto nb = static_cast<std::size_t>(std::stoul(field("n_bearings")));
        const double bmin = parse_double(field("bearing_min_deg"));
        const double step = parse_double(field("bearing_step_deg"));
        for (std::size_t i = 0; i < nb; ++i) map.bearings.push_back(deg2rad(bmin + static_cast<double>(i) * step));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("malformed provenance line", 0);
    }
    map.config_hash = parse_digest(field("config_hash"), 0);
    map.calibration_hash = parse_digest(field("calibration_hash"), 0);
    const std::size_t total = static_cast<std::size_t>(map.n_ranges) * map.bearings.size();
    map.cells.assign(total, {});
    map.valid.assign(total, true);
    map.positions.assign(total, {});

    offset += line.size() + 1;
    if (!std::getline(is, line) ||
        trim(line) != "range_index,bearing_deg,x_m,y_m,velocity_mps,weight,n_contributions,method")
        throw ParseError("bad column header", offset);
    offset += line.size() + 1;

    while (std::getline(is, line)) {
        if (trim(line).empty()) {
            offset += line.size() + 1;
            continue;
        }
        const auto f = split(trim(line), ',');
        if (f.size() != 8) throw ParseError("expected 8 columns", offset);
        try {
            const int r = std::stoi(f[0]);
            if (r < 0 || r >= map.n_ranges) throw ParseError("range index out of grid", offset);
            const std::size_t g = map.nearest_bearing(deg2rad(parse_double(f[1])));
            auto& c = map.at(r, g);
            map.positions[map.index(r, g)] = {parse_double(f[2]), parse_double(f[3])};
            c.velocity = parse_double(f[4]);
            c.weight = parse_double(f[5]);
            c.n_contributions = std::stoi(f[6]);
            c.filled = true;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("malformed map row", offset);
        }
        offset += line.size() + 1;
    }
    return map;
}

void write_map_csv(const std::filesystem::path& path, const VelocityMap& map) {
    auto os = open_out(path);
    write_map_csv(os, map);
}

VelocityMap read_map_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_map_csv(is);
}

// ---------------------------------------------------------------- calibration

void write_calibration(std::ostream& os, const CalibrationSolution& cal) {
    os << "# bhfr-calibration version=" << kCalibrationFormatVersion << "\n";
    os << "# reference_antenna=" << cal.reference + 1 << "\n";
    os << "# source_bearing_deg=" << num17(rad2deg(cal.source_bearing)) << "\n";
    os << "# source_bearing_rad=" << num17(cal.source_bearing) << "\n";
    os << "# config_hash=" << to_hex(cal.config_hash) << "\n";
    const bool with_gain = !cal.gains.empty();
    os << "antenna,correction_deg,snr_db,status,correction_rad" << (with_gain ? ",gain" : "") << "\n";
    for (std::size_t n = 0; n < cal.size(); ++n) {
        std::string status = "ok";
        if (!cal.has_correction[n]) status = "dead";
        os << n + 1 << ',' << fmt("%.6f", rad2deg(cal.corrections[n])) << ',' << num17(cal.snr_db[n]) << ','
           << status << ',' << num17(cal.corrections[n]);
        if (with_gain) os << ',' << num17(cal.gains[n]);
        os << '\n';
    }
}

CalibrationSolution read_calibration(std::istream& is) {
    CalibrationSolution cal;
    std::uint64_t offset = 0;
    std::string line;
    bool version_seen = false, header_seen = false, with_gain = false;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            offset += line.size() + 1;
            continue;
        }
        if (t[0] == '#') {
            const auto kv = parse_kv_line(t.substr(1));
            try {
                if (auto it = kv.find("version"); it != kv.end()) {
                    if (std::stoi(it->second) != kCalibrationFormatVersion)
                        throw ParseError("unsupported calibration format version", offset);
                    version_seen = true;
                }
                if (auto it = kv.find("reference_antenna"); it != kv.end()) cal.reference = std::stoi(it->second) - 1;
                if (auto it = kv.find("source_bearing_rad"); it != kv.end())
                    cal.source_bearing = parse_double(it->second);
                if (auto it = kv.find("config_hash"); it != kv.end())
                    cal.config_hash = parse_digest(it->second, offset);
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception&) {
                throw ParseError("malformed provenance line", offset);
            }
        } else if (!header_seen) {
            with_gain = t == "antenna,correction_deg,snr_db,status,correction_rad,gain";
            if (!with_gain && t != "antenna,correction_deg,snr_db,status,correction_rad")
                throw ParseError("bad column header", offset);
            header_seen = true;
        } else {
            const auto f = split(t, ',');
            const std::size_t columns = with_gain ? 6 : 5;
            if (f.size() != columns) throw ParseError("expected " + std::to_string(columns) + " columns", offset);
            try {
                const int a = std::stoi(f[0]);
                if (a != static_cast<int>(cal.size()) + 1) throw ParseError("antennas must be listed in order", offset);
                cal.snr_db.push_back(parse_double(f[2]));
                if (f[3] != "ok" && f[3] != "dead") throw ParseError("unknown status '" + f[3] + "'", offset);
                cal.has_correction.push_back(f[3] == "ok");
                cal.corrections.push_back(parse_double(f[4]));
                if (with_gain) cal.gains.push_back(parse_double(f[5]));
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception&) {
                throw ParseError("malformed calibration row", offset);
            }
        }
        offset += line.size() + 1;
    }
    if (!version_seen) throw ParseError("missing calibration version line", 0);
    if (!header_seen || cal.size() < 2) throw ParseError("calibration has no antenna rows", offset);
    if (cal.reference < 0 || static_cast<std::size_t>(cal.reference) >= cal.size())
        throw ParseError("reference antenna out of range", 0);
    return cal;
}

void write_calibration(const std::filesystem::path& path, const CalibrationSolution& cal) {
    auto os = open_out(path);
    write_calibration(os, cal);
}

CalibrationSolution read_calibration(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_calibration(is);
}

// ---------------------------------------------------------------- scenario

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"scene",
         {"frequency_hz", "n_chirps", "chirp_duration_s", "n_ranges", "range_resolution_m", "noise_sigma", "seed",
          "direct_amplitude", "tx", "rx", "tx2"}},
        {"array",
         {"count", "spacing_wavelengths", "spacing_m", "normal_azimuth_deg", "positions", "failed",
          "perturbation_deg", "perturbation_uniform_deg", "perturbation_seed", "perturbation_amplitude",
          "perturbation_slope"}},
        {"source",
         {"range_index", "bearing_deg", "amplitude", "doppler_hz", "velocity_mps", "bragg", "linewidth_hz",
          "transmitter"}},
        {"processing",
         {"method", "doppler_window", "spatial_taper", "segment_length", "overlap", "bearing_min_deg",
          "bearing_max_deg", "bearing_step_deg", "bragg_band_hz", "bf_snr_db", "music_sources", "music_threshold",
          "n_min", "trim_outliers"}},
    };
    return keys;
}

std::string section_kind(const std::string& name) { return name.rfind("source", 0) == 0 ? "source" : name; }

template <class T>
T value(const pt::ptree& sec, const std::string& section, const std::string& key, T fallback) {
    const auto v = sec.get_optional<std::string>(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        T out;
        if constexpr (std::is_same_v<T, double>) {
            out = std::stod(*v, &pos);
        } else if constexpr (std::is_same_v<T, bool>) {
            const std::string s = trim(*v);
            if (s == "true" || s == "1" || s == "yes") return true;
            if (s == "false" || s == "0" || s == "no") return false;
            throw std::invalid_argument(s);
        } else if constexpr (std::is_same_v<T, std::string>) {
            return trim(*v);
        } else {
            const long long x = std::stoll(*v, &pos);
            out = static_cast<T>(x);
        }
        if (trim(v->substr(pos)).size() != 0) throw std::invalid_argument(*v);
        return out;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, section + "." + key + ": cannot parse '" + *v + "'");
    }
}

std::vector<double> list(const pt::ptree& sec, const std::string& section, const std::string& key, char sep = ',') {
    std::vector<double> out;
    const auto v = sec.get_optional<std::string>(key);
    if (!v) return out;
    for (const auto& tok : split(*v, sep)) {
        const auto t = trim(tok);
        if (t.empty()) continue;
        try {
            out.push_back(parse_double(t));
        } catch (const std::exception&) {
            throw Error(ErrorKind::config, section + "." + key + ": cannot parse '" + t + "'");
        }
    }
    return out;
}

Vec2 point(const pt::ptree& sec, const std::string& section, const std::string& key, Vec2 fallback) {
    if (!sec.get_optional<std::string>(key)) return fallback;
    const auto v = list(sec, section, key);
    if (v.size() != 2) throw Error(ErrorKind::config, section + "." + key + ": expected 'x, y'");
    return {v[0], v[1]};
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream ss(text);
        pt::read_ini(ss, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::config, "line " + std::to_string(e.line()) + ": " + e.message());
    }

    for (const auto& [name, sec] : tree) {
        const auto kind = section_kind(name);
        const auto it = known_keys().find(kind);
        if (it == known_keys().end()) throw Error(ErrorKind::config, "unknown section [" + name + "]");
        for (const auto& [key, _] : sec)
            if (!it->second.count(key)) throw Error(ErrorKind::config, name + "." + key + ": unknown key");
    }

    ScenarioFile out;
    out.text = text;
    SceneConfig& s = out.scene;
    const pt::ptree empty;
    const auto& scene = tree.get_child("scene", empty);
    const auto& array = tree.get_child("array", empty);

    s.constants = RadarConstants::from_frequency(value(scene, "scene", "frequency_hz", kDefaultRadarFrequency));
    s.n_chirps = value(scene, "scene", "n_chirps", s.n_chirps);
    s.chirp_duration = value(scene, "scene", "chirp_duration_s", s.chirp_duration);
    s.n_ranges = value(scene, "scene", "n_ranges", s.n_ranges);
    s.range_resolution = value(scene, "scene", "range_resolution_m", s.range_resolution);
    s.noise_sigma = value(scene, "scene", "noise_sigma", s.noise_sigma);
    s.seed = value<std::uint64_t>(scene, "scene", "seed", s.seed);
    if (scene.get_optional<std::string>("direct_amplitude"))
        s.direct_amplitude = value(scene, "scene", "direct_amplitude", 0.0);
    s.site.tx = point(scene, "scene", "tx", s.site.tx);
    s.site.rx = point(scene, "scene", "rx", s.site.rx);
    if (scene.get_optional<std::string>("tx2")) s.second_tx = point(scene, "scene", "tx2", {});

    const int count = value(array, "array", "count", kDefaultAntennaCount);
    const double normal = deg2rad(value(array, "array", "normal_azimuth_deg", 0.0));
    if (array.get_optional<std::string>("positions")) {
        std::vector<Vec2> pos;
        const auto raw = array.get<std::string>("positions");
        for (const auto& item : split(raw, ';')) {
            if (trim(item).empty()) continue;
            const auto xy = split(item, ',');
            if (xy.size() != 2) throw Error(ErrorKind::config, "array.positions: expected 'x, y; x, y; ...'");
            try {
                pos.push_back({parse_double(trim(xy[0])), parse_double(trim(xy[1]))});
            } catch (const std::exception&) {
                throw Error(ErrorKind::config, "array.positions: cannot parse '" + item + "'");
            }
        }
        if (pos.size() < 2) throw Error(ErrorKind::config, "array.positions: need at least 2 antennas");
        const Vec2 origin = pos[0];
        for (auto& p : pos) p = p - origin;
        s.array = ArrayGeometry(std::move(pos), normal);
    } else {
        if (count < 2) throw Error(ErrorKind::config, "array.count: need at least 2 antennas");
        double spacing = value(array, "array", "spacing_m", 0.0);
        if (spacing == 0.0)
            spacing = value(array, "array", "spacing_wavelengths", kDefaultSpacingWavelengths) * s.constants.wavelength;
        if (!(spacing > 0.0)) throw Error(ErrorKind::config, "array.spacing_m: must be positive");
        s.array = ArrayGeometry::linear(count, spacing, normal);
    }
    const std::size_t N = s.array.size();

    for (double f : list(array, "array", "failed")) {
        const int idx = static_cast<int>(f) - 1;
        if (idx < 0 || static_cast<std::size_t>(idx) >= N || static_cast<double>(idx + 1) != f)
            throw Error(ErrorKind::config, "array.failed: antenna numbers are 1-based integers up to count");
        s.failed_antennas.push_back(idx);
    }

    const auto pert = list(array, "array", "perturbation_deg");
    const auto amp = list(array, "array", "perturbation_amplitude");
    const auto slope = list(array, "array", "perturbation_slope");
    if (array.get_optional<std::string>("perturbation_uniform_deg")) {
        if (!pert.empty())
            throw Error(ErrorKind::config, "array.perturbation_uniform_deg: conflicts with perturbation_deg");
        const double max_deg = value(array, "array", "perturbation_uniform_deg", 0.0);
        s.perturbations = uniform_phase_perturbations(
            N, deg2rad(max_deg), value<std::uint64_t>(array, "array", "perturbation_seed", s.seed));
    } else if (!pert.empty()) {
        if (pert.size() != N) throw Error(ErrorKind::config, "array.perturbation_deg: need one entry per antenna");
        s.perturbations.resize(N);
        for (std::size_t n = 0; n < N; ++n) s.perturbations[n].phase = deg2rad(pert[n]);
    }
    if (!amp.empty() || !slope.empty()) {
        if (s.perturbations.empty()) s.perturbations.resize(N);
        if (!amp.empty() && amp.size() != N)
            throw Error(ErrorKind::config, "array.perturbation_amplitude: need one entry per antenna");
        if (!slope.empty() && slope.size() != N)
            throw Error(ErrorKind::config, "array.perturbation_slope: need one entry per antenna");
        for (std::size_t n = 0; n < N; ++n) {
            if (!amp.empty()) s.perturbations[n].amplitude = amp[n];
            if (!slope.empty()) s.perturbations[n].bearing_slope = slope[n];
        }
    }

    for (const auto& [name, sec] : tree) {
        if (section_kind(name) != "source") continue;
        Source src;
        src.range_index = value(sec, name, "range_index", -1);
        src.bearing = deg2rad(value(sec, name, "bearing_deg", 0.0));
        src.amplitude = value(sec, name, "amplitude", 1.0);
        src.linewidth_hz = value(sec, name, "linewidth_hz", 0.0);
        src.transmitter = value(sec, name, "transmitter", 1) - 1;
        if (src.transmitter < 0 || src.transmitter > 1)
            throw Error(ErrorKind::config, name + ".transmitter: must be 1 or 2");
        if (src.transmitter == 1 && !s.second_tx)
            throw Error(ErrorKind::config, name + ".transmitter: scene.tx2 is not set");
        if (src.range_index < 0 || src.range_index >= s.n_ranges)
            throw Error(ErrorKind::config, name + ".range_index: outside [0, n_ranges)");
        const bool has_doppler = sec.get_optional<std::string>("doppler_hz").has_value();
        const bool has_velocity = sec.get_optional<std::string>("velocity_mps").has_value();
        if (has_doppler == has_velocity)
            throw Error(ErrorKind::config, name + ": give exactly one of doppler_hz or velocity_mps");
        if (has_doppler) {
            src.doppler_hz = value(sec, name, "doppler_hz", 0.0);
        } else {
            const SitePair pair = s.pair_for(src.transmitter);
            RadarCell cell;
            try {
                cell = cell_from_range_bearing(pair, s.array, s.constants, src.range_index, s.range_resolution,
                                               src.bearing);
            } catch (const Error& e) {
                throw Error(ErrorKind::config, name + ".range_index: " + e.what());
            }
            if (!cell.valid) throw Error(ErrorKind::config, name + ": bistatic angle too close to pi/2");
            const int bragg = value(sec, name, "bragg", 1);
            if (bragg != 1 && bragg != -1) throw Error(ErrorKind::config, name + ".bragg: must be +1 or -1");
            src.doppler_hz = doppler_for_velocity(s.constants, value(sec, name, "velocity_mps", 0.0),
                                                  cell.bistatic_angle, bragg);
        }
        s.sources.push_back(src);
    }

    const auto& proc = tree.get_child("processing", empty);
    ProcessingConfig& p = out.processing;
    p.method = value(proc, "processing", "method", p.method);
    p.doppler_window = value(proc, "processing", "doppler_window", p.doppler_window);
    p.spatial_taper = value(proc, "processing", "spatial_taper", p.spatial_taper);
    p.segment_length = value<std::size_t>(proc, "processing", "segment_length", p.segment_length);
    p.overlap = value(proc, "processing", "overlap", p.overlap);
    p.bearing_min_deg = value(proc, "processing", "bearing_min_deg", p.bearing_min_deg);
    p.bearing_max_deg = value(proc, "processing", "bearing_max_deg", p.bearing_max_deg);
    p.bearing_step_deg = value(proc, "processing", "bearing_step_deg", p.bearing_step_deg);
    p.bragg_band_hz = value(proc, "processing", "bragg_band_hz", p.bragg_band_hz);
    p.bf_snr_db = value(proc, "processing", "bf_snr_db", p.bf_snr_db);
    p.music_sources = value(proc, "processing", "music_sources", p.music_sources);
    p.music_threshold = value(proc, "processing", "music_threshold", p.music_threshold);
    p.n_min = value(proc, "processing", "n_min", p.n_min);
    p.trim_outliers = value(proc, "processing", "trim_outliers", p.trim_outliers);

    s.config_hash = sha256(text);
    s.validate();
    return out;
}

ScenarioFile read_scenario(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::usage, "cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace bhfr
