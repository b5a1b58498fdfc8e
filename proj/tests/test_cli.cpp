// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bhfr/cli.hpp"
#include "oracles.hpp"

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "bhfr");
    std::ostringstream out, err;
    const int code = bhfr::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kScene = R"([scene]
n_chirps = 256
n_ranges = 8
noise_sigma = 0.05
seed = 3

[array]
count = 12
perturbation_uniform_deg = 40
perturbation_seed = 2

[source1]
range_index = 5
bearing_deg = -10
velocity_mps = 0.3

[source2]
range_index = 6
bearing_deg = 25
velocity_mps = -0.2
bragg = -1

[processing]
segment_length = 64
)";

}  // namespace

TEST_CASE("usage and config errors") {
    const auto dir = oracle::scratch_dir("errors");
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == std::string(bhfr::cli::kVersion) + "\n");
    CHECK(run({"--help"}).code == 0);

    auto r = run({"simulate", "--config", (dir / "none.ini").string(), "--out", (dir / "x.cube").string()});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error[usage]:", 0) == 0);

    write_text(dir / "bad.ini", "[scene]\nn_chirps = 0\n");
    r = run({"simulate", "--config", (dir / "bad.ini").string(), "--out", (dir / "x.cube").string()});
    CHECK(r.code == 3);
    CHECK(r.err == "error[config]: scene.n_chirps: must be positive\n");
    CHECK_FALSE(std::filesystem::exists(dir / "x.cube"));
}

TEST_CASE("simulate, calibrate, process, compare") {
    const auto dir = oracle::scratch_dir("pipeline");
    const auto ini = (dir / "scene.ini").string();
    write_text(ini, kScene);
    const auto cube = (dir / "scene.cube").string();

    auto r = run({"simulate", "--config", ini, "--out", cube});
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::file_size(cube) == 64 + 12 * 8 * 256 * 8);
    const auto manifest = nlohmann::json::parse(oracle::read_bytes(cube + ".manifest.json"));
    CHECK(manifest["subcommand"] == "simulate");
    CHECK(manifest["outputs"]["cube"]["sha256"].get<std::string>().size() == 64);

    const auto cal = (dir / "cal.txt").string();
    r = run({"calibrate", "--cube", cube, "--config", ini, "--out", cal});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("antenna  correction_deg") != std::string::npos);
    CHECK(oracle::read_bytes(cal).rfind("# ", 0) == 0);

    const auto bf_raw = (dir / "bf_raw.csv").string(), bf_cal = (dir / "bf_cal.csv").string();
    REQUIRE(run({"process", "--cube", cube, "--config", ini, "--method", "bf", "--out", bf_raw}).code == 0);
    r = run({"process", "--cube", cube, "--config", ini, "--method", "bf", "--cal", cal, "--out", bf_cal,
             "--emit-psd", (dir / "psd").string()});
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(dir / "psd" / "range_doppler.csv"));
    CHECK(std::filesystem::exists(dir / "psd" / "bearing_doppler.csv"));

    r = run({"compare", bf_cal, bf_cal});
    CHECK(r.code == 0);
    CHECK(r.out.find("rmse_mps=0\n") != std::string::npos);
    CHECK(r.out.find("bearing_shift_bins=0") != std::string::npos);
    CHECK(run({"compare", bf_raw, bf_cal}).code == 0);

    r = run({"process", "--cube", cube, "--config", ini, "--method", "capon", "--out", (dir / "x.csv").string()});
    CHECK(r.code == 2);

    r = run({"process", "--cube", cube, "--config", ini, "--out", (dir / "default.csv").string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("bf:", 0) == 0);
    CHECK(oracle::read_bytes(dir / "default.csv") == oracle::read_bytes(bf_raw));
    write_text(dir / "badmethod.ini", std::string(kScene) + "method = capon\n");
    r = run({"process", "--cube", cube, "--config", (dir / "badmethod.ini").string(), "--out",
             (dir / "x.csv").string()});
    CHECK(r.code == 3);

    const auto music = (dir / "music.csv").string();
    CHECK(run({"process", "--cube", cube, "--config", ini, "--method", "music", "--cal", cal, "--out", music}).code ==
          0);

    const auto grp = (dir / "grp.csv").string();
    r = run({"process", "--cube", cube, "--config", ini, "--method", "grouping", "--cal", cal, "--failed", "7",
             "--out", grp});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("9 subarrays (N_min = 4)") != std::string::npos);
    const auto gm = nlohmann::json::parse(oracle::read_bytes(grp + ".manifest.json"));
    CHECK(gm["runs"]["count"] == 9);
    CHECK(gm["runs"]["subarrays"].size() == 9);

    // different grid -> comparison error
    write_text(dir / "coarse.ini", std::string(kScene) + "bearing_step_deg = 2\n");
    const auto coarse = (dir / "coarse.csv").string();
    REQUIRE(run({"process", "--cube", cube, "--config", (dir / "coarse.ini").string(), "--method", "bf", "--out",
                 coarse})
                .code == 0);
    r = run({"compare", bf_cal, coarse});
    CHECK(r.code == 5);
    CHECK(r.err.rfind("error[comparison]:", 0) == 0);

    // truncated cube -> data error
    const auto bytes = oracle::read_bytes(cube);
    write_text(dir / "short.cube", bytes.substr(0, 500));
    r = run({"process", "--cube", (dir / "short.cube").string(), "--config", ini, "--method", "bf", "--out",
             (dir / "y.csv").string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("(at byte 500)") != std::string::npos);
}

TEST_CASE("dead reference antenna and replay") {
    const auto dir = oracle::scratch_dir("replay");
    const auto ini = (dir / "scene.ini").string();
    std::string text = kScene;
    text.replace(text.find("perturbation_seed = 2\n"), 22, "perturbation_seed = 2\nfailed = 1\n");
    write_text(ini, text);
    const auto cube = (dir / "scene.cube").string();
    REQUIRE(run({"simulate", "--config", ini, "--out", cube}).code == 0);
    auto r = run({"calibrate", "--cube", cube, "--config", ini, "--out", (dir / "cal.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning: reference antenna 1 dead; re-referenced to antenna 2") != std::string::npos);

    const auto out = (dir / "grp.csv").string();
    REQUIRE(run({"process", "--cube", cube, "--config", ini, "--method", "grouping", "--out", out, "--threads", "1"})
                .code == 0);
    for (const char* t : {"1", "3", "8"}) {
        r = run({"replay", out + ".manifest.json", "--threads", t});
        CHECK(r.code == 0);
        CHECK(r.out.find("identical") != std::string::npos);
        CHECK(r.out.find("DIFFERS") == std::string::npos);
    }

    // tampered input is refused
    std::string bytes = oracle::read_bytes(cube);
    bytes[100] ^= 1;
    write_text(cube, bytes);
    r = run({"replay", out + ".manifest.json"});
    CHECK(r.code == 4);
    CHECK(r.err.find("changed since the recorded run") != std::string::npos);
}
