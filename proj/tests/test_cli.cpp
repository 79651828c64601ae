#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"(
[grid]
n_points = 2048
length = 1024
origin = -500
[packet]
center = -52
width = 4
momentum = 4
[scenario]
t_final = 40
dt = 0.01
sample_every = 2
[detector]
center = 0
half_width = 20
strength = 0.9
[calibration]
tolerance = 0.01
[trials]
n_trials = 2000
base_seed = 11
)";

struct Workspace {
    fs::path dir;

    Workspace() : dir(fs::temp_directory_path() / "capsim_test_cli") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return dir / name;
    }

    std::string read(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    // Runs the CLI with stdout and stderr captured; returns the exit code.
    int run(const std::string& args) const {
        const std::string cmd = std::string(CAPSIM_CLI) + " " + args + " > " + (dir / "stdout.txt").string() +
                                " 2> " + (dir / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string out() const { return read(dir / "stdout.txt"); }
    std::string err() const { return read(dir / "stderr.txt"); }
};

}  // namespace

TEST_CASE("run, then mc on the written weights reproduces the trial files") {
    Workspace ws;
    const auto cfg = ws.write("small.cfg", kConfig);
    const auto out = ws.dir / "run";
    REQUIRE(ws.run("run --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(ws.out().find("PASS  capture_probability_one") != std::string::npos);
    CHECK(fs::exists(out / "manifest.json"));

    for (const char* rule : {"current_jump", "penrose_spread", "penrose_env"}) {
        CAPTURE(rule);
        const auto trials = ws.dir / (std::string(rule) + ".csv");
        REQUIRE(ws.run(std::string("mc --weights ") + (out / "weights.csv").string() + " --rule " + rule +
                       " --trials 2000 --seed 11 --out " + trials.string()) == 0);
        CHECK(ws.read(trials) == ws.read(out / ("trials_" + std::string(rule) + ".csv")));
        CHECK(ws.err().find("rule=" + std::string(rule)) != std::string::npos);
    }

    REQUIRE(ws.run("run --config " + cfg.string() + " --out " + (ws.dir / "seeded").string() + " --seed 12") == 0);
    CHECK(ws.read(ws.dir / "seeded" / "trials_current_jump.csv") != ws.read(out / "trials_current_jump.csv"));
    CHECK(ws.read(ws.dir / "seeded" / "weights.csv") == ws.read(out / "weights.csv"));
}

TEST_CASE("validation errors exit with 1") {
    Workspace ws;
    const auto bad = ws.write("bad.cfg", std::string(kConfig) + "[extra]\nx = 1\n");
    CHECK(ws.run("run --config " + bad.string() + " --out " + (ws.dir / "o").string()) == 1);
    CHECK(ws.err().find("extra: unknown section") != std::string::npos);
    CHECK_FALSE(fs::exists(ws.dir / "o"));

    const auto cfg = ws.write("small.cfg", kConfig);
    CHECK(ws.run("run --config " + cfg.string()) == 1);
    CHECK(ws.run("frobnicate") == 1);
    CHECK(ws.run("mc --weights " + cfg.string() + " --rule current_jump --trials 10") == 1);
    CHECK(ws.run("sweep --config " + cfg.string()) == 1);
    CHECK(ws.err().find("no --key") != std::string::npos);
    CHECK(ws.run("--help") == 0);
}

TEST_CASE("numerical guard aborts exit with 2") {
    Workspace ws;
    const auto out = ws.dir / "o";
    std::string text = kConfig;
    text.replace(text.find("t_final = 40"), 12, "t_final = 20");
    const auto short_cfg = ws.write("short.cfg", text);
    CHECK(ws.run("run --config " + short_cfg.string() + " --out " + out.string()) == 2);
    CHECK(ws.err().find("scenario.t_final") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("calibrate, claims and sweep") {
    Workspace ws;
    const auto cfg = ws.write("small.cfg", kConfig);
    REQUIRE(ws.run("calibrate --config " + cfg.string() + " --out " + (ws.dir / "cal").string()) == 0);
    CHECK(ws.out().find("\"achieved_capture\"") != std::string::npos);
    CHECK(ws.read(ws.dir / "cal" / "calibration.json") == ws.out());

    REQUIRE(ws.run("claims --config " + cfg.string() + " --out " + (ws.dir / "cl").string()) == 0);
    CHECK(fs::exists(ws.dir / "cl" / "claims.txt"));
    CHECK_FALSE(fs::exists(ws.dir / "cl" / "weights.csv"));

    REQUIRE(ws.run("sweep --config " + cfg.string() + " --key trials.base_seed --values 1,2 --out " +
                   (ws.dir / "sw").string()) == 0);
    CHECK(fs::exists(ws.dir / "sw" / "trials.base_seed=1" / "claims.txt"));
    CHECK(fs::exists(ws.dir / "sw" / "trials.base_seed=2" / "claims.txt"));
    CHECK(ws.out().rfind("# format_version=1\n", 0) == 0);
}
