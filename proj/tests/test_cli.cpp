#include "doctest.h"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

// ORBITS_CLI_PATH is injected by the build; these tests drive the real
// binary through a shell the way a batch user would.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& tag) {
        dir = fs::temp_directory_path() /
              ("orbits_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path put(const std::string& name, const std::string& content) {
        fs::path p = dir / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

int run_cli(const Scratch& s, const std::string& args,
            const std::string& envprefix = "") {
    std::string cmd = envprefix + std::string(ORBITS_CLI_PATH) + " " + args +
                      " > " + (s.dir / "stdout.txt").string() + " 2> " +
                      (s.dir / "stderr.txt").string();
    int st = std::system(cmd.c_str());
    if (st == -1)
        return -1;
    return WIFEXITED(st) ? WEXITSTATUS(st) : -2;
}

const char* kRidge = R"({"potential": [[1, 0, 0.1, 0.0]], "cutoff": 1})";
const char* kFlat = R"({"potential": [], "cutoff": 1})";
const char* kIndefinite =
    R"({"kinetic": {"a11": [[0,0,1.0,0.0],[1,0,2.0,0.0]]}})";

} // namespace

TEST_SUITE("cli") {

TEST_CASE("validate: pass, fail and io paths") {
    Scratch s("validate");
    s.put("ridge.json", kRidge);
    s.put("bad.json", kIndefinite);
    fs::path ok_cfg = s.put("ok.json", R"({"model_path": "ridge.json"})");
    fs::path bad_cfg = s.put("badcfg.json", R"({"model_path": "bad.json"})");
    fs::path gone_cfg = s.put("gone.json", R"({"model_path": "missing.json"})");

    CHECK(run_cli(s, "validate --config " + ok_cfg.string()) == 0);
    json rep = json::parse(slurp(s.dir / "stdout.txt"));
    CHECK(rep.at("ok") == true);
    CHECK(rep.at("min_metric_eigenvalue").get<double>() ==
          doctest::Approx(1.0));

    CHECK(run_cli(s, "validate --config " + bad_cfg.string()) == 2);
    json rep2 = json::parse(slurp(s.dir / "stdout.txt"));
    CHECK(rep2.at("ok") == false);
    CHECK(rep2.at("worst_point").is_array());

    CHECK(run_cli(s, "validate --config " + gone_cfg.string()) == 3);
    json err = json::parse(slurp(s.dir / "stdout.txt"));
    CHECK(err.at("error").at("name") == "io");

    CHECK(run_cli(s, "validate --config " + (s.dir / "nocfg.json").string()) ==
          3);
    fs::path junk = s.put("junk.json", "{ nope");
    CHECK(run_cli(s, "validate --config " + junk.string()) == 2);
    fs::path nomodel = s.put("nomodel.json", R"({"energy": 1.0})");
    CHECK(run_cli(s, "validate --config " + nomodel.string()) == 2);
}

TEST_CASE("solve: writes stable artifacts") {
    Scratch s("solve");
    s.put("ridge.json", kRidge);
    fs::path cfg = s.put("solve.json", R"({
      "model_path": "ridge.json",
      "energy": 1.0, "m": 12, "auto_m": false, "grid": 48
    })");

    fs::path out1 = s.dir / "run1";
    fs::path out2 = s.dir / "run2";
    CHECK(run_cli(s, "solve --config " + cfg.string() + " --out " +
                         out1.string()) == 0);
    CHECK(run_cli(s, "solve --config " + cfg.string() + " --out " +
                         out2.string()) == 0);

    json mins = json::parse(slurp(out1 / "minimizers.json"));
    REQUIRE(mins.at("minima").size() == 1);
    CHECK(mins.at("minima")[0].at("verdict") == "hyperbolic");
    double x_star = mins.at("minima")[0].at("x_star").get<double>();
    CHECK(std::min(x_star, 6.283185307179586 - x_star) < 1e-6);

    std::string csv = slurp(out1 / "profile.csv");
    CHECK(csv.rfind("x0,action,valid", 0) == 0);

    // Primary outputs byte-identical across reruns; timestamps only in meta.
    CHECK(slurp(out1 / "minimizers.json") == slurp(out2 / "minimizers.json"));
    CHECK(slurp(out1 / "profile.csv") == slurp(out2 / "profile.csv"));
    json meta = json::parse(slurp(out1 / "run_meta.json"));
    CHECK(meta.at("command") == "solve");
    CHECK(meta.at("status") == "ok");
    CHECK(meta.at("timestamp_utc").is_string());

    // output_dir from the config body works without --out.
    fs::path cfg2 = s.put("solve2.json", std::string(R"({
      "model_path": "ridge.json", "output_dir": ")") +
                                             (s.dir / "run3").string() +
                                             R"(",
      "energy": 1.0, "m": 12, "auto_m": false, "grid": 48
    })");
    CHECK(run_cli(s, "solve --config " + cfg2.string()) == 0);
    CHECK(fs::exists(s.dir / "run3" / "minimizers.json"));
}

TEST_CASE("sweep: artifacts and malformed-range rejection") {
    Scratch s("sweep");
    s.put("ridge.json", kRidge);
    fs::path cfg = s.put("sweep.json", R"({
      "model_path": "ridge.json",
      "e_start": 0.9, "e_end": 1.0, "de": 0.05,
      "solve": {"m": 12, "auto_m": false, "grid": 48}
    })");
    fs::path out = s.dir / "swp";
    CHECK(run_cli(s, "sweep --config " + cfg.string() + " --out " +
                         out.string()) == 0);
    json branches = json::parse(slurp(out / "branches.json"));
    CHECK(branches.at("branches").size() == 1);
    json crossings = json::parse(slurp(out / "crossings.json"));
    CHECK(crossings.at("crossings").empty());
    std::string csv = slurp(out / "summary.csv");
    CHECK(csv.rfind("e,", 0) == 0);

    fs::path badcfg = s.put("badsweep.json", R"({
      "model_path": "ridge.json", "e_start": 1.0, "e_end": 0.9
    })");
    CHECK(run_cli(s, "sweep --config " + badcfg.string() + " --out " +
                         (s.dir / "nope").string()) == 2);
    json err = json::parse(slurp(s.dir / "stdout.txt"));
    CHECK(err.at("error").at("name") == "config");
}

TEST_CASE("perturb: deterministic reports, jobs-independent") {
    Scratch s("perturb");
    s.put("flat.json", kFlat);
    fs::path cfg = s.put("mc.json", R"({
      "model_path": "flat.json",
      "epsilon": 1e-2, "n": 4, "seed": 11,
      "sweep": {
        "e_start": 0.5, "e_end": 0.54, "de": 0.02, "audit_every": 2,
        "solve": {"m": 8, "auto_m": false, "grid": 32}
      }
    })");

    fs::path p1 = s.dir / "p1";
    fs::path p2 = s.dir / "p2";
    fs::path p3 = s.dir / "p3";
    CHECK(run_cli(s, "perturb --config " + cfg.string() + " --out " +
                         p1.string()) == 0);
    CHECK(run_cli(s, "perturb --config " + cfg.string() + " --out " +
                         p2.string()) == 0);
    CHECK(run_cli(s, "perturb --config " + cfg.string() + " --out " +
                         p3.string() + " --jobs 2") == 0);

    std::string rep = slurp(p1 / "report.json");
    CHECK(rep == slurp(p2 / "report.json"));
    CHECK(rep == slurp(p3 / "report.json")); // independent of worker count

    json j = json::parse(rep);
    CHECK(j.at("fraction").get<double>() >= 0.0);
    CHECK(j.at("fraction").get<double>() <= 1.0);
    CHECK(j.at("seed") == 11);

    fs::path zero = s.put("zero.json", R"({
      "model_path": "flat.json", "epsilon": 1e-2, "n": 0,
      "sweep": {"e_start": 0.5, "e_end": 0.54}
    })");
    CHECK(run_cli(s, "perturb --config " + zero.string() + " --out " +
                         (s.dir / "z").string()) == 2);
}

TEST_CASE("usage errors and the log level env var") {
    Scratch s("usage");
    s.put("ridge.json", kRidge);
    fs::path cfg = s.put("ok.json", R"({"model_path": "ridge.json"})");

    CHECK(run_cli(s, "") != 0);                  // subcommand required
    CHECK(run_cli(s, "validate") != 0);          // --config required
    CHECK(run_cli(s, "frobnicate --config x") != 0);

    CHECK(run_cli(s, "validate --config " + cfg.string(),
                  "ORBITS_LOG=quiet ") == 0);
    CHECK(slurp(s.dir / "stderr.txt").empty());
    CHECK(run_cli(s, "validate --config " + cfg.string(),
                  "ORBITS_LOG=debug ") == 0);
    CHECK(!slurp(s.dir / "stderr.txt").empty());
}

} // TEST_SUITE
