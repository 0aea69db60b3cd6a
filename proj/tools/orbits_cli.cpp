// orbits: batch front end for the periodic-orbit pipeline.
//
// Usage: orbits validate|solve|sweep|perturb --config <path> [--out <dir>] [--jobs N]
//
// The config file is JSON holding "model_path", an optional "output_dir",
// and the options of the invoked command (see FORMATS.md). Primary outputs
// are byte-stable across reruns; wall-clock metadata goes to run_meta.json.
// Failures print a machine-readable error object to stdout and exit with
// 2 (config), 3 (I/O) or 4 (solve/property violation).

#include "orbits/orbits_c.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliFailure {
    int exit_code;
    int status; // ORBITS_* when the failure came from the library, else 0
    std::string message;
};

int log_threshold() {
    const char* v = std::getenv("ORBITS_LOG");
    if (v == nullptr)
        return 1;
    std::string s(v);
    if (s == "quiet" || s == "0")
        return 0;
    if (s == "debug" || s == "2")
        return 2;
    return 1;
}

void log_line(int level, const std::string& msg) {
    static const int threshold = log_threshold();
    if (level <= threshold && threshold > 0)
        std::fprintf(stderr, "[orbits] %s\n", msg.c_str());
}

struct ModelHandle {
    orbits_model* ptr = nullptr;
    ~ModelHandle() { orbits_model_free(ptr); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { orbits_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

[[noreturn]] void fail_from_status(int rc) {
    throw CliFailure{orbits_exit_code(rc), rc, orbits_last_error()};
}

json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CliFailure{3, ORBITS_ERR_IO, "cannot read config file: " + path};
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json cfg = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (cfg.is_discarded())
        throw CliFailure{2, ORBITS_ERR_CONFIG, "config is not valid JSON: " + path};
    if (!cfg.is_object())
        throw CliFailure{2, ORBITS_ERR_CONFIG,
                         "config must be a JSON object: " + path};
    return cfg;
}

std::string model_path_of(const json& cfg, const std::string& config_path) {
    if (!cfg.contains("model_path") || !cfg.at("model_path").is_string())
        throw CliFailure{2, ORBITS_ERR_CONFIG,
                         "config requires a \"model_path\" string"};
    fs::path p = cfg.at("model_path").get<std::string>();
    if (p.is_relative())
        p = fs::path(config_path).parent_path() / p;
    return p.string();
}

void load_model(const json& cfg, const std::string& config_path,
                ModelHandle& model) {
    std::string path = model_path_of(cfg, config_path);
    log_line(2, "loading model " + path);
    int rc = orbits_model_load(path.c_str(), &model.ptr);
    if (rc != ORBITS_OK)
        fail_from_status(rc);
}

fs::path resolve_out_dir(const json& cfg, const std::string& out_flag) {
    std::string dir = ".";
    if (cfg.contains("output_dir")) {
        if (!cfg.at("output_dir").is_string())
            throw CliFailure{2, ORBITS_ERR_CONFIG,
                             "config: \"output_dir\" must be a string"};
        dir = cfg.at("output_dir").get<std::string>();
    }
    if (!out_flag.empty())
        dir = out_flag;
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw CliFailure{3, ORBITS_ERR_IO,
                         "cannot create output directory: " + p.string()};
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw CliFailure{3, ORBITS_ERR_IO, "cannot write " + path.string()};
    out << text;
    out.flush();
    if (!out.good())
        throw CliFailure{3, ORBITS_ERR_IO, "short write on " + path.string()};
    log_line(1, "wrote " + path.string());
}

/* Command options = config minus the plumbing keys. */
std::string forwarded_options(json cfg) {
    cfg.erase("model_path");
    cfg.erase("output_dir");
    std::string text = cfg.dump();
    log_line(2, "options: " + text);
    return text;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_run_meta(const fs::path& out_dir, const std::string& command,
                    const std::string& config_path,
                    const std::vector<std::string>& outputs, double seconds) {
    json meta;
    meta["command"] = command;
    meta["config"] = config_path;
    meta["outputs"] = outputs;
    meta["timestamp_utc"] = utc_timestamp();
    meta["duration_seconds"] = seconds;
    meta["status"] = "ok";
    write_text(out_dir / "run_meta.json", meta.dump(2) + "\n");
}

struct Invocation {
    std::string config_path;
    std::string out_flag;
    int jobs = 0; // 0 = leave the config values alone
};

int cmd_validate(const Invocation& inv) {
    json cfg = load_config(inv.config_path);
    ModelHandle model;
    load_model(cfg, inv.config_path, model);
    OwnedString report;
    int rc = orbits_model_validate(model.ptr, &report.ptr);
    if (report.ptr != nullptr)
        std::fputs(report.ptr, stdout);
    if (rc != ORBITS_OK && report.ptr == nullptr)
        fail_from_status(rc);
    if (!inv.out_flag.empty() || cfg.contains("output_dir")) {
        fs::path out_dir = resolve_out_dir(cfg, inv.out_flag);
        write_text(out_dir / "validation.json", report.str());
        write_run_meta(out_dir, "validate", inv.config_path,
                       {"validation.json"}, 0.0);
    }
    return orbits_exit_code(rc);
}

int cmd_solve(const Invocation& inv) {
    auto t0 = std::chrono::steady_clock::now();
    json cfg = load_config(inv.config_path);
    ModelHandle model;
    load_model(cfg, inv.config_path, model);
    fs::path out_dir = resolve_out_dir(cfg, inv.out_flag);
    if (inv.jobs > 0)
        cfg["jobs"] = inv.jobs;
    OwnedString minimizers, profile;
    int rc = orbits_solve(model.ptr, forwarded_options(cfg).c_str(),
                          &minimizers.ptr, &profile.ptr);
    if (rc != ORBITS_OK)
        fail_from_status(rc);
    write_text(out_dir / "minimizers.json", minimizers.str());
    write_text(out_dir / "profile.csv", profile.str());
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
    write_run_meta(out_dir, "solve", inv.config_path,
                   {"minimizers.json", "profile.csv"}, dt);
    return 0;
}

int cmd_sweep(const Invocation& inv) {
    auto t0 = std::chrono::steady_clock::now();
    json cfg = load_config(inv.config_path);
    ModelHandle model;
    load_model(cfg, inv.config_path, model);
    fs::path out_dir = resolve_out_dir(cfg, inv.out_flag);
    if (inv.jobs > 0)
        cfg["solve"]["jobs"] = inv.jobs;
    OwnedString branches, crossings, summary;
    int rc = orbits_sweep(model.ptr, forwarded_options(cfg).c_str(),
                          &branches.ptr, &crossings.ptr, &summary.ptr);
    if (rc != ORBITS_OK)
        fail_from_status(rc);
    write_text(out_dir / "branches.json", branches.str());
    write_text(out_dir / "crossings.json", crossings.str());
    write_text(out_dir / "summary.csv", summary.str());
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
    write_run_meta(out_dir, "sweep", inv.config_path,
                   {"branches.json", "crossings.json", "summary.csv"}, dt);
    return 0;
}

int cmd_perturb(const Invocation& inv) {
    auto t0 = std::chrono::steady_clock::now();
    json cfg = load_config(inv.config_path);
    ModelHandle model;
    load_model(cfg, inv.config_path, model);
    fs::path out_dir = resolve_out_dir(cfg, inv.out_flag);
    if (!cfg.contains("mode"))
        cfg["mode"] = "monte_carlo";
    if (inv.jobs > 0) {
        if (cfg["mode"] == "monte_carlo")
            cfg["jobs"] = inv.jobs;
        else
            cfg["solve"]["jobs"] = inv.jobs;
    }
    OwnedString report;
    int rc = orbits_perturb(model.ptr, forwarded_options(cfg).c_str(),
                            &report.ptr);
    if (rc != ORBITS_OK)
        fail_from_status(rc);
    write_text(out_dir / "report.json", report.str());
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
    write_run_meta(out_dir, "perturb", inv.config_path, {"report.json"}, dt);
    return 0;
}

void print_error(int status, const std::string& message) {
    json err;
    err["error"]["status"] = status;
    err["error"]["name"] = orbits_status_name(status);
    err["error"]["message"] = message;
    std::fputs((err.dump(2) + "\n").c_str(), stdout);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimal periodic orbits of Tonelli Lagrangians on the 2-torus"};
    app.require_subcommand(1);

    Invocation inv;
    const char* names[] = {"validate", "solve", "sweep", "perturb"};
    const char* blurbs[] = {
        "check the model's kinetic metric and coefficients",
        "minimizers of F(x0, E) at one energy, with certificates",
        "continuation sweep over an energy range",
        "perturbation studies (kernel / first_order / response / monte_carlo)"};
    for (int i = 0; i < 4; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", inv.config_path, "run configuration JSON")
            ->required();
        sub->add_option("--out", inv.out_flag, "output directory override");
        sub->add_option("--jobs", inv.jobs, "parallel worker override");
    }

    CLI11_PARSE(app, argc, argv);
    std::string cmd = app.get_subcommands().front()->get_name();

    try {
        if (cmd == "validate")
            return cmd_validate(inv);
        if (cmd == "solve")
            return cmd_solve(inv);
        if (cmd == "sweep")
            return cmd_sweep(inv);
        return cmd_perturb(inv);
    } catch (const CliFailure& f) {
        print_error(f.status, f.message);
        log_line(1, "failed: " + f.message);
        return f.exit_code;
    } catch (const std::exception& e) {
        print_error(ORBITS_ERR_INTERNAL, e.what());
        return 1;
    }
}
