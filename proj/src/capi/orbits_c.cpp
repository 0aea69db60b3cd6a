#include "orbits/orbits_c.h"

#include "orbits/classify.hpp"
#include "orbits/continuation.hpp"
#include "orbits/errors.hpp"
#include "orbits/json_io.hpp"
#include "orbits/perturb.hpp"

#include "json.hpp"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

struct orbits_model {
    orbits::ModelSpec spec;
};

namespace {

using nlohmann::json;
using namespace orbits;

thread_local std::string g_last_error;

int fail(Err code, const std::string& what) {
    g_last_error = what;
    return static_cast<int>(code);
}

char* dup_or_throw(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p == nullptr)
        raise(Err::Internal, "out of memory");
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

/// Collects output slots so a failure mid-publication releases everything
/// already written and leaves every output NULL.
struct OutGuard {
    std::vector<char**> slots;
    bool committed = false;

    void set(char** slot, const std::string& s) {
        if (slot == nullptr)
            return;
        *slot = dup_or_throw(s);
        slots.push_back(slot);
    }
    ~OutGuard() {
        if (committed)
            return;
        for (char** slot : slots) {
            std::free(*slot);
            *slot = nullptr;
        }
    }
};

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return ORBITS_OK;
    } catch (const OrbitsError& e) {
        return fail(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail(Err::Internal, e.what());
    } catch (...) {
        return fail(Err::Internal, "unidentified failure");
    }
}

json parse_object(const char* text, const char* where) {
    if (text == nullptr || *text == '\0')
        return json::object();
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
        raise(Err::Config, std::string(where) + ": options are not valid JSON");
    if (!j.is_object())
        raise(Err::Config, std::string(where) + ": options must be a JSON object");
    return j;
}

void check_keys(const json& j, const std::vector<const char*>& allowed,
                const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            raise(Err::Config,
                  std::string(where) + ": unknown option \"" + it.key() + "\"");
    }
}

double get_num(const json& j, const char* key, double dflt, const char* where) {
    if (!j.contains(key))
        return dflt;
    if (!j.at(key).is_number())
        raise(Err::Config, std::string(where) + ": \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

double require_num(const json& j, const char* key, const char* where) {
    if (!j.contains(key))
        raise(Err::Config,
              std::string(where) + ": missing required option \"" + key + "\"");
    return get_num(j, key, 0.0, where);
}

int get_int(const json& j, const char* key, int dflt, const char* where) {
    if (!j.contains(key))
        return dflt;
    if (!j.at(key).is_number_integer())
        raise(Err::Config,
              std::string(where) + ": \"" + key + "\" must be an integer");
    return j.at(key).get<int>();
}

bool get_bool(const json& j, const char* key, bool dflt, const char* where) {
    if (!j.contains(key))
        return dflt;
    if (!j.at(key).is_boolean())
        raise(Err::Config, std::string(where) + ": \"" + key + "\" must be a boolean");
    return j.at(key).get<bool>();
}

const std::vector<const char*> kSolveKeys = {
    "m", "auto_m", "m_max", "grid", "subarc_steps", "newton_tol",
    "max_newton", "tie_tol", "dedupe_tol", "flat_tol",
    "degeneracy_threshold", "hyperbolicity_margin", "monodromy_steps",
    "jobs"};
const std::vector<const char*> kReductionKeys = {"orientation", "strip"};

struct ParsedSolve {
    SolveOptions solve;
    ReductionOptions reduction;
};

/// Shared "solve" block. Reduction keys (orientation, strip) are accepted
/// only where the caller constructs the reduced system itself; sweep-style
/// drivers always reduce with the defaults.
ParsedSolve parse_solve_block(const json& j, const char* where,
                              bool allow_reduction) {
    std::vector<const char*> allowed = kSolveKeys;
    if (allow_reduction)
        for (const char* k : kReductionKeys)
            allowed.push_back(k);
    check_keys(j, allowed, where);

    ParsedSolve out;
    SolveOptions& so = out.solve;
    so.m = get_int(j, "m", so.m, where);
    so.auto_m = get_bool(j, "auto_m", so.auto_m, where);
    so.m_max = get_int(j, "m_max", so.m_max, where);
    so.grid = get_int(j, "grid", so.grid, where);
    so.subarc.steps = get_int(j, "subarc_steps", so.subarc.steps, where);
    so.newton_tol = get_num(j, "newton_tol", so.newton_tol, where);
    so.max_newton = get_int(j, "max_newton", so.max_newton, where);
    so.tie_tol = get_num(j, "tie_tol", so.tie_tol, where);
    so.dedupe_tol = get_num(j, "dedupe_tol", so.dedupe_tol, where);
    so.flat_tol = get_num(j, "flat_tol", so.flat_tol, where);
    so.degeneracy_threshold =
        get_num(j, "degeneracy_threshold", so.degeneracy_threshold, where);
    so.hyperbolicity_margin =
        get_num(j, "hyperbolicity_margin", so.hyperbolicity_margin, where);
    so.monodromy.steps = get_int(j, "monodromy_steps", so.monodromy.steps, where);
    so.jobs = get_int(j, "jobs", so.jobs, where);

    if (so.m < 1 || so.m_max < so.m || so.grid < 4 || so.subarc.steps < 2)
        raise(Err::Config, std::string(where) + ": solver sizes out of range");

    if (allow_reduction) {
        out.reduction.orientation = get_int(j, "orientation", +1, where);
        if (out.reduction.orientation != 1 && out.reduction.orientation != -1)
            raise(Err::Config,
                  std::string(where) + ": \"orientation\" must be +1 or -1");
        if (j.contains("strip")) {
            const json& s = j.at("strip");
            if (!s.is_array() || s.size() != 2 || !s[0].is_number() ||
                !s[1].is_number())
                raise(Err::Config,
                      std::string(where) + ": \"strip\" must be [lo, hi]");
            out.reduction.strip_lo = s[0].get<double>();
            out.reduction.strip_hi = s[1].get<double>();
        }
    }
    return out;
}

json solve_subobject(const json& j, const char* where) {
    if (!j.contains("solve"))
        return json::object();
    if (!j.at("solve").is_object())
        raise(Err::Config, std::string(where) + ": \"solve\" must be an object");
    return j.at("solve");
}

ContinuationOptions parse_sweep_block(const json& j, const char* where) {
    check_keys(j,
               {"e_start", "e_end", "de", "de_min", "audit_every", "match_tol",
                "crossing_resolution", "slope_margin", "solve"},
               where);
    ContinuationOptions co;
    co.e_start = require_num(j, "e_start", where);
    co.e_end = require_num(j, "e_end", where);
    co.de = get_num(j, "de", co.de, where);
    co.de_min = get_num(j, "de_min", co.de_min, where);
    co.audit_every = get_int(j, "audit_every", co.audit_every, where);
    co.match_tol = get_num(j, "match_tol", co.match_tol, where);
    co.crossing_resolution =
        get_num(j, "crossing_resolution", co.crossing_resolution, where);
    co.slope_margin = get_num(j, "slope_margin", co.slope_margin, where);
    std::string sub = std::string(where) + ".solve";
    co.solve = parse_solve_block(solve_subobject(j, where), sub.c_str(),
                                 /*allow_reduction=*/false)
                   .solve;
    return co;
}

std::vector<double> num_array(const json& j, const char* key, const char* where) {
    const json& a = j.at(key);
    if (!a.is_array() || a.empty())
        raise(Err::Config,
              std::string(where) + ": \"" + key + "\" must be a nonempty array");
    std::vector<double> out;
    out.reserve(a.size());
    for (const json& v : a) {
        if (!v.is_number())
            raise(Err::Config,
                  std::string(where) + ": \"" + key + "\" must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

json perturb_kernel(const orbits_model* model, const json& j) {
    check_keys(j, {"mode", "energy", "x0", "solve"}, "perturb");
    if (model->spec.perturbation.empty())
        raise(Err::Config, "perturb: model has no perturbation series");
    double e = require_num(j, "energy", "perturb");
    double x0 = require_num(j, "x0", "perturb");
    ParsedSolve ps = parse_solve_block(solve_subobject(j, "perturb"),
                                       "perturb.solve", true);
    ReducedSystem rs(model->spec.with_epsilon(0.0), e, ps.reduction);
    KernelDiag diag;
    double k = kernel_k(rs, x0, model->spec.perturbation, ps.solve, &diag);
    json out;
    out["mode"] = "kernel";
    out["energy"] = e;
    out["x0"] = x0;
    out["kernel"] = k;
    out["coarse"] = diag.coarse;
    out["fine"] = diag.fine;
    out["richardson"] = diag.richardson;
    out["refinement_delta"] = diag.refinement_delta();
    return out;
}

json perturb_first_order(const orbits_model* model, const json& j) {
    check_keys(j, {"mode", "energy", "x0", "eps", "solve"}, "perturb");
    if (model->spec.perturbation.empty())
        raise(Err::Config, "perturb: model has no perturbation series");
    double e = require_num(j, "energy", "perturb");
    double x0 = require_num(j, "x0", "perturb");
    std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
    if (j.contains("eps"))
        eps = num_array(j, "eps", "perturb");
    for (double v : eps)
        if (!(v > 0.0))
            raise(Err::Config, "perturb: \"eps\" entries must be positive");
    ParsedSolve ps = parse_solve_block(solve_subobject(j, "perturb"),
                                       "perturb.solve", false);
    FirstOrderCheck fo = first_order_check(model->spec, e, x0, eps, ps.solve);
    json out;
    out["mode"] = "first_order";
    out["energy"] = e;
    out["x0"] = x0;
    out["eps"] = fo.eps;
    out["delta_f"] = fo.delta_f;
    out["predicted"] = fo.predicted;
    out["residual"] = fo.residual;
    out["slope"] = fo.slope;
    return out;
}

json perturb_response(const orbits_model* model, const json& j) {
    check_keys(j, {"mode", "energy", "ell", "x", "x_count", "solve"}, "perturb");
    double e = require_num(j, "energy", "perturb");
    int ell = get_int(j, "ell", 1, "perturb");
    if (ell < 1)
        raise(Err::Config, "perturb: \"ell\" must be >= 1");
    std::vector<double> xs;
    if (j.contains("x")) {
        xs = num_array(j, "x", "perturb");
    } else {
        int n = get_int(j, "x_count", 8, "perturb");
        if (n < 1)
            raise(Err::Config, "perturb: \"x_count\" must be >= 1");
        for (int i = 0; i < n; ++i)
            xs.push_back(2.0 * 3.14159265358979323846 * i / n);
    }
    ParsedSolve ps = parse_solve_block(solve_subobject(j, "perturb"),
                                       "perturb.solve", true);
    ReducedSystem rs(model->spec, e, ps.reduction);
    FourierResponse fr = fourier_response(rs, ell, xs, ps.solve);
    json out;
    out["mode"] = "response";
    out["energy"] = e;
    out["ell"] = fr.ell;
    out["x"] = fr.x;
    out["u"] = fr.u;
    out["v"] = fr.v;
    out["u_mean"] = fr.u_mean;
    out["u_rel_variation"] = fr.u_rel_variation;
    return out;
}

json perturb_monte_carlo(const orbits_model* model, const json& j) {
    check_keys(j, {"mode", "epsilon", "n", "seed", "threshold", "jobs", "sweep"},
               "perturb");
    double eps = require_num(j, "epsilon", "perturb");
    int n = get_int(j, "n", 100, "perturb");
    if (n < 1)
        raise(Err::Config, "perturb: \"n\" must be >= 1");
    std::uint64_t seed = 1;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            raise(Err::Config, "perturb: \"seed\" must be an integer");
        seed = j.at("seed").get<std::uint64_t>();
    }
    double threshold = get_num(j, "threshold", 1e-6, "perturb");
    int jobs = get_int(j, "jobs", 1, "perturb");
    if (!j.contains("sweep") || !j.at("sweep").is_object())
        raise(Err::Config, "perturb: monte_carlo requires a \"sweep\" object");
    ContinuationOptions co = parse_sweep_block(j.at("sweep"), "perturb.sweep");
    MonteCarloReport rep =
        monte_carlo_nondegeneracy(model->spec, eps, n, seed, co, threshold, jobs);
    return json::parse(monte_carlo_to_json(rep));
}

} // namespace

extern "C" {

int orbits_model_parse(const char* json_text, orbits_model** out) {
    if (out == nullptr)
        return fail(Err::Config, "orbits_model_parse: out is null");
    *out = nullptr;
    if (json_text == nullptr)
        return fail(Err::Config, "orbits_model_parse: json_text is null");
    return guarded([&] {
        auto handle = new orbits_model{model_from_json(json_text)};
        *out = handle;
    });
}

int orbits_model_load(const char* path, orbits_model** out) {
    if (out == nullptr)
        return fail(Err::Config, "orbits_model_load: out is null");
    *out = nullptr;
    if (path == nullptr)
        return fail(Err::Config, "orbits_model_load: path is null");
    return guarded([&] {
        auto handle = new orbits_model{model_from_file(path)};
        *out = handle;
    });
}

void orbits_model_free(orbits_model* model) { delete model; }

int orbits_model_dump(const orbits_model* model, char** json_text) {
    if (json_text != nullptr)
        *json_text = nullptr;
    if (model == nullptr)
        return fail(Err::Config, "orbits_model_dump: model is null");
    if (json_text == nullptr)
        return fail(Err::Config, "orbits_model_dump: json_text is null");
    return guarded([&] {
        OutGuard out;
        out.set(json_text, model_to_json(model->spec));
        out.committed = true;
    });
}

int orbits_model_validate(const orbits_model* model, char** report_json) {
    if (report_json != nullptr)
        *report_json = nullptr;
    if (model == nullptr)
        return fail(Err::Config, "orbits_model_validate: model is null");
    bool ok = false;
    std::string message;
    int rc = guarded([&] {
        ValidationReport rep = model->spec.validate();
        ok = rep.ok;
        message = rep.message;
        OutGuard out;
        out.set(report_json, validation_to_json(rep));
        out.committed = true;
    });
    if (rc != ORBITS_OK)
        return rc;
    if (!ok)
        return fail(Err::Config,
                    message.empty() ? "model failed validation" : message);
    return ORBITS_OK;
}

int orbits_solve(const orbits_model* model, const char* options_json,
                 char** minimizers_json, char** profile_csv) {
    if (minimizers_json != nullptr)
        *minimizers_json = nullptr;
    if (profile_csv != nullptr)
        *profile_csv = nullptr;
    if (model == nullptr)
        return fail(Err::Config, "orbits_solve: model is null");
    return guarded([&] {
        json j = parse_object(options_json, "solve");
        std::vector<const char*> allowed = kSolveKeys;
        for (const char* k : kReductionKeys)
            allowed.push_back(k);
        allowed.push_back("energy");
        check_keys(j, allowed, "solve");
        double e = require_num(j, "energy", "solve");
        json body = j;
        body.erase("energy");
        ParsedSolve ps = parse_solve_block(body, "solve", true);
        ReducedSystem rs(model->spec, e, ps.reduction);
        FindMinimaResult fm = find_minima(rs, ps.solve);
        for (const MinimizerRecord& rec : fm.minima)
            classify_equivalence(rec, ps.solve);
        OutGuard out;
        out.set(minimizers_json, minimizers_to_json(fm, e));
        out.set(profile_csv, profile_to_csv(fm.profile));
        out.committed = true;
    });
}

int orbits_sweep(const orbits_model* model, const char* options_json,
                 char** branches_json, char** crossings_json,
                 char** summary_csv) {
    if (branches_json != nullptr)
        *branches_json = nullptr;
    if (crossings_json != nullptr)
        *crossings_json = nullptr;
    if (summary_csv != nullptr)
        *summary_csv = nullptr;
    if (model == nullptr)
        return fail(Err::Config, "orbits_sweep: model is null");
    return guarded([&] {
        json j = parse_object(options_json, "sweep");
        ContinuationOptions co = parse_sweep_block(j, "sweep");
        GlobalStructure gs = global_structure(model->spec, co);
        OutGuard out;
        out.set(branches_json, branches_to_json(gs));
        out.set(crossings_json, crossings_to_json(gs));
        out.set(summary_csv, summary_to_csv(gs));
        out.committed = true;
    });
}

int orbits_perturb(const orbits_model* model, const char* options_json,
                   char** report_json) {
    if (report_json != nullptr)
        *report_json = nullptr;
    if (model == nullptr)
        return fail(Err::Config, "orbits_perturb: model is null");
    return guarded([&] {
        json j = parse_object(options_json, "perturb");
        if (!j.contains("mode") || !j.at("mode").is_string())
            raise(Err::Config, "perturb: missing required option \"mode\"");
        std::string mode = j.at("mode").get<std::string>();
        json rep;
        if (mode == "kernel")
            rep = perturb_kernel(model, j);
        else if (mode == "first_order")
            rep = perturb_first_order(model, j);
        else if (mode == "response")
            rep = perturb_response(model, j);
        else if (mode == "monte_carlo")
            rep = perturb_monte_carlo(model, j);
        else
            raise(Err::Config, "perturb: unknown mode \"" + mode + "\"");
        OutGuard out;
        out.set(report_json, pretty(rep));
        out.committed = true;
    });
}

void orbits_string_free(char* text) { std::free(text); }

const char* orbits_status_name(int status) {
    return err_name(static_cast<Err>(status));
}

int orbits_exit_code(int status) {
    return exit_code_for(static_cast<Err>(status));
}

const char* orbits_last_error(void) { return g_last_error.c_str(); }

} // extern "C"
