#include "orbits/json_io.hpp"

#include "orbits/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace orbits {

namespace {

using nlohmann::json;

FourierSeries series_from_json(const json& j, const char* what) {
    if (!j.is_array()) {
        char buf[120];
        std::snprintf(buf, sizeof(buf), "'%s' must be an array of [k1,k2,cos,sin] rows", what);
        raise(Err::Config, buf);
    }
    std::vector<FourierTerm> terms;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 4) {
            char buf[120];
            std::snprintf(buf, sizeof(buf), "'%s' rows must be [k1,k2,cos,sin]", what);
            raise(Err::Config, buf);
        }
        FourierTerm t;
        t.k1 = row[0].get<int>();
        t.k2 = row[1].get<int>();
        t.c = row[2].get<double>();
        t.s = row[3].get<double>();
        terms.push_back(t);
    }
    return FourierSeries(terms);
}

json series_to_json(const FourierSeries& s) {
    json rows = json::array();
    for (const auto& t : s.terms()) {
        rows.push_back(json::array({t.k1, t.k2, t.c, t.s}));
    }
    return rows;
}

// Fixed-precision doubles keep sweep outputs byte-stable across runs.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

ModelSpec model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        std::string msg = std::string("model JSON is unparsable: ") + e.what();
        raise(Err::Config, msg);
    }
    if (!j.is_object())
        raise(Err::Config, "model JSON must be an object");

    ModelSpec m;
    if (j.contains("kinetic")) {
        const json& k = j["kinetic"];
        if (!k.is_object())
            raise(Err::Config, "'kinetic' must be an object");
        if (k.contains("a11"))
            m.a11 = series_from_json(k["a11"], "kinetic.a11");
        if (k.contains("a12"))
            m.a12 = series_from_json(k["a12"], "kinetic.a12");
        if (k.contains("a22"))
            m.a22 = series_from_json(k["a22"], "kinetic.a22");
    }
    if (j.contains("potential"))
        m.potential = series_from_json(j["potential"], "potential");
    if (j.contains("perturbation"))
        m.perturbation = series_from_json(j["perturbation"], "perturbation");
    if (j.contains("epsilon"))
        m.epsilon = j["epsilon"].get<double>();
    if (j.contains("cutoff"))
        m.cutoff = j["cutoff"].get<int>();
    if (j.contains("name"))
        m.name = j["name"].get<std::string>();
    return m;
}

ModelSpec model_from_file(const std::string& path) {
    return model_from_json(read_file(path));
}

std::string model_to_json(const ModelSpec& m) {
    json j;
    j["kinetic"] = {{"a11", series_to_json(m.a11)},
                    {"a12", series_to_json(m.a12)},
                    {"a22", series_to_json(m.a22)}};
    j["potential"] = series_to_json(m.potential);
    j["perturbation"] = series_to_json(m.perturbation);
    j["epsilon"] = m.epsilon;
    j["cutoff"] = m.cutoff;
    if (!m.name.empty())
        j["name"] = m.name;
    return j.dump(2) + "\n";
}

std::string validation_to_json(const ValidationReport& r) {
    json j;
    j["ok"] = r.ok;
    j["min_metric_eigenvalue"] = r.m_l;
    j["worst_point"] = json::array({r.worst_point[0], r.worst_point[1]});
    j["grid"] = r.grid;
    j["message"] = r.message;
    return j.dump(2) + "\n";
}

std::string minimizers_to_json(const FindMinimaResult& result, double e) {
    json j;
    j["energy"] = e;
    j["m"] = result.m_used;
    j["profile_oscillation"] = result.profile.oscillation();
    json arr = json::array();
    for (const auto& rec : result.minima) {
        json r;
        r["x_star"] = rec.x_star;
        r["action"] = rec.action;
        r["residual"] = rec.residual;
        r["lambda0"] = rec.lambda0;
        r["lambda1"] = rec.lambda1;
        r["ground_positive"] = rec.ground_positive;
        r["interior_pd"] = rec.interior_pd;
        r["twist_ok"] = rec.twist_ok;
        r["hessian_f"] = rec.hessian_f;
        r["period"] = rec.period;
        r["degenerate_family"] = rec.degenerate_family;
        r["verdict"] =
            rec.verdict == OrbitVerdict::Hyperbolic ? "hyperbolic" : "degenerate";
        r["max_transverse_multiplier"] = rec.monodromy.max_transverse_modulus;
        r["monodromy_det"] = rec.monodromy.det;
        json mult = json::array();
        for (const auto& lam : rec.monodromy.multipliers)
            mult.push_back(json::array({lam.real(), lam.imag()}));
        r["multipliers"] = mult;
        json nodes = json::array();
        for (double x : rec.config.nodes)
            nodes.push_back(x);
        r["nodes"] = nodes;
        arr.push_back(r);
    }
    j["minima"] = arr;
    return j.dump(2) + "\n";
}

std::string profile_to_csv(const ActionProfile& p) {
    std::ostringstream out;
    out << "x0,action,valid\n";
    for (size_t i = 0; i < p.x0.size(); ++i) {
        out << fmt(p.x0[i]) << ',';
        if (p.valid[i])
            out << fmt(p.value[i]);
        else
            out << "nan";
        out << ',' << (p.valid[i] ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string branches_to_json(const GlobalStructure& gs) {
    json arr = json::array();
    for (const auto& br : gs.branches) {
        json b;
        b["id"] = br.id;
        b["end_reason"] = br.end_reason;
        json pts = json::array();
        for (const auto& pt : br.points) {
            pts.push_back({{"e", pt.e},
                           {"x_star", pt.x_star},
                           {"action", pt.action},
                           {"lambda0", pt.lambda0},
                           {"lambda1", pt.lambda1},
                           {"df_de", pt.df_de},
                           {"audited", pt.audited}});
        }
        b["points"] = pts;
        arr.push_back(b);
    }
    json j;
    j["branches"] = arr;
    j["symmetric_tie"] = gs.symmetric_tie;
    return j.dump(2) + "\n";
}

std::string crossings_to_json(const GlobalStructure& gs) {
    json arr = json::array();
    for (const auto& ev : gs.crossings) {
        arr.push_back({{"e_star", ev.e_star},
                       {"branch_a", ev.branch_a},
                       {"branch_b", ev.branch_b},
                       {"action", ev.action},
                       {"slope_a", ev.slope_a},
                       {"slope_b", ev.slope_b},
                       {"slope_gap", ev.slope_gap()},
                       {"hyperbolic_a", ev.hyperbolic_a},
                       {"hyperbolic_b", ev.hyperbolic_b}});
    }
    json j;
    j["crossings"] = arr;
    return j.dump(2) + "\n";
}

std::string summary_to_csv(const GlobalStructure& gs) {
    std::ostringstream out;
    out << "e,n_global_minima,min_action,lambda0,multiplier_modulus\n";
    for (const auto& row : gs.summary) {
        out << fmt(row.e) << ',' << row.n_global_minima << ','
            << fmt(row.min_action) << ',' << fmt(row.lambda0) << ','
            << fmt(row.multiplier_modulus) << '\n';
    }
    return out.str();
}

std::string monte_carlo_to_json(const MonteCarloReport& rep) {
    json j;
    j["seed"] = rep.seed;
    j["epsilon"] = rep.epsilon;
    j["threshold"] = rep.threshold;
    j["n"] = rep.n;
    j["passed"] = rep.passed;
    j["fraction"] = rep.fraction;
    j["ci"] = json::array({rep.ci_lo, rep.ci_hi});
    json arr = json::array();
    for (const auto& s : rep.samples) {
        arr.push_back({{"index", s.index},
                       {"params", json::array({s.params[0], s.params[1], s.params[2],
                                               s.params[3]})},
                       {"min_lambda_ratio", s.min_lambda_ratio},
                       {"pass", s.pass},
                       {"failure", s.failure}});
    }
    j["samples"] = arr;
    json failed = json::array();
    for (int idx : rep.failures) {
        const auto& s = rep.samples[static_cast<size_t>(idx)];
        failed.push_back(json::array(
            {s.params[0], s.params[1], s.params[2], s.params[3]}));
    }
    j["failures"] = failed;
    j["failure_indices"] = rep.failures;
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::string msg = "cannot open for writing: " + path;
        raise(Err::Io, msg);
    }
    out << content;
    if (!out.good()) {
        std::string msg = "short write: " + path;
        raise(Err::Io, msg);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::string msg = "cannot open for reading: " + path;
        raise(Err::Io, msg);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace orbits
