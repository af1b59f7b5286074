#pragma once
/// @file config.hpp
/// @brief Scenario configuration: JSON schema, defaults and validation.
///
/// Unknown keys are rejected so that typos fail loudly. Missing required
/// keys are collected and reported together.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "taxislab/diagnostics.hpp"
#include "taxislab/grid.hpp"
#include "taxislab/hypotheses.hpp"
#include "taxislab/model.hpp"
#include "taxislab/solver.hpp"

namespace taxislab {

using json = nlohmann::json;

struct ScenarioConfig {
    std::string model;
    ModelParams model_params;
    std::optional<CafParams> caf;
    std::optional<GoGrowParams> go_grow;
    Grid grid;
    InitialData initial;
    SolverConfig solver;
    QuasiEnergyConfig quasi_energy;
    std::optional<HypothesisBudget> hypothesis_budget;
    SampleBox box;
    std::string output_dir;
    /// The document the config was parsed from, echoed into run manifests.
    json source;
};

inline const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {"caf_indirect", "caf_direct", "go_or_grow"};
    return names;
}

inline AnyKinetics make_kinetics(const ScenarioConfig& cfg) {
    if (cfg.model == "go_or_grow") return make_go_or_grow(cfg.model_params, *cfg.go_grow);
    return make_caf(cfg.model_params, *cfg.caf);
}

namespace detail {

/// Walks one JSON object, remembering which keys were read.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path, std::vector<std::string>& missing)
        : obj_(obj), path_(std::move(path)), missing_(missing) {
        if (!obj_.is_object()) throw ConfigError(where() + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    template <class T>
    void optional(const std::string& key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        out = get<T>(key);
    }

    template <class T>
    void required(const std::string& key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            missing_.push_back(child(key));
            return;
        }
        out = get<T>(key);
    }

    const json* object(const std::string& key, bool required_key) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            if (required_key) missing_.push_back(child(key));
            return nullptr;
        }
        return &obj_.at(key);
    }

    void reject_unknown() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key \"" + it.key() + "\" in " + where());
        }
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "top level" : path_; }

    template <class T>
    T get(const std::string& key) const {
        try {
            return obj_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(child(key) + ": wrong type (got " + obj_.at(key).dump() + ")");
        }
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string>& missing_;
    std::set<std::string> seen_;
};

inline std::array<double, 2> read_point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(path + ": expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Parse and validate a scenario document.
inline ScenarioConfig parse_config_json(const json& doc) {
    using detail::ObjectReader;
    std::vector<std::string> missing;
    ScenarioConfig cfg;
    cfg.source = doc;
    ObjectReader top(doc, "", missing);

    top.required("model", cfg.model);
    top.optional("output_dir", cfg.output_dir);

    std::optional<double> alpha_given, beta_given;
    if (const json* mp = top.object("model_params", true)) {
        ObjectReader r(*mp, "model_params", missing);
        r.required("chi", cfg.model_params.chi);
        r.required("xi", cfg.model_params.xi);
        r.required("Du", cfg.model_params.Du);
        r.required("Dh", cfg.model_params.Dh);
        double a = NAN, b = NAN;
        r.optional("alpha", a);
        r.optional("beta", b);
        if (!std::isnan(a)) alpha_given = a;
        if (!std::isnan(b)) beta_given = b;
        r.reject_unknown();
    }

    const bool is_caf = cfg.model == "caf_indirect" || cfg.model == "caf_direct";
    if (const json* c = top.object("caf", is_caf)) {
        ObjectReader r(*c, "caf", missing);
        CafParams p;
        r.optional("mu", p.mu);
        r.optional("eta", p.eta);
        r.optional("alpha_h", p.alpha_h);
        r.optional("beta_v", p.beta_v);
        r.optional("gamma_w", p.gamma_w);
        std::string variant;
        r.optional("variant", variant);
        r.reject_unknown();
        if (!variant.empty() && variant != "indirect" && variant != "direct") {
            throw ConfigError("caf.variant must be \"indirect\" or \"direct\"");
        }
        if (is_caf) {
            const std::string implied = cfg.model == "caf_direct" ? "direct" : "indirect";
            if (!variant.empty() && variant != implied) {
                throw ConfigError("caf.variant \"" + variant + "\" contradicts model \"" + cfg.model + "\"");
            }
            p.variant = cfg.model == "caf_direct" ? CafVariant::direct : CafVariant::indirect;
        }
        cfg.caf = p;
    }
    if (const json* gg = top.object("go_grow", cfg.model == "go_or_grow")) {
        ObjectReader r(*gg, "go_grow", missing);
        GoGrowParams k;
        double* ks[] = {&k.k1, &k.k2, &k.k3, &k.k4, &k.k5, &k.k6, &k.k7, &k.k8, &k.k9};
        for (int i = 0; i < 9; ++i) r.optional("k" + std::to_string(i + 1), *ks[i]);
        r.reject_unknown();
        cfg.go_grow = k;
    }

    if (const json* g = top.object("grid", true)) {
        ObjectReader r(*g, "grid", missing);
        r.required("nx", cfg.grid.nx);
        r.required("ny", cfg.grid.ny);
        r.optional("Lx", cfg.grid.Lx);
        r.optional("Ly", cfg.grid.Ly);
        r.reject_unknown();
    }

    if (const json* in = top.object("initial", false)) {
        ObjectReader r(*in, "initial", missing);
        InitialData& d = cfg.initial;
        r.optional("eps_u", d.eps_u);
        r.optional("eps_h", d.eps_h);
        r.optional("eps_w", d.eps_w);
        r.optional("r0", d.r0);
        r.optional("v_max", d.v_max);
        r.optional("v_min", d.v_min);
        if (const json* c = r.object("centers", false)) {
            if (c->is_array()) {
                d.center_u = d.center_h = d.center_w = detail::read_point(*c, "initial.centers");
            } else {
                ObjectReader cr(*c, "initial.centers", missing);
                for (auto [key, dst] : {std::pair{"u", &d.center_u}, {"h", &d.center_h}, {"w", &d.center_w}}) {
                    if (const json* pt = cr.object(key, false)) *dst = detail::read_point(*pt, cr.child(key));
                }
                cr.reject_unknown();
            }
        }
        if (const json* st = r.object("stripes", false)) {
            ObjectReader sr(*st, "initial.stripes", missing);
            sr.optional("count", d.stripes.count);
            sr.optional("width", d.stripes.width);
            std::string orient;
            sr.optional("orientation", orient);
            sr.reject_unknown();
            if (orient == "horizontal") d.stripes.orientation = StripeOrientation::horizontal;
            else if (orient.empty() || orient == "vertical") d.stripes.orientation = StripeOrientation::vertical;
            else throw ConfigError("initial.stripes.orientation must be \"vertical\" or \"horizontal\"");
        }
        r.reject_unknown();
    }

    if (const json* s = top.object("solver", true)) {
        ObjectReader r(*s, "solver", missing);
        SolverConfig& c = cfg.solver;
        r.required("t_end", c.t_end);
        r.optional("cfl", c.cfl);
        r.optional("dt_max", c.dt_max);
        r.optional("theta_clip", c.theta_clip);
        r.optional("lin_tol", c.lin_tol);
        r.optional("lin_maxiter", c.lin_maxiter);
        r.optional("v_floor", c.v_floor);
        r.optional("snapshot_every", c.snapshot_every);
        r.optional("blowup_threshold", c.blowup_threshold);
        r.reject_unknown();
    }

    std::optional<double> b_given;
    if (const json* q = top.object("quasi_energy", false)) {
        ObjectReader r(*q, "quasi_energy", missing);
        r.optional("a", cfg.quasi_energy.a);
        double b = NAN;
        r.optional("b", b);
        if (!std::isnan(b)) b_given = b;
        r.reject_unknown();
    }

    if (const json* hb = top.object("hypothesis_budget", false)) {
        ObjectReader r(*hb, "hypothesis_budget", missing);
        HypothesisBudget b;
        r.required("c_phi", b.c_phi);
        r.required("C_phi", b.C_phi);
        r.required("C_Phi", b.C_Phi);
        r.required("gamma_psi", b.gamma_psi);
        r.required("Cf", b.Cf);
        r.required("Cg", b.Cg);
        r.required("Cpsi", b.Cpsi);
        if (const json* box = r.object("box", false)) {
            if (!box->is_array() || box->size() != 4) throw ConfigError("hypothesis_budget.box: expected [U, V, W, H]");
            cfg.box.U = (*box)[0].get<double>();
            cfg.box.V = (*box)[1].get<double>();
            cfg.box.W = (*box)[2].get<double>();
            cfg.box.H = (*box)[3].get<double>();
        }
        r.optional("samples", cfg.box.samples);
        r.reject_unknown();
        cfg.hypothesis_budget = b;
    }
    top.reject_unknown();

    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "missing required fields:";
        for (const auto& m : missing) msg << ' ' << m;
        throw ConfigError(msg.str());
    }

    // Validation.
    bool known = false;
    for (const auto& n : model_names()) known = known || n == cfg.model;
    if (!known) throw ConfigError("unknown model \"" + cfg.model + "\"");
    if (cfg.grid.nx < 4 || cfg.grid.ny < 4) throw ConfigError("grid: nx and ny must be >= 4");
    cfg.grid.validate();
    cfg.initial.validate();
    cfg.solver.validate();

    const AnyKinetics kin = make_kinetics(cfg);  // validates model-specific params
    const double alpha = std::visit([](const auto& k) { return k.alpha(); }, kin);
    const double beta = std::visit([](const auto& k) { return k.beta(); }, kin);
    if (alpha_given && *alpha_given != alpha) {
        throw ConfigError("model_params.alpha disagrees with the value implied by the model (" +
                          std::to_string(alpha) + ")");
    }
    if (beta_given && *beta_given != beta) {
        throw ConfigError("model_params.beta disagrees with the value implied by the model (" +
                          std::to_string(beta) + ")");
    }
    cfg.model_params.alpha = alpha;
    cfg.model_params.beta = beta;
    cfg.model_params.validate();

    if (cfg.hypothesis_budget) {
        cfg.hypothesis_budget->validate();
        cfg.box.validate();
    }

    QuasiEnergyConfig& qe = cfg.quasi_energy;
    qe.xi = cfg.model_params.xi;
    qe.alpha = alpha > 0 ? alpha : 1.0;
    qe.v_floor = cfg.solver.v_floor;
    qe.w_floor = cfg.solver.v_floor;
    if (b_given) qe.b = *b_given;
    else if (cfg.hypothesis_budget)
        qe.b = default_energy_weight_b(cfg.model_params.Du, beta, cfg.model_params.xi,
                                       cfg.hypothesis_budget->c_phi, qe.alpha);
    else qe.b = 0.01;
    qe.validate();

    if (cfg.output_dir.empty()) cfg.output_dir = "runs/" + cfg.model;
    return cfg;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline ScenarioConfig parse_config(const std::filesystem::path& path) {
    return parse_config_json(read_json_file(path));
}

/// Rewrite a CAF document into its direct-production counterpart: same
/// grid, initial data and solver, no producer field.
inline json to_direct_variant(json doc) {
    doc["model"] = "caf_direct";
    if (doc.contains("caf")) {
        doc["caf"]["beta_v"] = 0.0;
        doc["caf"]["gamma_w"] = 0.0;
        if (doc["caf"].contains("variant")) doc["caf"]["variant"] = "direct";
    }
    if (doc.contains("model_params")) {
        doc["model_params"].erase("alpha");
        doc["model_params"].erase("beta");
    }
    return doc;
}

inline json to_indirect_variant(json doc) {
    doc["model"] = "caf_indirect";
    if (doc.contains("caf") && doc["caf"].contains("variant")) doc["caf"]["variant"] = "indirect";
    if (doc.contains("model_params")) {
        doc["model_params"].erase("alpha");
        doc["model_params"].erase("beta");
    }
    return doc;
}

}  // namespace taxislab
