#pragma once
/// @file experiments.hpp
/// @brief Command implementations behind the `taxislab` CLI.
///
/// Exit codes: 0 success, 1 error, 2 blow-up detected (run), 3 hypothesis
/// violation (check). compare returns 0 only when the dichotomy holds.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "taxislab/config.hpp"
#include "taxislab/hypotheses.hpp"
#include "taxislab/run.hpp"

namespace taxislab {

namespace fs = std::filesystem;

inline json row_to_json(const DiagnosticsRow& r) {
    return json{{"t", r.t},
                {"mass_u", r.mass_u},
                {"mass_w", r.mass_w},
                {"mass_h", r.mass_h},
                {"max_u", r.max_u},
                {"max_h", r.max_h},
                {"max_v", r.max_v},
                {"max_w", r.max_w},
                {"min_v", r.min_v},
                {"entropy_u", r.entropy_u},
                {"grad_h_sq", r.dirichlet_h},
                {"grad_v_sq_over_v", r.fisher_v},
                {"grad_w_sq_over_w", r.fisher_w},
                {"w_sq", r.l2sq_w},
                {"F", r.F},
                {"D", r.D},
                {"dt", r.dt},
                {"clipped_mass", r.clipped_mass},
                {"linear_iterations", r.linear_iterations}};
}

inline std::vector<EnergySample> energy_series(const RunSummary& s) {
    std::vector<EnergySample> out;
    for (const auto& r : s.series) {
        if (!out.empty() && !(r.t > out.back().t)) continue;
        out.push_back({r.t, r.F, r.D});
    }
    return out;
}

/// Fitted quasi-energy constant, or nullopt when infeasible or too short.
inline std::optional<double> fitted_energy_constant(const RunSummary& s) {
    const auto series = energy_series(s);
    if (series.size() < 3) return std::nullopt;
    const EnergyFit fit = fit_energy_constant(series);
    if (!fit.feasible) return std::nullopt;
    return fit.C;
}

/// Run one parsed scenario into `dir`, writing timeseries.csv, snapshots
/// and manifest.json.
inline RunSummary run_to_directory(const ScenarioConfig& cfg, const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunSummary summary = run(cfg, dir);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["config"] = cfg.source;
    manifest["model"] = cfg.model;
    manifest["status"] = to_string(summary.status);
    manifest["wall_time_s"] = wall;
    manifest["steps"] = summary.steps;
    manifest["max_clip_ratio"] = summary.max_clip_ratio;
    manifest["growth"] = summary.growth();
    manifest["warnings"] = summary.warnings;
    manifest["final"] = row_to_json(summary.series.back());
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
    return summary;
}

inline int cmd_run(const fs::path& config_path, const std::optional<fs::path>& out_dir,
                   std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const ScenarioConfig cfg = parse_config(config_path);
        const fs::path dir = out_dir ? *out_dir : fs::path(cfg.output_dir);
        const RunSummary s = run_to_directory(cfg, dir);
        for (const auto& w : s.warnings) err << "warning: " << w << '\n';
        out << cfg.model << ": " << to_string(s.status) << " at t = " << s.final_state.t << " after "
            << s.steps << " steps, max u = " << s.final_u_max() << " (growth " << s.growth() << ")\n";
        return s.status == RunStatus::completed ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline void print_report(const HypothesisReport& report, const SampleBox& box, std::ostream& out) {
    char buf[512];
    out << "model " << report.model << ", box [0," << box.U << "]x[0," << box.V << "]x[0," << box.W << "]x[0,"
        << box.H << "], " << box.samples << " samples per axis\n";
    std::snprintf(buf, sizeof buf, "%-12s %-6s %-42s %s\n", "condition", "status", "inequality", "detail");
    out << buf;
    for (const auto& c : report.conditions) {
        std::string detail;
        if (c.passed) {
            char m[64];
            std::snprintf(m, sizeof m, "margin %.6g", c.margin);
            detail = c.evaluated ? m : "not evaluated";
        } else if (c.witness) {
            const Witness& w = *c.witness;
            char m[256];
            std::snprintf(m, sizeof m, "witness (u,v,w,h)=(%.6g, %.6g, %.6g, %.6g) lhs=%.6g rhs=%.6g [%lld violations]",
                          w.point.u, w.point.v, w.point.w, w.point.h, w.lhs, w.rhs,
                          static_cast<long long>(c.violations));
            detail = m;
        }
        std::snprintf(buf, sizeof buf, "%-12s %-6s %-42s %s\n", std::string(condition_id(c.condition)).c_str(),
                      c.passed ? "pass" : "FAIL",
                      std::string(kConditionText[static_cast<int>(c.condition)]).c_str(), detail.c_str());
        out << buf;
    }
}

inline int cmd_check(const fs::path& config_path, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const ScenarioConfig cfg = parse_config(config_path);
        if (!cfg.hypothesis_budget) throw ConfigError("check requires a hypothesis_budget block");
        const HypothesisReport report = check_hypotheses(make_kinetics(cfg), *cfg.hypothesis_budget, cfg.box);
        print_report(report, cfg.box, out);
        return report.all_passed() ? 0 : 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

struct CompareVerdict {
    double growth_indirect = 0.0;
    double growth_direct = 0.0;
    double r_hi = 50.0;
    double r_lo = 10.0;
    bool dichotomy_holds = false;
    bool identical_initial_data = false;
    RunSummary indirect;
    RunSummary direct;
};

inline bool same_initial_data(const RunSummary& a, const RunSummary& b) {
    return field_hash(a.initial_state.u) == field_hash(b.initial_state.u) &&
           field_hash(a.initial_state.h) == field_hash(b.initial_state.h) &&
           field_hash(a.initial_state.v) == field_hash(b.initial_state.v);
}

/// Run the indirect and direct CAF variants from one document.
inline CompareVerdict compare(const json& doc, const fs::path& out_dir, double r_hi = 50.0, double r_lo = 10.0) {
    const ScenarioConfig ind = parse_config_json(to_indirect_variant(doc));
    const ScenarioConfig dir = parse_config_json(to_direct_variant(doc));

    CompareVerdict v;
    v.r_hi = r_hi;
    v.r_lo = r_lo;
    v.indirect = run_to_directory(ind, out_dir / "indirect");
    v.direct = run_to_directory(dir, out_dir / "direct");
    v.growth_indirect = v.indirect.growth();
    v.growth_direct = v.direct.growth();
    v.identical_initial_data = same_initial_data(v.indirect, v.direct);
    v.dichotomy_holds = v.growth_direct >= r_hi && v.growth_indirect <= r_lo;

    json j;
    j["growth_indirect"] = v.growth_indirect;
    j["growth_direct"] = v.growth_direct;
    j["R_hi"] = r_hi;
    j["R_lo"] = r_lo;
    j["dichotomy_holds"] = v.dichotomy_holds;
    j["identical_initial_data"] = v.identical_initial_data;
    j["initial_hash"] = {{"u", field_hash(v.indirect.initial_state.u)},
                         {"h", field_hash(v.indirect.initial_state.h)},
                         {"v", field_hash(v.indirect.initial_state.v)}};
    j["indirect"] = {{"status", to_string(v.indirect.status)}, {"t_final", v.indirect.final_state.t},
                     {"steps", v.indirect.steps}};
    j["direct"] = {{"status", to_string(v.direct.status)}, {"t_final", v.direct.final_state.t},
                   {"steps", v.direct.steps}};
    std::ofstream(out_dir / "compare.json") << j.dump(2) << '\n';
    return v;
}

inline int cmd_compare(const fs::path& config_path, const std::optional<fs::path>& out_dir, double r_hi = 50.0,
                       double r_lo = 10.0, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const json doc = read_json_file(config_path);
        const ScenarioConfig cfg = parse_config_json(doc);
        if (cfg.model != "caf_indirect" && cfg.model != "caf_direct") {
            throw ConfigError("compare requires a CAF model (caf_indirect or caf_direct)");
        }
        const fs::path dir = out_dir ? *out_dir : fs::path(cfg.output_dir);
        fs::create_directories(dir);
        const CompareVerdict v = compare(doc, dir, r_hi, r_lo);
        out << "indirect: " << to_string(v.indirect.status) << ", growth " << v.growth_indirect << '\n'
            << "direct:   " << to_string(v.direct.status) << ", growth " << v.growth_direct << '\n'
            << "dichotomy (direct >= " << r_hi << ", indirect <= " << r_lo
            << "): " << (v.dichotomy_holds ? "holds" : "does not hold") << '\n';
        if (!v.identical_initial_data) throw std::runtime_error("initial u, h, v differ between variants");
        return v.dichotomy_holds ? 0 : 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

struct SweepAxis {
    std::string path;  ///< dotted key path, e.g. "model_params.chi"
    std::vector<json> values;
};

/// Parse "path=v1,v2,...". Values are read as JSON when possible, otherwise
/// as strings.
inline SweepAxis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("sweep axis \"" + spec + "\": expected path=v1,v2,...");
    SweepAxis axis;
    axis.path = spec.substr(0, eq);
    std::stringstream rest(spec.substr(eq + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        if (item.empty()) continue;
        json v = json::parse(item, nullptr, false);
        axis.values.push_back(v.is_discarded() ? json(item) : v);
    }
    if (axis.values.empty()) throw ConfigError("empty sweep axis \"" + axis.path + "\"");
    return axis;
}

inline json apply_override(json doc, const std::string& path, const json& value) {
    if (path == "model" && value.is_string()) {
        if (value == "caf_direct") return to_direct_variant(std::move(doc));
        if (value == "caf_indirect") return to_indirect_variant(std::move(doc));
    }
    json::json_pointer ptr("/" + [&] {
        std::string p = path;
        for (char& c : p) {
            if (c == '.') c = '/';
        }
        return p;
    }());
    doc[ptr] = value;
    return doc;
}

struct SweepRow {
    std::vector<json> values;
    std::string status;
    double growth = 0.0;
    double final_F = 0.0;
    std::optional<double> fitted_C;
    double wall_time = 0.0;
};

inline unsigned sweep_workers(std::optional<unsigned> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("TAXISLAB_JOBS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Cartesian-product sweep. Each job runs in `out_dir/job_<k>`; failures
/// are recorded per row. Writes `out_dir/sweep.csv`.
inline std::vector<SweepRow> sweep(const json& base, const std::vector<SweepAxis>& axes, const fs::path& out_dir,
                                   unsigned workers) {
    if (axes.empty()) throw ConfigError("sweep needs at least one --axis");
    std::size_t total = 1;
    for (const auto& a : axes) {
        if (a.values.empty()) throw ConfigError("empty sweep axis \"" + a.path + "\"");
        total *= a.values.size();
    }
    fs::create_directories(out_dir);

    std::vector<SweepRow> rows(total);
    for (std::size_t job = 0; job < total; ++job) {
        std::size_t rem = job;
        rows[job].values.resize(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            rows[job].values[a] = axes[a].values[rem % axes[a].values.size()];
            rem /= axes[a].values.size();
        }
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            SweepRow& row = rows[job];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                json doc = base;
                for (std::size_t a = 0; a < axes.size(); ++a) doc = apply_override(std::move(doc), axes[a].path, row.values[a]);
                const ScenarioConfig cfg = parse_config_json(doc);
                const RunSummary s = run_to_directory(cfg, out_dir / ("job_" + std::to_string(job)));
                row.status = to_string(s.status);
                row.growth = s.growth();
                row.final_F = s.series.back().F;
                row.fitted_C = fitted_energy_constant(s);
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
            row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ofstream csv(out_dir / "sweep.csv");
    csv << "job";
    for (const auto& a : axes) csv << ',' << a.path;
    csv << ",status,growth,final_F,fitted_C,wall_time_s\n";
    const auto quote = [](std::string s) {
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    char buf[256];
    for (std::size_t job = 0; job < total; ++job) {
        const SweepRow& r = rows[job];
        csv << job;
        for (const auto& v : r.values) csv << ',' << (v.is_string() ? v.get<std::string>() : v.dump());
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", r.growth, r.final_F);
        csv << ',' << quote(r.status) << buf;
        if (r.fitted_C) {
            std::snprintf(buf, sizeof buf, "%.17g", *r.fitted_C);
            csv << buf;
        } else {
            csv << "infeasible";
        }
        std::snprintf(buf, sizeof buf, ",%.6f\n", r.wall_time);
        csv << buf;
    }
    return rows;
}

inline int cmd_sweep(const fs::path& config_path, const std::vector<std::string>& axis_specs,
                     std::optional<unsigned> jobs, const std::optional<fs::path>& out_dir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const json base = read_json_file(config_path);
        const ScenarioConfig cfg = parse_config_json(base);
        std::vector<SweepAxis> axes;
        for (const auto& s : axis_specs) axes.push_back(parse_axis(s));
        const fs::path dir = out_dir ? *out_dir : fs::path(cfg.output_dir) / "sweep";
        const auto rows = sweep(base, axes, dir, sweep_workers(jobs));
        int failures = 0;
        for (const auto& r : rows) failures += r.status.rfind("error", 0) == 0 ? 1 : 0;
        out << rows.size() << " jobs, " << failures << " failed; results in " << (dir / "sweep.csv").string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace taxislab
