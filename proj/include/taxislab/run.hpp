#pragma once
/// @file run.hpp
/// @brief Time loop: initialization, stepping, blow-up detection, and
/// emission of diagnostics rows and snapshots.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "taxislab/config.hpp"
#include "taxislab/diagnostics.hpp"
#include "taxislab/grid.hpp"
#include "taxislab/solver.hpp"

namespace taxislab {

enum class RunStatus { completed, blowup_detected };

inline const char* to_string(RunStatus s) {
    return s == RunStatus::completed ? "completed" : "blow-up detected";
}

struct RunSummary {
    RunStatus status = RunStatus::completed;
    State initial_state;
    State final_state;
    std::vector<DiagnosticsRow> series;
    long long steps = 0;
    /// Largest per-step clipped mass relative to the total mass of u, h, w.
    double max_clip_ratio = 0.0;
    long long linear_iterations = 0;
    std::vector<std::string> warnings;

    double initial_u_max() const { return max_norm(initial_state.u); }
    double final_u_max() const { return max_norm(final_state.u); }
    double growth() const {
        const double m0 = initial_u_max();
        return m0 > 0 ? final_u_max() / m0 : 0.0;
    }
};

/// 64-bit FNV-1a over the raw bytes of a field.
inline std::uint64_t field_hash(const Field& f) {
    std::uint64_t h = 1469598103934665603ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(f.data.data());
    for (std::size_t i = 0; i < f.data.size() * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

class RunWriter {
public:
    RunWriter(const std::filesystem::path& dir, bool has_producer) : dir_(dir), has_producer_(has_producer) {
        std::filesystem::create_directories(dir_);
        series_.open(dir_ / "timeseries.csv");
        if (!series_) throw std::runtime_error("cannot write " + (dir_ / "timeseries.csv").string());
        series_ << kTimeseriesHeader << '\n';
    }

    void row(const DiagnosticsRow& r) {
        write_timeseries_row(series_, r);
        series_.flush();
    }

    void snapshot(const State& s, long long step_index) {
        const std::string suffix = "_" + std::to_string(step_index) + ".csv";
        write_field_csv(s.u, dir_ / ("u" + suffix));
        write_field_csv(s.h, dir_ / ("h" + suffix));
        write_field_csv(s.v, dir_ / ("v" + suffix));
        if (has_producer_) write_field_csv(s.w, dir_ / ("w" + suffix));
    }

private:
    std::filesystem::path dir_;
    bool has_producer_;
    std::ofstream series_;
};

}  // namespace detail

/// Run a scenario to t_end or until blow-up is detected. When `out_dir` is
/// given, writes timeseries.csv and per-field snapshots there. Rows and
/// snapshots are emitted at t = 0, at the first step reaching each multiple
/// of snapshot_every, and at termination.
inline RunSummary run(const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
    const AnyKinetics kin = make_kinetics(cfg);
    const bool has_producer = std::visit([](const auto& k) { return k.has_producer(); }, kin);

    RunSummary summary;
    State state = init_scenario(cfg.initial, cfg.grid, has_producer, &summary.warnings);
    summary.initial_state = state;

    std::optional<detail::RunWriter> writer;
    if (out_dir) writer.emplace(*out_dir, has_producer);

    DiagnosticsRow pending{};  // step aggregates since the last emitted row
    const auto emit = [&](const State& s, double last_dt) {
        DiagnosticsRow r = diagnose(s, cfg.quasi_energy);
        r.dt = last_dt;
        r.clipped_mass = pending.clipped_mass;
        r.linear_iterations = summary.linear_iterations;
        pending = {};
        summary.series.push_back(r);
        if (writer) {
            writer->row(r);
            writer->snapshot(s, summary.steps);
        }
    };

    emit(state, 0.0);
    const double every = cfg.solver.snapshot_every;
    long long next_k = 1;

    while (state.t < cfg.solver.t_end) {
        const double prev_max = max_norm(state.u);
        const double total_mass = integrate(state.u) + integrate(state.h) + integrate(state.w);
        StepResult res = step(state, kin, cfg.model_params, cfg.solver);
        state = std::move(res.state);
        ++summary.steps;
        summary.linear_iterations += res.report.iterations_u + res.report.iterations_h;
        pending.clipped_mass += res.report.clipped_mass;
        if (total_mass > 0) {
            summary.max_clip_ratio = std::max(summary.max_clip_ratio, res.report.clipped_mass / total_mass);
        }

        const BlowupFlag flag = detect_blowup(state, cfg.solver, prev_max);
        const bool done = state.t >= cfg.solver.t_end || flag != BlowupFlag::none;
        if (done || state.t >= next_k * every) {
            emit(state, res.report.dt);
            next_k = static_cast<long long>(std::floor(state.t / every)) + 1;
        }
        if (flag != BlowupFlag::none) {
            summary.status = RunStatus::blowup_detected;
            break;
        }
    }
    summary.final_state = std::move(state);
    return summary;
}

}  // namespace taxislab
