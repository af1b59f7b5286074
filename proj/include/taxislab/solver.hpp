#pragma once
/// @file solver.hpp
/// @brief IMEX time stepping: explicit donor-cell taxis and kinetics,
/// implicit Neumann diffusion by conjugate gradients.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "taxislab/grid.hpp"
#include "taxislab/model.hpp"

namespace taxislab {

/// Hard numerical failure (non-finite state, linear solver breakdown).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double t_end = 1.0;
    double cfl = 0.45;
    double dt_max = 1e-2;
    /// Entries of u, h, w below -theta_clip are raised to -theta_clip.
    double theta_clip = 0.0;
    double lin_tol = 1e-10;
    int lin_maxiter = 2000;
    double v_floor = 1e-12;
    double snapshot_every = 0.1;
    double blowup_threshold = 1e6;

    void validate() const {
        if (!(t_end >= 0) || !std::isfinite(t_end)) throw ConfigError("solver.t_end must be finite and >= 0");
        if (!(cfl > 0 && cfl < 1)) throw ConfigError("solver.cfl must lie in (0, 1)");
        if (!(dt_max > 0)) throw ConfigError("solver.dt_max must be > 0");
        if (!(theta_clip >= 0)) throw ConfigError("solver.theta_clip must be >= 0");
        if (!(lin_tol > 0 && lin_tol <= 1e-4)) throw ConfigError("solver.lin_tol must lie in (0, 1e-4]");
        if (lin_maxiter < 1) throw ConfigError("solver.lin_maxiter must be >= 1");
        if (!(v_floor > 0)) throw ConfigError("solver.v_floor must be > 0");
        if (!(snapshot_every > 0)) throw ConfigError("solver.snapshot_every must be > 0");
        if (!(blowup_threshold > 0)) throw ConfigError("solver.blowup_threshold must be > 0");
    }
};

struct StepReport {
    double dt = 0.0;
    int iterations_u = 0;
    int iterations_h = 0;
    /// Area-weighted negativity removed from u, h and w.
    double clipped_mass = 0.0;
    /// Largest |face velocity| of the combined taxis drift.
    double max_face_speed = 0.0;
};

/// Conservative donor-cell discretization of -div(u coeff grad p).
/// Boundary faces carry no flux.
inline Field taxis_divergence(const Field& u, const Field& potential, double coeff) {
    const Grid& g = u.grid;
    const FaceGradients grad = face_gradients(potential);
    const double idx = 1.0 / g.dx();
    const double idy = 1.0 / g.dy();
    Field out(g, 0.0);
    // x-faces: flux leaves cell i-1 and enters cell i.
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const double vel = coeff * grad.xface(i, j);
            const double flux = vel * (vel > 0 ? u(i - 1, j) : u(i, j));
            out(i - 1, j) -= flux * idx;
            out(i, j) += flux * idx;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double vel = coeff * grad.yface(i, j);
            const double flux = vel * (vel > 0 ? u(i, j - 1) : u(i, j));
            out(i, j - 1) -= flux * idy;
            out(i, j) += flux * idy;
        }
    }
    return out;
}

struct LinearSolve {
    Field solution;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Solve (I - dt D Lap_N) x = f by conjugate gradients with x0 = f.
///
/// Starting from f keeps every residual orthogonal to constants, so the
/// solve preserves sum(x) = sum(f) up to round-off.
inline LinearSolve implicit_diffusion(const Field& f, double D, double dt, const SolverConfig& cfg) {
    if (D < 0 || dt < 0) throw std::invalid_argument("implicit_diffusion: D and dt must be >= 0");
    const Grid& g = f.grid;
    const double hmin = std::min(g.dx(), g.dy());
    if (dt * D / (hmin * hmin) < 1e-14) return {f, 0, 0.0};

    const double s = dt * D;
    const auto apply = [&](const Field& x) {
        Field ax = laplacian_neumann(x);
        for (std::size_t k = 0; k < ax.size(); ++k) ax[k] = x[k] - s * ax[k];
        return ax;
    };
    const auto dot = [](const Field& a, const Field& b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
        return acc;
    };

    const double bnorm = std::sqrt(dot(f, f));
    if (bnorm == 0.0) return {f, 0, 0.0};

    Field x = f;
    Field r = apply(x);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = f[k] - r[k];
    Field p = r;
    double rr = dot(r, r);
    int it = 0;
    while (std::sqrt(rr) > cfg.lin_tol * bnorm) {
        if (it == cfg.lin_maxiter) {
            throw SolverError("implicit_diffusion: no convergence after " + std::to_string(it) +
                              " iterations, relative residual " +
                              std::to_string(std::sqrt(rr) / bnorm));
        }
        ++it;
        const Field q = apply(p);
        const double a = rr / dot(p, q);
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] += a * p[k];
            r[k] -= a * q[k];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = r[k] + beta * p[k];
    }
    return {std::move(x), it, std::sqrt(rr) / bnorm};
}

/// Per-cell explicit reaction rate used to cap dt:
/// max(|f| / max(u,1), |g| / max(h,1), |-alpha u + phi|, |psi|).
template <Kinetics K>
double reaction_rate(const K& kin, const Point& p) {
    const double ru = std::abs(kin.f(p)) / std::max(p.u, 1.0);
    const double rh = std::abs(kin.g(p)) / std::max(p.h, 1.0);
    const double rv = std::abs(-kin.alpha() * p.u + kin.phi(p));
    const double rw = std::abs(kin.psi(p));
    return std::max({ru, rh, rv, rw});
}

struct TimeStepLimits {
    double dt = 0.0;
    double max_face_speed = 0.0;
    bool reaches_end = false;
};

/// dt = min(dt_max, cfl h / V_max, 0.1 / max(1, rate), 0.9 / outflow_max,
/// t_end - t). The outflow term only binds at cells draining through three
/// or more faces, where the face-speed CFL alone admits undershoot.
template <Kinetics K>
TimeStepLimits compute_dt(const State& s, const K& kin, const ModelParams& mp, const SolverConfig& cfg) {
    const Grid& g = s.grid;
    Field potential(g);
    for (std::size_t k = 0; k < g.size(); ++k) potential[k] = mp.chi * s.h[k] + mp.xi * s.v[k];
    const FaceGradients grad = face_gradients(potential);

    double vmax = 0.0;
    for (double x : grad.x) vmax = std::max(vmax, std::abs(x));
    for (double y : grad.y) vmax = std::max(vmax, std::abs(y));

    double outflow_max = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double out = (std::max(-grad.xface(i, j), 0.0) + std::max(grad.xface(i + 1, j), 0.0)) / g.dx() +
                               (std::max(-grad.yface(i, j), 0.0) + std::max(grad.yface(i, j + 1), 0.0)) / g.dy();
            outflow_max = std::max(outflow_max, out);
        }
    }

    double rate = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        rate = std::max(rate, reaction_rate(kin, Point{s.u[k], s.v[k], s.w[k], s.h[k]}));
    }

    double dt = cfg.dt_max;
    if (vmax > 0) dt = std::min(dt, cfg.cfl * std::min(g.dx(), g.dy()) / vmax);
    if (outflow_max > 0) dt = std::min(dt, 0.9 / outflow_max);
    dt = std::min(dt, 0.1 / std::max(1.0, rate));
    bool reaches_end = false;
    if (s.t + dt >= cfg.t_end && cfg.t_end > s.t) {
        dt = cfg.t_end - s.t;
        reaches_end = true;
    }
    return {dt, vmax, reaches_end};
}

namespace detail {

inline void require_finite(const Field& f, const char* name) {
    for (int j = 0; j < f.grid.ny; ++j) {
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!std::isfinite(f(i, j))) {
                throw SolverError(std::string("non-finite value in field ") + name + " at cell (" +
                                  std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
}

/// Raise entries below `level` to `level`; returns the removed deficit times cell area.
inline double clip_below(Field& f, double level) {
    double removed = 0.0;
    for (double& x : f.data) {
        if (x < level) {
            removed += level - x;
            x = level;
        }
    }
    return removed * f.grid.cell_area();
}

}  // namespace detail

struct StepResult {
    State state;
    StepReport report;
};

/// Advance one IMEX step. Every explicit stage reads the beginning-of-step
/// fields.
template <Kinetics K>
StepResult step(const State& s, const K& kin, const ModelParams& mp, const SolverConfig& cfg) {
    const Grid& g = s.grid;
    const std::size_t n = g.size();
    const TimeStepLimits lim = compute_dt(s, kin, mp, cfg);
    const double dt = lim.dt;

    StepResult res;
    res.report.dt = dt;
    res.report.max_face_speed = lim.max_face_speed;

    Field potential(g);
    for (std::size_t k = 0; k < n; ++k) potential[k] = mp.chi * s.h[k] + mp.xi * s.v[k];
    const Field taxis = taxis_divergence(s.u, potential, 1.0);

    Field u_star(g), h_star(g), v_new(g), w_new(g);
    const double alpha = kin.alpha();
    const double beta = kin.beta();
    for (std::size_t k = 0; k < n; ++k) {
        const Point p{s.u[k], s.v[k], s.w[k], s.h[k]};
        u_star[k] = p.u + dt * (taxis[k] + kin.f(p));
        h_star[k] = p.h + dt * kin.g(p);
        v_new[k] = p.v + dt * (-alpha * p.u * p.v + p.v * kin.phi(p) + kin.Phi(p.w));
        w_new[k] = p.w + dt * (beta * p.u + p.w * kin.psi(p));
    }

    LinearSolve su = implicit_diffusion(u_star, mp.Du, dt, cfg);
    LinearSolve sh = implicit_diffusion(h_star, mp.Dh, dt, cfg);
    res.report.iterations_u = su.iterations;
    res.report.iterations_h = sh.iterations;

    State& out = res.state;
    out.grid = g;
    out.u = std::move(su.solution);
    out.h = std::move(sh.solution);
    out.v = std::move(v_new);
    out.w = std::move(w_new);

    detail::require_finite(out.u, "u");
    detail::require_finite(out.h, "h");
    detail::require_finite(out.v, "v");
    detail::require_finite(out.w, "w");

    const double level = -cfg.theta_clip;
    res.report.clipped_mass = detail::clip_below(out.u, level) + detail::clip_below(out.h, level) +
                              detail::clip_below(out.w, level);
    detail::clip_below(out.v, cfg.v_floor);
    out.t = lim.reaches_end ? cfg.t_end : s.t + dt;
    return res;
}

inline StepResult step(const State& s, const AnyKinetics& kin, const ModelParams& mp, const SolverConfig& cfg) {
    return std::visit([&](const auto& k) { return step(s, k, mp, cfg); }, kin);
}

enum class BlowupFlag { none, threshold, growth };

/// Flags ||u||_inf above the threshold, or growth by more than 10x across
/// one step when the previous maximum is known (> 0).
inline BlowupFlag detect_blowup(const State& s, const SolverConfig& cfg, double previous_u_max = 0.0) {
    const double m = max_norm(s.u);
    if (m > cfg.blowup_threshold) return BlowupFlag::threshold;
    if (previous_u_max > 0.0 && m > 10.0 * previous_u_max) return BlowupFlag::growth;
    return BlowupFlag::none;
}

}  // namespace taxislab
