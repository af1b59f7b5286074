#pragma once
/// @file diagnostics.hpp
/// @brief Functionals monitored along trajectories: masses, entropy,
/// weighted Dirichlet integrals, the quasi-energy F and its dissipation D,
/// and checks of the computable a priori bounds.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxislab/grid.hpp"

namespace taxislab {

/// Integral of u ln u, with 0 ln 0 = 0.
inline double entropy(const Field& u) {
    double s = 0.0;
    for (double x : u.data) {
        if (x > 0.0) s += x * std::log(x);
    }
    return s * u.grid.cell_area();
}

/// Face-based discretization of the integral of |grad f|^2 / weight.
///
/// Each interior face owns the strip between its two cell centers; a face
/// next to the boundary also owns the adjacent boundary half-cell, so the
/// control volumes tile the domain and linear f is integrated exactly.
/// The weight is the arithmetic mean of the two adjacent cells, floored.
/// With `weight` empty the weight is 1.
inline double weighted_dirichlet(const Field& f, const Field* weight, double floor) {
    const Grid& g = f.grid;
    const FaceGradients grad = face_gradients(f);
    const double area = g.cell_area();
    const auto w_at = [&](int i0, int j0, int i1, int j1) {
        if (!weight) return 1.0;
        return std::max(0.5 * ((*weight)(i0, j0) + (*weight)(i1, j1)), floor);
    };
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const double gx = grad.xface(i, j);
            if (gx == 0.0) continue;
            const double vol = 1.0 + (i == 1 ? 0.5 : 0.0) + (i == g.nx - 1 ? 0.5 : 0.0);
            s += vol * gx * gx / w_at(i - 1, j, i, j);
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double gy = grad.yface(i, j);
            if (gy == 0.0) continue;
            const double vol = 1.0 + (j == 1 ? 0.5 : 0.0) + (j == g.ny - 1 ? 0.5 : 0.0);
            s += vol * gy * gy / w_at(i, j - 1, i, j);
        }
    }
    return s * area;
}

/// Integral of |grad f|^2.
inline double dirichlet(const Field& f) { return weighted_dirichlet(f, nullptr, 1.0); }

/// Integral of |grad f|^2 / f.
inline double fisher_information(const Field& f, double floor) { return weighted_dirichlet(f, &f, floor); }

struct QuasiEnergyConfig {
    double a = 1.0;
    double b = 0.01;
    double xi = 0.0;
    double alpha = 1.0;
    double v_floor = 1e-12;
    double w_floor = 1e-12;

    void validate() const {
        if (!(a > 0)) throw ConfigError("quasi_energy.a must be > 0");
        if (!(b > 0)) throw ConfigError("quasi_energy.b must be > 0");
        if (!(alpha > 0)) throw ConfigError("quasi_energy: alpha must be > 0 for the xi/(2 alpha) weight");
    }
};

/// b = min(Du / (4 (beta + 1)), xi c_phi / (4 alpha)). A bound whose
/// coefficient vanishes is inactive; with neither active b falls back to 0.01.
inline double default_energy_weight_b(double Du, double beta, double xi, double c_phi, double alpha) {
    double b = INFINITY;
    if (Du > 0) b = Du / (4.0 * (beta + 1.0));
    if (xi > 0) b = std::min(b, xi * c_phi / (4.0 * alpha));
    return std::isfinite(b) ? b : 0.01;
}

struct EnergyTerms {
    double entropy_u = 0.0;
    double dirichlet_h = 0.0;
    double fisher_v = 0.0;
    double fisher_w = 0.0;
    double l2sq_w = 0.0;
    double fisher_u = 0.0;
    double l2sq_lap_h = 0.0;
    double F = 0.0;
    double D = 0.0;
};

/// F = int u ln u + a int |grad h|^2 + xi/(2 alpha) int |grad v|^2/v
///     + b int |grad w|^2/w + int w^2,
/// D = int |grad u|^2/u + int |Lap h|^2.
inline EnergyTerms quasi_energy(const State& s, const QuasiEnergyConfig& qc) {
    EnergyTerms e;
    e.entropy_u = entropy(s.u);
    e.dirichlet_h = dirichlet(s.h);
    e.fisher_v = fisher_information(s.v, qc.v_floor);
    e.fisher_w = fisher_information(s.w, qc.w_floor);
    e.l2sq_w = inner(s.w, s.w);
    e.fisher_u = fisher_information(s.u, qc.v_floor);
    const Field lap = laplacian_neumann(s.h);
    e.l2sq_lap_h = inner(lap, lap);
    e.F = e.entropy_u + qc.a * e.dirichlet_h + qc.xi / (2.0 * qc.alpha) * e.fisher_v + qc.b * e.fisher_w + e.l2sq_w;
    e.D = e.fisher_u + e.l2sq_lap_h;
    return e;
}

struct EnergySample {
    double t;
    double F;
    double D;
};

struct EnergyFit {
    bool feasible = false;
    double C = 0.0;  ///< smallest feasible constant (valid when feasible)
};

inline constexpr double kEnergyFitCmin = 1e-3;
inline constexpr double kEnergyFitCmax = 1e6;

/// Smallest C on {1e-3, ..., 1e6}, refined by bisection to three significant
/// digits, with
///   (F[i+1] - F[i-1]) / (t[i+1] - t[i-1]) + D[i] / C <= C F[i] + C
/// at every interior sample.
inline EnergyFit fit_energy_constant(const std::vector<EnergySample>& series) {
    if (series.size() < 3) throw std::invalid_argument("fit_energy_constant: need at least 3 samples");
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (!(series[i].t > series[i - 1].t)) {
            throw std::invalid_argument("fit_energy_constant: timestamps must be strictly increasing");
        }
    }
    const auto feasible = [&](double C) {
        for (std::size_t i = 1; i + 1 < series.size(); ++i) {
            const double dF = (series[i + 1].F - series[i - 1].F) / (series[i + 1].t - series[i - 1].t);
            if (!(dF + series[i].D / C <= C * series[i].F + C)) return false;
        }
        return true;
    };

    double lo = 0.0;
    double hi = 0.0;
    for (int k = -3; k <= 6; ++k) {
        const double C = std::pow(10.0, k);
        if (feasible(C)) {
            hi = C;
            break;
        }
        lo = C;
    }
    if (hi == 0.0) return {false, 0.0};
    if (lo == 0.0) return {true, hi};
    while (hi - lo > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return {true, hi};
}

struct BoundCheck {
    bool passed = true;
    std::optional<double> first_violation_time;
};

/// ||v(t)||_inf <= (1 + slack) (v0_max + C_Phi / C_phi) exp(C_phi t).
inline BoundCheck v_bound_check(const std::vector<double>& t, const std::vector<double>& v_max,
                                double v0_max, double C_phi, double C_Phi, double slack) {
    if (!(C_phi > 0)) throw std::invalid_argument("v_bound_check: C_phi must be > 0");
    if (t.size() != v_max.size()) throw std::invalid_argument("v_bound_check: series length mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double bound = (1.0 + slack) * (v0_max + C_Phi / C_phi) * std::exp(C_phi * t[i]);
        if (!(v_max[i] <= bound)) return {false, t[i]};
    }
    return {true, std::nullopt};
}

/// z = u exp(-lambda v), or nullopt when lambda ||v||_inf >= 700.
inline std::optional<Field> z_transform(const State& s, double lambda) {
    if (!(lambda * max_norm(s.v) < 700.0)) return std::nullopt;
    Field z(s.grid);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = s.u[k] * std::exp(-lambda * s.v[k]);
    return z;
}

struct DiagnosticsRow {
    double t = 0;
    double mass_u = 0, mass_w = 0, mass_h = 0;
    double max_u = 0, max_h = 0, max_v = 0, max_w = 0, min_v = 0;
    double entropy_u = 0;
    double dirichlet_h = 0;
    double fisher_v = 0;
    double fisher_w = 0;
    double l2sq_w = 0;
    double F = 0;
    double D = 0;
    double dt = 0;
    double clipped_mass = 0;
    long long linear_iterations = 0;
};

inline DiagnosticsRow diagnose(const State& s, const QuasiEnergyConfig& qc) {
    const EnergyTerms e = quasi_energy(s, qc);
    DiagnosticsRow r;
    r.t = s.t;
    r.mass_u = integrate(s.u);
    r.mass_w = integrate(s.w);
    r.mass_h = integrate(s.h);
    r.max_u = max_norm(s.u);
    r.max_h = max_norm(s.h);
    r.max_v = max_norm(s.v);
    r.max_w = max_norm(s.w);
    r.min_v = min_value(s.v);
    r.entropy_u = e.entropy_u;
    r.dirichlet_h = e.dirichlet_h;
    r.fisher_v = e.fisher_v;
    r.fisher_w = e.fisher_w;
    r.l2sq_w = e.l2sq_w;
    r.F = e.F;
    r.D = e.D;
    return r;
}

inline constexpr const char* kTimeseriesHeader =
    "t,mass_u,mass_w,mass_h,max_u,max_h,max_v,max_w,min_v,entropy_u,grad_h_sq,"
    "grad_v_sq_over_v,grad_w_sq_over_w,w_sq,F,D,dt,clipped_mass,linear_iterations";

inline void write_timeseries_row(std::ostream& out, const DiagnosticsRow& r) {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%lld\n",
                  r.t, r.mass_u, r.mass_w, r.mass_h, r.max_u, r.max_h, r.max_v, r.max_w, r.min_v,
                  r.entropy_u, r.dirichlet_h, r.fisher_v, r.fisher_w, r.l2sq_w, r.F, r.D, r.dt,
                  r.clipped_mass, r.linear_iterations);
    out << buf;
}

}  // namespace taxislab
