#pragma once
/// @file hypotheses.hpp
/// @brief Sampled falsifier for the structural growth conditions on the
/// kinetics (Hf, Hg, Hphi, HPhi, Hpsi).
///
/// Every inequality is written as lhs <= rhs and evaluated on the tensor
/// grid {0, U/(n-1), ..., U} x ... x {0, ..., H}. A violation is recorded
/// only when lhs - rhs > 1e-12 (1 + |rhs|). A pass certifies the sampled
/// points, nothing more.
///
/// The nondecreasing envelopes Cf(v), Cg(v), Cpsi(v) are represented by
/// their values at the box maximum V.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "taxislab/model.hpp"

namespace taxislab {

struct HypothesisBudget {
    double c_phi = 1.0;
    double C_phi = 1.0;
    double C_Phi = 1.0;
    double gamma_psi = 0.25;
    double Cf = 1.0;
    double Cg = 1.0;
    double Cpsi = 1.0;
    /// Lower envelope for f. Defaults to u -> -Cf u when empty.
    std::function<double(double)> f0;

    double lower_envelope(double u) const { return f0 ? f0(u) : -Cf * u; }

    void validate() const {
        if (!(c_phi > 0)) throw ConfigError("hypothesis_budget.c_phi must be > 0");
        if (!(C_phi > 0)) throw ConfigError("hypothesis_budget.C_phi must be > 0");
        if (!(C_Phi > 0)) throw ConfigError("hypothesis_budget.C_Phi must be > 0");
        if (!(gamma_psi > 0 && gamma_psi < 0.5)) {
            throw ConfigError("hypothesis_budget.gamma_psi must lie in (0, 1/2)");
        }
        if (!(Cf > 0)) throw ConfigError("hypothesis_budget.Cf must be > 0");
        if (!(Cg > 0)) throw ConfigError("hypothesis_budget.Cg must be > 0");
        if (!(Cpsi > 0)) throw ConfigError("hypothesis_budget.Cpsi must be > 0");
        if (!(lower_envelope(0.0) >= 0.0)) throw ConfigError("hypothesis_budget: f0(0) must be >= 0");
    }
};

/// Upper corner of the sampled box and samples per axis.
struct SampleBox {
    double U = 1.0;
    double V = 1.0;
    double W = 1.0;
    double H = 1.0;
    int samples = 11;

    void validate() const {
        if (samples < 2) throw ConfigError("hypothesis_budget.samples must be >= 2");
        if (!(U > 0 && V > 0 && W > 0 && H > 0)) {
            throw ConfigError("hypothesis_budget.box corners must be > 0");
        }
    }
};

enum class Condition : int {
    Hf_lower,
    Hf_upper,
    Hg_bound,
    Hg_sign,
    Hphi_upper,
    Hphi_u,
    Hphi_v,
    Hphi_w,
    Hphi_h,
    HPhi_nonneg,
    HPhi_upper,
    HPhi_slope,
    Hpsi_upper,
    Hpsi_u,
    Hpsi_v,
    Hpsi_w,
    Hpsi_h,
    non_finite,
};

inline constexpr int kConditionCount = static_cast<int>(Condition::non_finite) + 1;

inline constexpr std::array<std::string_view, kConditionCount> kConditionIds = {
    "Hf.lower",    "Hf.upper",    "Hg.bound",    "Hg.sign",   "Hphi.upper", "Hphi.u",
    "Hphi.v",      "Hphi.w",      "Hphi.h",      "HPhi.nonneg", "HPhi.upper", "HPhi.slope",
    "Hpsi.upper",  "Hpsi.u",      "Hpsi.v",      "Hpsi.w",    "Hpsi.h",     "non-finite",
};

inline constexpr std::array<std::string_view, kConditionCount> kConditionText = {
    "f0(u) <= f",
    "f <= Cf (u + w + 1)",
    "|g| <= Cg (w + h + 1)",
    "g(0, v, w, 0) >= 0",
    "phi <= -c_phi w + C_phi",
    "|phi_u| <= C_phi / sqrt(u v + 1)",
    "|phi_v| <= C_phi / (v + 1) + C_phi",
    "|phi_w| <= C_phi / sqrt(v + 1) + C_phi",
    "|phi_h| <= C_phi / sqrt(v + 1) + C_phi",
    "Phi(w) >= 0",
    "Phi(w) <= C_Phi",
    "w Phi'(w)^2 <= C_Phi Phi(w)",
    "psi <= Cpsi",
    "|psi_u| <= Cpsi / sqrt(u w + 1)",
    "|psi_v| <= Cpsi",
    "|psi_w| <= Cpsi / (w + 1)",
    "|psi_h| <= Cpsi / (w + 1)^gamma",
    "all evaluators finite",
};

inline std::string_view condition_id(Condition c) { return kConditionIds[static_cast<int>(c)]; }

/// The hypothesis group a condition belongs to ("Hf", "Hg", ...).
inline std::string_view condition_group(Condition c) {
    const std::string_view id = condition_id(c);
    const auto dot = id.find('.');
    return dot == std::string_view::npos ? id : id.substr(0, dot);
}

struct Sides {
    double lhs;
    double rhs;
};

inline bool violates(const Sides& s) {
    if (!std::isfinite(s.lhs) || !std::isfinite(s.rhs)) return true;
    return s.lhs - s.rhs > 1e-12 * (1.0 + std::abs(s.rhs));
}

/// Point-dependent factors shared by the right-hand sides. The sampler fills
/// these from per-axis tables; a single point computes them directly.
struct RhsFactors {
    double inv_sqrt_uv1 = 1.0;  ///< 1 / sqrt(u v + 1)
    double inv_sqrt_uw1 = 1.0;  ///< 1 / sqrt(u w + 1)
    double inv_v1 = 1.0;        ///< 1 / (v + 1)
    double inv_sqrt_v1 = 1.0;   ///< 1 / sqrt(v + 1)
    double inv_w1 = 1.0;        ///< 1 / (w + 1)
    double inv_w1_gamma = 1.0;  ///< (w + 1)^-gamma_psi

    static RhsFactors at(const Point& p, double gamma_psi) {
        return {1.0 / std::sqrt(p.u * p.v + 1.0), 1.0 / std::sqrt(p.u * p.w + 1.0), 1.0 / (p.v + 1.0),
                1.0 / std::sqrt(p.v + 1.0),       1.0 / (p.w + 1.0),                 std::pow(p.w + 1.0, -gamma_psi)};
    }
};

inline Sides condition_sides(Condition c, const KineticsValues& k, const Point& p, const HypothesisBudget& b,
                             const RhsFactors& r) {
    switch (c) {
        case Condition::Hf_lower: return {b.lower_envelope(p.u), k.f};
        case Condition::Hf_upper: return {k.f, b.Cf * (p.u + p.w + 1.0)};
        case Condition::Hg_bound: return {std::abs(k.g), b.Cg * (p.w + p.h + 1.0)};
        case Condition::Hg_sign: return {-k.g, 0.0};
        case Condition::Hphi_upper: return {k.phi, -b.c_phi * p.w + b.C_phi};
        case Condition::Hphi_u: return {std::abs(k.phi_u), b.C_phi * r.inv_sqrt_uv1};
        case Condition::Hphi_v: return {std::abs(k.phi_v), b.C_phi * r.inv_v1 + b.C_phi};
        case Condition::Hphi_w: return {std::abs(k.phi_w), b.C_phi * r.inv_sqrt_v1 + b.C_phi};
        case Condition::Hphi_h: return {std::abs(k.phi_h), b.C_phi * r.inv_sqrt_v1 + b.C_phi};
        case Condition::HPhi_nonneg: return {-k.Phi, 0.0};
        case Condition::HPhi_upper: return {k.Phi, b.C_Phi};
        case Condition::HPhi_slope: return {p.w * k.dPhi * k.dPhi, b.C_Phi * k.Phi};
        case Condition::Hpsi_upper: return {k.psi, b.Cpsi};
        case Condition::Hpsi_u: return {std::abs(k.psi_u), b.Cpsi * r.inv_sqrt_uw1};
        case Condition::Hpsi_v: return {std::abs(k.psi_v), b.Cpsi};
        case Condition::Hpsi_w: return {std::abs(k.psi_w), b.Cpsi * r.inv_w1};
        case Condition::Hpsi_h: return {std::abs(k.psi_h), b.Cpsi * r.inv_w1_gamma};
        case Condition::non_finite: break;
    }
    return {0.0, 0.0};
}

/// Both sides of one condition at one point, from precomputed values.
inline Sides condition_sides(Condition c, const KineticsValues& k, const Point& p, const HypothesisBudget& b) {
    return condition_sides(c, k, p, b, RhsFactors::at(p, b.gamma_psi));
}

struct Witness {
    Point point;
    double lhs = 0.0;
    double rhs = 0.0;
    std::int64_t sample = 0;  ///< linear sample index, used for deterministic tie-breaks
};

struct ConditionResult {
    Condition condition{};
    bool passed = true;
    std::int64_t evaluated = 0;
    std::int64_t violations = 0;
    /// Smallest rhs - lhs seen; for a pass this is the tightest margin.
    double margin = INFINITY;
    /// Worst violation (largest lhs - rhs). Set only on failure.
    std::optional<Witness> witness;

    void record(const Sides& s, const Point& p, std::int64_t sample) {
        ++evaluated;
        const double m = s.rhs - s.lhs;
        if (std::isfinite(m)) margin = std::min(margin, m);
        if (violates(s)) [[unlikely]] record_violation(s, p, sample);
    }

    void merge(const ConditionResult& o) {
        passed = passed && o.passed;
        evaluated += o.evaluated;
        violations += o.violations;
        margin = std::min(margin, o.margin);
        if (o.witness) {
            if (!witness || excess(*o.witness) > excess(*witness) ||
                (excess(*o.witness) == excess(*witness) && o.witness->sample < witness->sample)) {
                witness = o.witness;
            }
        }
    }

private:
    [[gnu::noinline]] void record_violation(const Sides& s, const Point& p, std::int64_t sample) {
        ++violations;
        passed = false;
        if (!witness || excess(s) > excess(*witness) ||
            (excess(s) == excess(*witness) && sample < witness->sample)) {
            witness = Witness{p, s.lhs, s.rhs, sample};
        }
    }

    static double excess(const Sides& s) {
        const double e = s.lhs - s.rhs;
        return std::isnan(e) ? INFINITY : e;
    }
    static double excess(const Witness& w) { return excess(Sides{w.lhs, w.rhs}); }
};

struct HypothesisReport {
    std::string model;
    std::array<ConditionResult, kConditionCount> conditions{};

    HypothesisReport() {
        for (int i = 0; i < kConditionCount; ++i) conditions[i].condition = static_cast<Condition>(i);
    }

    const ConditionResult& operator[](Condition c) const { return conditions[static_cast<int>(c)]; }
    ConditionResult& operator[](Condition c) { return conditions[static_cast<int>(c)]; }

    bool all_passed() const {
        for (const auto& c : conditions) {
            if (!c.passed) return false;
        }
        return true;
    }

    /// Pass status of a whole hypothesis group, e.g. "Hg".
    bool group_passed(std::string_view group) const {
        for (const auto& c : conditions) {
            if (condition_group(c.condition) == group && !c.passed) return false;
        }
        return true;
    }

    void merge(const HypothesisReport& o) {
        for (int i = 0; i < kConditionCount; ++i) conditions[i].merge(o.conditions[i]);
    }
};

namespace detail {

inline double axis_value(double upper, int n, int i) {
    return i == n - 1 ? upper : upper * static_cast<double>(i) / static_cast<double>(n - 1);
}

inline bool all_finite(const KineticsValues& k) {
    const double xs[] = {k.f,     k.g,     k.phi,   k.Phi,   k.psi,   k.phi_u, k.phi_v,
                         k.phi_w, k.phi_h, k.psi_u, k.psi_v, k.psi_w, k.psi_h, k.dPhi};
    for (double x : xs) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline constexpr Condition kPointConditions[] = {
    Condition::Hf_lower, Condition::Hf_upper, Condition::Hg_bound, Condition::Hphi_upper,
    Condition::Hphi_u,   Condition::Hphi_v,   Condition::Hphi_w,   Condition::Hphi_h,
    Condition::Hpsi_upper, Condition::Hpsi_u, Condition::Hpsi_v,   Condition::Hpsi_w,
    Condition::Hpsi_h,
};

/// Full 4-D conditions over u-indices [i_begin, i_end).
template <Kinetics K>
void check_slab(const K& kin, const HypothesisBudget& budget, const SampleBox& box, int i_begin,
                int i_end, HypothesisReport& out) {
    const int n = box.samples;
    HypothesisReport report;
    std::vector<double> us(n), vs(n), ws(n), hs(n);
    for (int i = 0; i < n; ++i) {
        us[i] = axis_value(box.U, n, i);
        vs[i] = axis_value(box.V, n, i);
        ws[i] = axis_value(box.W, n, i);
        hs[i] = axis_value(box.H, n, i);
    }
    std::vector<double> inv_v1(n), inv_sqrt_v1(n), inv_w1(n), inv_w1_gamma(n), inv_sqrt_uw1(n);
    for (int j = 0; j < n; ++j) {
        inv_v1[j] = 1.0 / (vs[j] + 1.0);
        inv_sqrt_v1[j] = 1.0 / std::sqrt(vs[j] + 1.0);
        inv_w1[j] = 1.0 / (ws[j] + 1.0);
        inv_w1_gamma[j] = std::pow(ws[j] + 1.0, -budget.gamma_psi);
    }
    for (int i = i_begin; i < i_end; ++i) {
        for (int k = 0; k < n; ++k) inv_sqrt_uw1[k] = 1.0 / std::sqrt(us[i] * ws[k] + 1.0);
        for (int j = 0; j < n; ++j) {
            RhsFactors r;
            r.inv_sqrt_uv1 = 1.0 / std::sqrt(us[i] * vs[j] + 1.0);
            r.inv_v1 = inv_v1[j];
            r.inv_sqrt_v1 = inv_sqrt_v1[j];
            for (int k = 0; k < n; ++k) {
                r.inv_sqrt_uw1 = inv_sqrt_uw1[k];
                r.inv_w1 = inv_w1[k];
                r.inv_w1_gamma = inv_w1_gamma[k];
                for (int l = 0; l < n; ++l) {
                    const Point p{us[i], vs[j], ws[k], hs[l]};
                    const std::int64_t sample = ((std::int64_t(i) * n + j) * n + k) * n + l;
                    const KineticsValues vals = evaluate(kin, p);
                    if (!all_finite(vals)) {
                        report[Condition::non_finite].record({INFINITY, 0.0}, p, sample);
                        continue;
                    }
                    report[Condition::non_finite].record({0.0, 0.0}, p, sample);
                    [&]<std::size_t... I>(std::index_sequence<I...>) {
                        ((report[kPointConditions[I]].record(
                             condition_sides(kPointConditions[I], vals, p, budget, r), p, sample)),
                         ...);
                    }(std::make_index_sequence<std::size(kPointConditions)>{});
                }
            }
        }
    }
    out.merge(report);
}

}  // namespace detail

/// Evaluate every growth condition on the sampled box. The u-axis is split
/// across `workers` threads (0 selects hardware concurrency); the result
/// does not depend on the split.
template <Kinetics K>
HypothesisReport check_hypotheses(const K& kin, const HypothesisBudget& budget,
                                  const SampleBox& box, unsigned workers = 0) {
    budget.validate();
    box.validate();
    const int n = box.samples;

    HypothesisReport report;
    report.model = kin.name();

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
    std::vector<HypothesisReport> partial(workers);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) {
        const int b = static_cast<int>(std::int64_t(n) * t / workers);
        const int e = static_cast<int>(std::int64_t(n) * (t + 1) / workers);
        pool.emplace_back([&, t, b, e] { detail::check_slab(kin, budget, box, b, e, partial[t]); });
    }
    detail::check_slab(kin, budget, box, 0, static_cast<int>(n / workers), partial[0]);
    for (auto& th : pool) th.join();
    for (const auto& p : partial) report.merge(p);

    // g(0, v, w, 0) >= 0 on the (v, w) plane.
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const Point p{0.0, detail::axis_value(box.V, n, j), detail::axis_value(box.W, n, k), 0.0};
            const double g = kin.g(p);
            const std::int64_t sample = std::int64_t(j) * n + k;
            if (!std::isfinite(g)) {
                report[Condition::non_finite].record({INFINITY, 0.0}, p, sample);
                continue;
            }
            report[Condition::Hg_sign].record({-g, 0.0}, p, sample);
        }
    }

    // Phi depends on w alone.
    for (int k = 0; k < n; ++k) {
        const double w = detail::axis_value(box.W, n, k);
        const Point p{0.0, 0.0, w, 0.0};
        KineticsValues vals{};
        vals.Phi = kin.Phi(w);
        vals.dPhi = kin.dPhi(w);
        if (!std::isfinite(vals.Phi) || !std::isfinite(vals.dPhi)) {
            report[Condition::non_finite].record({INFINITY, 0.0}, p, k);
            continue;
        }
        for (Condition c : {Condition::HPhi_nonneg, Condition::HPhi_upper, Condition::HPhi_slope}) {
            report[c].record(condition_sides(c, vals, p, budget), p, k);
        }
    }
    return report;
}

inline HypothesisReport check_hypotheses(const AnyKinetics& kin, const HypothesisBudget& budget,
                                         const SampleBox& box, unsigned workers = 0) {
    return std::visit([&](const auto& k) { return check_hypotheses(k, budget, box, workers); }, kin);
}

}  // namespace taxislab
