#pragma once
/// @file model.hpp
/// @brief Kinetics of the four-field taxis system
///
///   u_t = Du Lap u - chi div(u grad h) - xi div(u grad v) + f(u,v,w,h)
///   h_t = Dh Lap h + g(u,v,w,h)
///   v_t = -alpha u v + v phi(u,v,w,h) + Phi(w)
///   w_t = beta u + w psi(u,v,w,h)
///
/// A kinetics model supplies f, g, phi, Phi, psi, the first partials of
/// phi, psi and Phi, and the two linear coupling rates alpha and beta.
/// Built-in models are the CAF tumor model (indirect and direct signal
/// production) and the go-or-grow model. New models are added at compile
/// time by writing a type that satisfies the `Kinetics` concept.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <variant>

namespace taxislab {

/// Thrown for invalid parameters or scenario configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point of the state space, ordered (u, v, w, h).
struct Point {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct ModelParams {
    double chi = 0.0;   ///< chemotactic sensitivity
    double xi = 0.0;    ///< haptotactic sensitivity
    double alpha = 0.0; ///< uptake of v by u
    double beta = 0.0;  ///< activation of w by u
    double Du = 0.0;
    double Dh = 0.0;

    /// xi / Du, recomputed on every call.
    double lambda() const {
        if (Du <= 0.0) {
            throw ConfigError("lambda = xi/Du is undefined for Du <= 0");
        }
        return xi / Du;
    }

    /// Solver-level validation: finite and nonnegative. Zero taxis and
    /// zero diffusion are admitted so that reduced systems can be run.
    void validate() const {
        const auto check = [](double x, const char* name) {
            if (!std::isfinite(x) || x < 0.0) {
                throw ConfigError(std::string("model_params.") + name +
                                  " must be finite and >= 0");
            }
        };
        check(chi, "chi");
        check(xi, "xi");
        check(alpha, "alpha");
        check(beta, "beta");
        check(Du, "Du");
        check(Dh, "Dh");
    }

    /// True when every coefficient is strictly positive, as required for
    /// the global existence theory.
    bool strictly_positive() const {
        return chi > 0 && xi > 0 && alpha > 0 && beta > 0 && Du > 0 && Dh > 0;
    }
};

enum class CafVariant { indirect, direct };

struct CafParams {
    double mu = 0.0;      ///< tumor proliferation
    double eta = 0.0;     ///< tissue remodeling
    double alpha_h = 0.0; ///< signal production (from w, or from u when direct)
    double beta_v = 0.0;  ///< tissue build-up by producers
    double gamma_w = 0.0; ///< producer activation
    CafVariant variant = CafVariant::indirect;

    void validate() const {
        const auto check = [](double x, const char* name) {
            if (!std::isfinite(x) || x < 0.0) {
                throw ConfigError(std::string("caf.") + name + " must be finite and >= 0");
            }
        };
        check(mu, "mu");
        check(eta, "eta");
        check(alpha_h, "alpha_h");
        check(beta_v, "beta_v");
        check(gamma_w, "gamma_w");
        if (variant == CafVariant::direct && (beta_v != 0.0 || gamma_w != 0.0)) {
            throw ConfigError(
                "caf: the direct variant has no producer field; beta_v and gamma_w must be 0");
        }
    }
};

struct GoGrowParams {
    double k1 = 0, k2 = 0, k3 = 0, k4 = 0, k5 = 0, k6 = 0, k7 = 0, k8 = 0, k9 = 0;

    void validate() const {
        const double ks[] = {k1, k2, k3, k4, k5, k6, k7, k8, k9};
        for (int i = 0; i < 9; ++i) {
            if (!std::isfinite(ks[i]) || ks[i] < 0.0) {
                throw ConfigError("go_grow.k" + std::to_string(i + 1) + " must be finite and >= 0");
            }
        }
        if (k4 <= 0.0) throw ConfigError("go_grow.k4 must be > 0");
        if (k6 <= 0.0) throw ConfigError("go_grow.k6 must be > 0");
    }
};

/// Compile-time extension point for kinetics models.
template <class K>
concept Kinetics = requires(const K& k, const Point& p, double w) {
    { k.name() } -> std::convertible_to<std::string>;
    { k.alpha() } -> std::convertible_to<double>;
    { k.beta() } -> std::convertible_to<double>;
    { k.has_producer() } -> std::convertible_to<bool>;
    { k.f(p) } -> std::convertible_to<double>;
    { k.g(p) } -> std::convertible_to<double>;
    { k.phi(p) } -> std::convertible_to<double>;
    { k.psi(p) } -> std::convertible_to<double>;
    { k.Phi(w) } -> std::convertible_to<double>;
    { k.dPhi(w) } -> std::convertible_to<double>;
    { k.phi_u(p) } -> std::convertible_to<double>;
    { k.phi_v(p) } -> std::convertible_to<double>;
    { k.phi_w(p) } -> std::convertible_to<double>;
    { k.phi_h(p) } -> std::convertible_to<double>;
    { k.psi_u(p) } -> std::convertible_to<double>;
    { k.psi_v(p) } -> std::convertible_to<double>;
    { k.psi_w(p) } -> std::convertible_to<double>;
    { k.psi_h(p) } -> std::convertible_to<double>;
};

/// CAF tumor model. In the indirect variant the signal h is produced by
/// the non-motile producers w; in the direct variant h is produced by u and
/// w is identically zero.
class CafKinetics {
public:
    CafKinetics(const ModelParams& params, const CafParams& caf) : caf_(caf) {
        params.validate();
        caf.validate();
    }

    std::string name() const {
        return caf_.variant == CafVariant::direct ? "caf_direct" : "caf_indirect";
    }
    const CafParams& params() const { return caf_; }

    double alpha() const { return caf_.eta; }
    double beta() const { return direct() ? 0.0 : caf_.gamma_w; }
    bool has_producer() const { return !direct(); }

    double f(const Point& p) const { return caf_.mu * p.u * (1.0 - p.u - p.v - p.w); }
    double g(const Point& p) const { return -p.h + caf_.alpha_h * (direct() ? p.u : p.w); }

    // eta v (1 - u - v) - h v  ==  -eta u v + v (eta (1 - v) - h)
    double phi(const Point& p) const { return caf_.eta * (1.0 - p.v) - p.h; }
    double phi_u(const Point&) const { return 0.0; }
    double phi_v(const Point&) const { return -caf_.eta; }
    double phi_w(const Point&) const { return 0.0; }
    double phi_h(const Point&) const { return -1.0; }

    double Phi(double w) const { return caf_.beta_v * w / (1.0 + w); }
    double dPhi(double w) const { return caf_.beta_v / ((1.0 + w) * (1.0 + w)); }

    double psi(const Point&) const { return 0.0; }
    double psi_u(const Point&) const { return 0.0; }
    double psi_v(const Point&) const { return 0.0; }
    double psi_w(const Point&) const { return 0.0; }
    double psi_h(const Point&) const { return 0.0; }

private:
    bool direct() const { return caf_.variant == CafVariant::direct; }
    CafParams caf_;
};

/// Go-or-grow model with migrating (u) and proliferating (w) cells and
/// acidity h. Squared positive parts are max(x, 0)^2 with derivative
/// 2 max(x, 0).
class GoOrGrowKinetics {
public:
    GoOrGrowKinetics(const ModelParams& params, const GoGrowParams& gg) : k_(gg) {
        params.validate();
        gg.validate();
    }

    std::string name() const { return "go_or_grow"; }
    const GoGrowParams& params() const { return k_; }

    double alpha() const { return k_.k5; }
    double beta() const { return k_.k7; }
    bool has_producer() const { return true; }

    double f(const Point& p) const {
        const double hw = p.h * p.w;
        return -k_.k1 * p.u + k_.k2 * hw / (1.0 + hw);
    }
    double g(const Point& p) const { return k_.k3 * p.w - k_.k4 * p.h; }

    double phi(const Point& p) const {
        const double s = pos(1.0 - p.v);
        return -k_.k5 * (p.h + p.w) + k_.k6 * s * s;
    }
    double phi_u(const Point&) const { return 0.0; }
    double phi_v(const Point& p) const { return -2.0 * k_.k6 * pos(1.0 - p.v); }
    double phi_w(const Point&) const { return -k_.k5; }
    double phi_h(const Point&) const { return -k_.k5; }

    double Phi(double) const { return 0.0; }
    double dPhi(double) const { return 0.0; }

    double psi(const Point& p) const {
        const double s = crowding(p);
        return -k_.k8 * p.h + k_.k9 * s * s;
    }
    double psi_u(const Point& p) const { return -2.0 * k_.k9 * crowding(p); }
    double psi_v(const Point& p) const { return -2.0 * k_.k9 * crowding(p); }
    double psi_w(const Point& p) const { return -2.0 * k_.k9 * crowding(p); }
    double psi_h(const Point&) const { return -k_.k8; }

private:
    static double pos(double x) { return std::max(x, 0.0); }
    static double crowding(const Point& p) { return pos(1.0 - p.u - p.v - p.w); }
    GoGrowParams k_;
};

static_assert(Kinetics<CafKinetics>);
static_assert(Kinetics<GoOrGrowKinetics>);

inline CafKinetics make_caf(const ModelParams& params, const CafParams& caf) {
    return CafKinetics(params, caf);
}

inline GoOrGrowKinetics make_go_or_grow(const ModelParams& params, const GoGrowParams& gg) {
    return GoOrGrowKinetics(params, gg);
}

/// Runtime selection among the built-in models.
using AnyKinetics = std::variant<CafKinetics, GoOrGrowKinetics>;

/// All kinetics quantities at one point.
struct KineticsValues {
    double f, g, phi, Phi, psi;
    double phi_u, phi_v, phi_w, phi_h;
    double psi_u, psi_v, psi_w, psi_h;
    double dPhi;
};

template <Kinetics K>
KineticsValues evaluate(const K& k, const Point& p) {
    return {k.f(p),     k.g(p),     k.phi(p),   k.Phi(p.w), k.psi(p),
            k.phi_u(p), k.phi_v(p), k.phi_w(p), k.phi_h(p), k.psi_u(p),
            k.psi_v(p), k.psi_w(p), k.psi_h(p), k.dPhi(p.w)};
}

struct Partials {
    double phi_u, phi_v, phi_w, phi_h;
    double psi_u, psi_v, psi_w, psi_h;
    double dPhi;
};

template <Kinetics K>
Partials analytic_partials(const K& k, const Point& p) {
    return {k.phi_u(p), k.phi_v(p), k.phi_w(p), k.phi_h(p), k.psi_u(p),
            k.psi_v(p), k.psi_w(p), k.psi_h(p), k.dPhi(p.w)};
}

/// Central differences of phi, psi and Phi. Requires every coordinate of
/// `p` to be at least `step` so that the stencil stays in [0, inf)^4.
template <Kinetics K>
Partials finite_diff_partials(const K& k, const Point& p, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_partials: step must be > 0");
    if (p.u < step || p.v < step || p.w < step || p.h < step) {
        throw std::invalid_argument("finite_diff_partials: point must be >= step componentwise");
    }
    const double inv = 1.0 / (2.0 * step);
    const auto shifted = [&](double Point::*member, double delta) {
        Point q = p;
        q.*member += delta;
        return q;
    };
    const auto d = [&](auto&& fn, double Point::*member) {
        return (fn(shifted(member, step)) - fn(shifted(member, -step))) * inv;
    };
    const auto phi = [&](const Point& q) { return k.phi(q); };
    const auto psi = [&](const Point& q) { return k.psi(q); };

    Partials out{};
    out.phi_u = d(phi, &Point::u);
    out.phi_v = d(phi, &Point::v);
    out.phi_w = d(phi, &Point::w);
    out.phi_h = d(phi, &Point::h);
    out.psi_u = d(psi, &Point::u);
    out.psi_v = d(psi, &Point::v);
    out.psi_w = d(psi, &Point::w);
    out.psi_h = d(psi, &Point::h);
    out.dPhi = (k.Phi(p.w + step) - k.Phi(p.w - step)) * inv;
    return out;
}

}  // namespace taxislab
