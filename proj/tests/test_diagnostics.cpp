#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "taxislab/diagnostics.hpp"

using namespace taxislab;
using std::numbers::e;

namespace {

State constant_state(const Grid& g, double u, double v, double w, double h) {
    State s;
    s.grid = g;
    s.u = Field(g, u);
    s.v = Field(g, v);
    s.w = Field(g, w);
    s.h = Field(g, h);
    return s;
}

/// The 64^2 initial state with the tumor scenario weights.
struct Scenario {
    InitialData init;
    QuasiEnergyConfig qc;
    Scenario() {
        qc.a = 1.0;
        qc.xi = 0.5;
        qc.alpha = 10.6;
        qc.b = default_energy_weight_b(1e-10, 1.0, 0.5, 1.0, 10.6);
    }
};

/// Midpoint quadrature of the smooth part of F on an n^2 grid, using the
/// closed-form gradients of the Gaussian profiles.
double smooth_energy_oracle(const Scenario& sc, int n) {
    const InitialData& in = sc.init;
    const double dx = 1.0 / n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) * dx, y = (j + 0.5) * dx;
            const double ru2 = (x - in.center_u[0]) * (x - in.center_u[0]) + (y - in.center_u[1]) * (y - in.center_u[1]);
            const double rh2 = (x - in.center_h[0]) * (x - in.center_h[0]) + (y - in.center_h[1]) * (y - in.center_h[1]);
            const double rw = std::hypot(x - in.center_w[0], y - in.center_w[1]);
            const double u = std::exp(-ru2 / (2 * in.eps_u));
            const double h = std::exp(-rh2 / (2 * in.eps_h));
            const double w = std::exp(-(rw - in.r0) * (rw - in.r0) / (2 * in.eps_w));
            const double grad_h_sq = h * h * rh2 / (in.eps_h * in.eps_h);
            const double grad_w_sq_over_w = w * (rw - in.r0) * (rw - in.r0) / (in.eps_w * in.eps_w);
            s += u * std::log(u) + sc.qc.a * grad_h_sq + sc.qc.b * grad_w_sq_over_w + w * w;
        }
    }
    return s * dx * dx;
}

double smooth_energy(const EnergyTerms& t, const QuasiEnergyConfig& qc) {
    return t.entropy_u + qc.a * t.dirichlet_h + qc.b * t.fisher_w + t.l2sq_w;
}

std::vector<EnergySample> sampled(double t0, double t1, double step, double (*F)(double), double (*D)(double)) {
    std::vector<EnergySample> s;
    const int n = static_cast<int>(std::lround((t1 - t0) / step));
    for (int k = 0; k <= n; ++k) {
        const double t = t0 + k * step;
        s.push_back({t, F(t), D(t)});
    }
    return s;
}

Field rotate90(const Field& f) {
    const Grid& g = f.grid;
    Field r(Grid(g.ny, g.nx, g.Ly, g.Lx));
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) r(j, g.nx - 1 - i) = f(i, j);
    }
    return r;
}

}  // namespace

TEST(Entropy, Examples) {
    const Grid g(16, 16);
    EXPECT_NEAR(entropy(Field(g, 1.0)), 0.0, 1e-15);
    EXPECT_NEAR(entropy(Field(g, e)), e, 1e-13);
    const Field half = Field::sample(g, [](double x, double) { return x < 0.5 ? 2.0 : 0.0; });
    EXPECT_NEAR(entropy(half), std::log(2.0), 1e-13);
}

TEST(Entropy, BoundedBelow) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const Grid g(20, 10, 2.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Field u(g);
        for (auto& x : u.data) x = d(rng);
        EXPECT_GE(entropy(u), -2.0 / e);
    }
    EXPECT_NEAR(entropy(Field(g, 1.0 / e)), -2.0 / e, 1e-14);
}

TEST(WeightedDirichlet, Examples) {
    const Grid g(32, 32);
    EXPECT_EQ(weighted_dirichlet(Field(g, 3.0), nullptr, 1e-12), 0.0);
    const Field x = Field::sample(g, [](double x, double) { return x; });
    EXPECT_NEAR(weighted_dirichlet(x, nullptr, 1e-12), 1.0, 1e-12);
    const Field two(g, 2.0);
    EXPECT_NEAR(weighted_dirichlet(x, &two, 1e-12), 0.5, 1e-12);
    EXPECT_NEAR(dirichlet(Field::sample(g, [](double, double y) { return 3 * y; })), 9.0, 1e-12);
}

TEST(WeightedDirichlet, FloorGuardsDivision) {
    const Grid g(8, 8);
    const Field x = Field::sample(g, [](double x, double) { return x; });
    const Field zero(g, 0.0);
    EXPECT_NEAR(weighted_dirichlet(x, &zero, 0.5), 2.0, 1e-12);
}

TEST(QuasiEnergy, ConstantState) {
    const Grid g(16, 16, 2.0, 1.0);
    const EnergyTerms t = quasi_energy(constant_state(g, 1.0, 0.7, 0.3, 2.0), QuasiEnergyConfig{});
    EXPECT_NEAR(t.F, 0.09 * 2.0, 1e-14);
    EXPECT_EQ(t.D, 0.0);
}

TEST(QuasiEnergy, VanishingProducersContributeNothing) {
    const Grid g(16, 16);
    State s = init_scenario(InitialData{}, g, false);
    const EnergyTerms t = quasi_energy(s, QuasiEnergyConfig{});
    EXPECT_EQ(t.fisher_w, 0.0);
    EXPECT_EQ(t.l2sq_w, 0.0);
    EXPECT_TRUE(std::isfinite(t.F));
    EXPECT_TRUE(std::isfinite(t.D));
}

TEST(QuasiEnergy, InitialStateMatchesTenfoldRefinement) {
    // Full F at 64^2 against the same discrete definition at 640^2.
    const Scenario sc;
    const double coarse = quasi_energy(init_scenario(sc.init, Grid(64, 64)), sc.qc).F;
    const double fine = quasi_energy(init_scenario(sc.init, Grid(640, 640)), sc.qc).F;
    EXPECT_NEAR(coarse / fine, 1.0, 0.02) << "F(64^2) = " << coarse << ", F(640^2) = " << fine;
}

TEST(QuasiEnergy, SmoothTermsMatchAnalyticQuadrature) {
    const Scenario sc;
    const EnergyTerms t = quasi_energy(init_scenario(sc.init, Grid(64, 64)), sc.qc);
    const double oracle = smooth_energy_oracle(sc, 640);
    EXPECT_NEAR(smooth_energy(t, sc.qc) / oracle, 1.0, 0.02);
}

TEST(QuasiEnergy, TissueTermOnStripeEdges) {
    // Eight vertical jumps of 0.8 spanning the domain height, weight (1 + 0.2) / 2.
    for (int n : {32, 64, 128}) {
        const Scenario sc;
        const Grid g(n, n);
        const EnergyTerms t = quasi_energy(init_scenario(sc.init, g), sc.qc);
        EXPECT_NEAR(t.fisher_v, 8 * 0.8 * 0.8 / 0.6 / g.dx(), 1e-9 * t.fisher_v) << n;
    }
}

TEST(QuasiEnergy, RotationInvariant) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> d(0.1, 2.0);
    const Grid g(12, 12);
    State s = constant_state(g, 0, 0, 0, 0);
    for (Field* f : {&s.u, &s.v, &s.w, &s.h}) {
        for (auto& x : f->data) x = d(rng);
    }
    State r;
    r.grid = g;
    r.u = rotate90(s.u);
    r.v = rotate90(s.v);
    r.w = rotate90(s.w);
    r.h = rotate90(s.h);
    QuasiEnergyConfig qc;
    qc.xi = 0.5;
    const EnergyTerms a = quasi_energy(s, qc);
    const EnergyTerms b = quasi_energy(r, qc);
    EXPECT_NEAR(a.F, b.F, 1e-12 * std::abs(a.F));
    EXPECT_NEAR(a.D, b.D, 1e-12 * std::abs(a.D));
}

TEST(FitEnergyConstant, ExponentialEnergy) {
    const auto s = sampled(0.0, 1.0, 0.01, [](double t) { return std::exp(t); }, [](double) { return 0.0; });
    const EnergyFit fit = fit_energy_constant(s);
    ASSERT_TRUE(fit.feasible);
    EXPECT_LE(fit.C, 1.01);
}

TEST(FitEnergyConstant, LinearDissipation) {
    // The last interior sample is t = 99.99, so C_min = sqrt(49.995).
    const auto s = sampled(0.0, 100.0, 0.01, [](double) { return 1.0; }, [](double t) { return t; });
    const EnergyFit fit = fit_energy_constant(s);
    ASSERT_TRUE(fit.feasible);
    EXPECT_NEAR(fit.C, std::sqrt(50.0), 0.01);
}

TEST(FitEnergyConstant, UnitDissipation) {
    const auto s = sampled(0.0, 1.0, 0.1, [](double) { return 0.0; }, [](double) { return 1.0; });
    const EnergyFit fit = fit_energy_constant(s);
    ASSERT_TRUE(fit.feasible);
    EXPECT_NEAR(fit.C, 1.0, 1e-3);
}

TEST(FitEnergyConstant, InfeasibleBeyondCap) {
    const auto s = sampled(0.0, 1.0, 0.1, [](double) { return 0.0; }, [](double) { return 1e13; });
    EXPECT_FALSE(fit_energy_constant(s).feasible);
}

TEST(FitEnergyConstant, InputErrors) {
    EXPECT_THROW(fit_energy_constant({{0, 1, 0}, {1, 1, 0}}), std::invalid_argument);
    EXPECT_THROW(fit_energy_constant({{0, 1, 0}, {1, 1, 0}, {1, 1, 0}}), std::invalid_argument);
    EXPECT_THROW(fit_energy_constant({{0, 1, 0}, {2, 1, 0}, {1, 1, 0}}), std::invalid_argument);
}

TEST(FitEnergyConstant, AppendingSamplesNeverLowersC) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<EnergySample> s;
        double t = 0.0;
        for (int k = 0; k < 40; ++k) {
            t += 0.01 + 0.1 * d(rng);
            s.push_back({t, d(rng), d(rng)});
        }
        double previous = 0.0;
        for (std::size_t n = 3; n <= s.size(); ++n) {
            const EnergyFit fit = fit_energy_constant({s.begin(), s.begin() + static_cast<long>(n)});
            ASSERT_TRUE(fit.feasible);
            EXPECT_GE(fit.C, previous);
            previous = fit.C;
        }
    }
}

TEST(VBoundCheck, NonIncreasingTissuePasses) {
    std::vector<double> t, v;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(0.01 * k);
        v.push_back(1.0 - 0.005 * k);
    }
    for (double C_phi : {1e-3, 1.0, 10.6}) EXPECT_TRUE(v_bound_check(t, v, 1.0, C_phi, 0.0, 0.0).passed);
}

TEST(VBoundCheck, FastGrowthFailsAtAnalyticCrossing) {
    // v = 2 e^{2t} against 1.05 (1 + 1) e^{t}: first crossing after t = ln 1.05 = 0.0488.
    std::vector<double> t, v;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(0.01 * k);
        v.push_back(2.0 * std::exp(2.0 * t.back()));
    }
    const BoundCheck r = v_bound_check(t, v, 1.0, 1.0, 1.0, 0.05);
    EXPECT_FALSE(r.passed);
    ASSERT_TRUE(r.first_violation_time);
    EXPECT_DOUBLE_EQ(*r.first_violation_time, 0.05);
}

TEST(VBoundCheck, Errors) {
    EXPECT_THROW(v_bound_check({0.0}, {1.0}, 1.0, 0.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(v_bound_check({0.0, 1.0}, {1.0}, 1.0, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(ZTransform, Examples) {
    const Grid g(8, 8);
    State s = init_scenario(InitialData{}, g);
    const auto same = z_transform(s, 0.0);
    ASSERT_TRUE(same);
    EXPECT_EQ(same->data, s.u.data);

    const auto z = z_transform(constant_state(g, 1.0, 1.0, 0.0, 0.0), 1.0);
    ASSERT_TRUE(z);
    for (double x : z->data) EXPECT_NEAR(x, 0.367879441171442, 1e-15);

    EXPECT_FALSE(z_transform(constant_state(g, 1.0, 1.0, 0.0, 0.0), 5e9));
}

TEST(TimeseriesCsv, HeaderMatchesRowWidth) {
    const DiagnosticsRow r = diagnose(init_scenario(InitialData{}, Grid(8, 8)), QuasiEnergyConfig{});
    std::ostringstream out;
    write_timeseries_row(out, r);
    const std::string header = kTimeseriesHeader;
    const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    EXPECT_EQ(commas(header), commas(out.str()));
    EXPECT_EQ(header.substr(0, 2), "t,");
    EXPECT_EQ(out.str().back(), '\n');
    std::istringstream in(out.str());
    double t = -1, mass_u = -1;
    char c = 0;
    in >> t >> c >> mass_u;
    EXPECT_EQ(t, 0.0);
    EXPECT_EQ(mass_u, r.mass_u);
}
