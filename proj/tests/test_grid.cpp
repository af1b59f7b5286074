#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "taxislab/grid.hpp"

using namespace taxislab;
using std::numbers::pi;

namespace {

double laplacian_error(int n) {
    const Grid g(n, n);
    const Field f = Field::sample(g, [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); });
    const Field lap = laplacian_neumann(f);
    double err = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(lap[k] + 2 * pi * pi * f[k]));
    return err;
}

Field random_field(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Field f(g);
    for (auto& x : f.data) x = d(rng);
    return f;
}

}  // namespace

TEST(Laplacian, ConstantIsAnnihilated) {
    const Grid g(17, 9, 2.0, 1.0);
    const Field lap = laplacian_neumann(Field(g, 3.7));
    EXPECT_LE(max_norm(lap), 1e-12);
}

TEST(Laplacian, SecondOrderOnNeumannMode) {
    const double e64 = laplacian_error(64);
    const double e128 = laplacian_error(128);
    EXPECT_NEAR(e64 / e128, 4.0, 0.5);
}

TEST(Laplacian, ConservativeSymmetricNonPositive) {
    const Grid g(13, 11, 1.0, 0.7);
    const Field a = random_field(g, 1);
    const Field b = random_field(g, 2);
    const Field la = laplacian_neumann(a);
    const Field lb = laplacian_neumann(b);
    EXPECT_NEAR(integrate(la), 0.0, 1e-10);
    EXPECT_NEAR(inner(la, b), inner(a, lb), 1e-9 * std::abs(inner(la, b)) + 1e-9);
    EXPECT_LE(inner(la, a), 0.0);
}

TEST(FaceGradients, ConstantHasZeroGradient) {
    const FaceGradients fg = face_gradients(Field(Grid(8, 5), 2.0));
    for (double x : fg.x) EXPECT_EQ(x, 0.0);
    for (double y : fg.y) EXPECT_EQ(y, 0.0);
}

TEST(FaceGradients, LinearProfileExactOnInteriorFaces) {
    const Grid g(10, 6);
    const FaceGradients fg = face_gradients(Field::sample(g, [](double x, double) { return x; }));
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const double expected = (i == 0 || i == g.nx) ? 0.0 : 1.0;
            EXPECT_NEAR(fg.xface(i, j), expected, 1e-12);
        }
    }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) EXPECT_NEAR(fg.yface(i, j), 0.0, 1e-12);
    }
}

TEST(FaceGradients, QuadraticOnCoarseGrid) {
    const Grid g(4, 4);
    const FaceGradients fg = face_gradients(Field::sample(g, [](double x, double) { return x * x; }));
    EXPECT_NEAR(fg.xface(1, 0), 0.5, 1e-12);
    EXPECT_NEAR(fg.xface(2, 2), 1.0, 1e-12);
}

TEST(Integrate, ConstantsAndUnits) {
    EXPECT_NEAR(integrate(Field(Grid(7, 3), 1.0)), 1.0, 1e-14);
    EXPECT_NEAR(integrate(Field(Grid(8, 8, 2.0, 1.0), 1.0)), 2.0, 1e-14);
}

TEST(Integrate, GaussianMatchesErfOracle) {
    const double eps = 0.05;
    const Grid g(256, 256);
    const Field f = Field::sample(g, [&](double x, double y) {
        return std::exp(-((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)) / (2 * eps));
    });
    const double one_d = std::sqrt(2 * eps * pi) * std::erf(0.5 / std::sqrt(2 * eps));
    EXPECT_NEAR(integrate(f), one_d * one_d, 1e-4);
}

TEST(InitScenario, TumorPeaksAtCenterCell) {
    const State s = init_scenario(InitialData{}, Grid(65, 65));
    EXPECT_DOUBLE_EQ(s.u(32, 32), 1.0);
    EXPECT_DOUBLE_EQ(max_norm(s.u), 1.0);
    EXPECT_DOUBLE_EQ(s.h(32, 32), 1.0);
}

TEST(InitScenario, ProducerRingAtRadius) {
    InitialData init;
    init.r0 = 0.26;
    init.center_w = {0.65, 0.65};
    // dx = 0.02: cell 45 is centered at 0.91, cell 32 at 0.65.
    const State s = init_scenario(init, Grid(65, 65, 1.3, 1.3));
    EXPECT_NEAR(s.w(45, 32), 1.0, 1e-12);
    EXPECT_NEAR(s.w(32, 45), 1.0, 1e-12);
    EXPECT_NEAR(s.w(32, 32), std::exp(-0.26 * 0.26 / 0.02), 1e-12);
}

TEST(InitScenario, StripesSetTissueLevels) {
    InitialData init;
    init.stripes = {4, 0.1, StripeOrientation::vertical};
    const Grid g(40, 8);
    const State s = init_scenario(init, g);
    // Stripe centers sit at 0.125, 0.375, 0.625, 0.875.
    const auto at = [&](double x) { return s.v(static_cast<int>(x * g.nx), 3); };
    EXPECT_EQ(at(0.125), 1.0);
    EXPECT_EQ(at(0.63), 1.0);
    EXPECT_EQ(at(0.25), 0.2);
    EXPECT_EQ(at(0.0), 0.2);

    init.stripes.orientation = StripeOrientation::horizontal;
    const State h = init_scenario(init, Grid(8, 40));
    EXPECT_EQ(h.v(3, 5), 1.0);
    EXPECT_EQ(h.v(3, 10), 0.2);
}

TEST(InitScenario, StateInvariants) {
    const State s = init_scenario(InitialData{}, Grid(32, 32));
    EXPECT_GT(min_value(s.u), 0.0);
    EXPECT_LE(max_norm(s.u), 1.0);
    EXPECT_GT(min_value(s.h), 0.0);
    EXPECT_GT(min_value(s.w), 0.0);
    EXPECT_GE(min_value(s.v), 0.2);
    EXPECT_LE(max_norm(s.v), 1.0);
    EXPECT_EQ(s.t, 0.0);
    const State d = init_scenario(InitialData{}, Grid(32, 32), false);
    EXPECT_EQ(max_norm(d.w), 0.0);
}

TEST(InitScenario, DegenerateStripesWarn) {
    InitialData init;
    init.stripes = {0, 0.1, StripeOrientation::vertical};
    std::vector<std::string> warnings;
    const State empty = init_scenario(init, Grid(16, 16), true, &warnings);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("empty"), std::string::npos);
    EXPECT_EQ(max_norm(empty.v), 0.2);

    warnings.clear();
    init.stripes = {1, 2.0, StripeOrientation::vertical};
    const State full = init_scenario(init, Grid(16, 16), true, &warnings);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("whole domain"), std::string::npos);
    EXPECT_EQ(min_value(full.v), 1.0);
}

TEST(InitScenario, RejectsBadInput) {
    InitialData init;
    init.eps_u = 0.0;
    EXPECT_THROW(init_scenario(init, Grid(8, 8)), ConfigError);
    init = {};
    init.v_min = 2.0;
    EXPECT_THROW(init_scenario(init, Grid(8, 8)), ConfigError);
    EXPECT_THROW(init_scenario(InitialData{}, Grid(0, 8)), ConfigError);
}

TEST(FieldCsv, HeaderAndRowMajorOrder) {
    const Grid g(3, 2);
    Field f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = 0.1 * static_cast<double>(k);
    const auto path = std::filesystem::temp_directory_path() / "taxislab_field_csv_test.csv";
    write_field_csv(f, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,value");
    int rows = 0;
    double x = 0, y = 0, value = 0;
    char c1 = 0, c2 = 0;
    while (in >> x >> c1 >> y >> c2 >> value) {
        const int i = static_cast<int>(x / g.dx());
        const int j = static_cast<int>(y / g.dy());
        EXPECT_EQ(value, f(i, j));  // 17 significant digits round-trip exactly
        EXPECT_EQ(rows, i + j * g.nx);
        ++rows;
    }
    EXPECT_EQ(rows, 6);
    std::filesystem::remove(path);
}
