#pragma once
/// @file grid.hpp
/// @brief Uniform cell-centered grid on [0, Lx] x [0, Ly], cell fields,
/// Neumann operators and initial data.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxislab/model.hpp"

namespace taxislab {

struct Grid {
    int nx = 64;
    int ny = 64;
    double Lx = 1.0;
    double Ly = 1.0;

    Grid() = default;
    Grid(int nx_, int ny_, double Lx_ = 1.0, double Ly_ = 1.0) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
        validate();
    }

    /// Structural validity. Scenario configs additionally require nx, ny >= 4;
    /// single-row grids are allowed here for 1-D checks.
    void validate() const {
        if (nx < 1 || ny < 1) throw ConfigError("grid: nx and ny must be >= 1");
        if (!(Lx > 0 && Ly > 0) || !std::isfinite(Lx) || !std::isfinite(Ly)) {
            throw ConfigError("grid: Lx and Ly must be finite and > 0");
        }
    }

    double dx() const { return Lx / nx; }
    double dy() const { return Ly / ny; }
    double cell_area() const { return dx() * dy(); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx; }
    double xc(int i) const { return (i + 0.5) * dx(); }
    double yc(int j) const { return (j + 0.5) * dy(); }

    bool operator==(const Grid&) const = default;
};

/// One value per cell, row-major (i + j nx).
struct Field {
    Grid grid;
    std::vector<double> data;

    Field() = default;
    explicit Field(const Grid& g, double value = 0.0) : grid(g), data(g.size(), value) {}

    double& operator()(int i, int j) { return data[grid.index(i, j)]; }
    double operator()(int i, int j) const { return data[grid.index(i, j)]; }
    double& operator[](std::size_t k) { return data[k]; }
    double operator[](std::size_t k) const { return data[k]; }
    std::size_t size() const { return data.size(); }

    template <class Fn>
    static Field sample(const Grid& g, Fn&& fn) {
        Field f(g);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) f(i, j) = fn(g.xc(i), g.yc(j));
        }
        return f;
    }
};

inline double max_norm(const Field& f) {
    double m = 0.0;
    for (double x : f.data) m = std::max(m, std::abs(x));
    return m;
}

inline double min_value(const Field& f) {
    double m = INFINITY;
    for (double x : f.data) m = std::min(m, x);
    return m;
}

/// Midpoint quadrature over the domain.
inline double integrate(const Field& f) {
    double s = 0.0;
    for (double x : f.data) s += x;
    return s * f.grid.cell_area();
}

/// Cell inner product sum f g dx dy.
inline double inner(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * a.grid.cell_area();
}

struct State {
    Grid grid;
    Field u, h, v, w;
    double t = 0.0;
};

/// 5-point Laplacian with reflecting ghost cells (zero normal flux).
inline Field laplacian_neumann(const Field& f) {
    const Grid& g = f.grid;
    const double ix2 = 1.0 / (g.dx() * g.dx());
    const double iy2 = 1.0 / (g.dy() * g.dy());
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = f(i, j);
            double s = 0.0;
            if (i > 0) s += (f(i - 1, j) - c) * ix2;
            if (i + 1 < g.nx) s += (f(i + 1, j) - c) * ix2;
            if (j > 0) s += (f(i, j - 1) - c) * iy2;
            if (j + 1 < g.ny) s += (f(i, j + 1) - c) * iy2;
            out(i, j) = s;
        }
    }
    return out;
}

/// Normal derivatives on all faces. `x` holds vertical faces, index
/// i + j (nx + 1) for i = 0..nx (face i sits left of cell i); `y` holds
/// horizontal faces, index i + j nx for j = 0..ny. Boundary faces are 0.
struct FaceGradients {
    Grid grid;
    std::vector<double> x;
    std::vector<double> y;

    double xface(int i, int j) const { return x[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * (grid.nx + 1)]; }
    double yface(int i, int j) const { return y[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * grid.nx]; }
};

inline FaceGradients face_gradients(const Field& f) {
    const Grid& g = f.grid;
    FaceGradients out{g, std::vector<double>(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0),
                      std::vector<double>(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0)};
    const double idx = 1.0 / g.dx();
    const double idy = 1.0 / g.dy();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            out.x[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * (g.nx + 1)] =
                (f(i, j) - f(i - 1, j)) * idx;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out.y[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * g.nx] =
                (f(i, j) - f(i, j - 1)) * idy;
        }
    }
    return out;
}

enum class StripeOrientation { vertical, horizontal };

struct Stripes {
    int count = 4;
    double width = 0.1;
    StripeOrientation orientation = StripeOrientation::vertical;
};

struct InitialData {
    double eps_u = 0.05;
    double eps_h = 0.1;
    double eps_w = 0.01;
    double r0 = 0.5;
    double v_max = 1.0;
    double v_min = 0.2;
    std::array<double, 2> center_u{0.5, 0.5};
    std::array<double, 2> center_h{0.5, 0.5};
    std::array<double, 2> center_w{0.5, 0.5};
    Stripes stripes;

    void validate() const {
        if (!(eps_u > 0 && eps_h > 0 && eps_w > 0)) throw ConfigError("initial: widths must be > 0");
        if (!(r0 >= 0)) throw ConfigError("initial.r0 must be >= 0");
        if (!(v_min > 0)) throw ConfigError("initial.v_min must be > 0");
        if (!(v_max >= v_min)) throw ConfigError("initial: v_max must be >= v_min");
        if (stripes.count < 0) throw ConfigError("initial.stripes.count must be >= 0");
        if (!(stripes.width >= 0)) throw ConfigError("initial.stripes.width must be >= 0");
    }
};

/// True when the cell-center coordinate `s` (along the stripe normal, domain
/// length L) falls inside one of the evenly spaced stripes.
inline bool in_stripe(const Stripes& st, double s, double L) {
    for (int k = 0; k < st.count; ++k) {
        const double c = (k + 0.5) * L / st.count;
        if (s >= c - 0.5 * st.width && s < c + 0.5 * st.width) return true;
    }
    return false;
}

/// Gaussian tumor and signal, annular producers and striped tissue. With
/// `has_producer` false (direct signal production) w is identically zero.
/// Degenerate stripe sets are reported through `warnings`.
inline State init_scenario(const InitialData& init, const Grid& grid, bool has_producer = true,
                           std::vector<std::string>* warnings = nullptr) {
    init.validate();
    grid.validate();
    const auto sq = [](double a) { return a * a; };
    const auto dist2 = [&](double x, double y, const std::array<double, 2>& c) {
        return sq(x - c[0]) + sq(y - c[1]);
    };

    State s;
    s.grid = grid;
    s.u = Field::sample(grid, [&](double x, double y) {
        return std::exp(-dist2(x, y, init.center_u) / (2.0 * init.eps_u));
    });
    s.h = Field::sample(grid, [&](double x, double y) {
        return std::exp(-dist2(x, y, init.center_h) / (2.0 * init.eps_h));
    });
    if (has_producer) {
        s.w = Field::sample(grid, [&](double x, double y) {
            const double r = std::sqrt(dist2(x, y, init.center_w));
            return std::exp(-sq(r - init.r0) / (2.0 * init.eps_w));
        });
    } else {
        s.w = Field(grid, 0.0);
    }
    const bool vertical = init.stripes.orientation == StripeOrientation::vertical;
    int inside = 0;
    s.v = Field::sample(grid, [&](double x, double y) {
        const bool in = vertical ? in_stripe(init.stripes, x, grid.Lx) : in_stripe(init.stripes, y, grid.Ly);
        inside += in ? 1 : 0;
        return in ? init.v_max : init.v_min;
    });
    if (warnings) {
        if (inside == 0) warnings->push_back("initial.stripes: stripe set is empty on this grid");
        if (static_cast<std::size_t>(inside) == grid.size()) {
            warnings->push_back("initial.stripes: stripes cover the whole domain");
        }
    }
    s.t = 0.0;
    return s;
}

/// Write one field as "x,y,value" rows in row-major order, 17 significant digits.
inline void write_field_csv(const Field& f, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "x,y,value\n";
    char buf[128];
    const Grid& g = f.grid;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.xc(i), g.yc(j), f(i, j));
            out << buf;
        }
    }
}

}  // namespace taxislab
