#include "isolandau/field.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "isolandau/errors.hpp"
#include "isolandau/kernels.hpp"

namespace isolandau {

namespace {
std::atomic<unsigned long> g_grid_counter{0};
}

GridPtr build_uniform_grid(int n, double r_max) {
    if (n < 16) throw ConfigError("grid: n must be >= 16");
    if (!(r_max > 0.0)) throw ConfigError("grid: r_max must be positive");

    auto grid = std::make_shared<RadialGrid>();
    grid->n = n;
    grid->r_max = r_max;
    grid->h = r_max / static_cast<double>(n - 1);
    grid->r.resize(n);
    grid->w.resize(n);
    grid->w1d.resize(n);
    const double h = grid->h;
    const double four_pi = 4.0 * std::numbers::pi;
    for (int i = 0; i < n; ++i) {
        const double r = static_cast<double>(i) * h;
        grid->r[static_cast<std::size_t>(i)] = r;
        const double t = (i == 0 || i == n - 1) ? 0.5 * h : h;
        grid->w1d[static_cast<std::size_t>(i)] = t;
        grid->w[static_cast<std::size_t>(i)] = four_pi * r * r * t; // w[0] = 0
    }
    grid->r[static_cast<std::size_t>(n - 1)] = r_max; // exact endpoint
    grid->id = ++g_grid_counter;
    return grid;
}

RadialField make_field(const GridPtr& grid, Parity parity, std::string units) {
    if (!grid) throw UsageError("field: null grid");
    RadialField f;
    f.grid = grid;
    f.values.assign(static_cast<std::size_t>(grid->n), 0.0);
    f.parity = parity;
    f.units = std::move(units);
    return f;
}

RadialField make_field(const GridPtr& grid, Parity parity, std::vector<double> values,
                       std::string units) {
    if (!grid) throw UsageError("field: null grid");
    if (values.size() != static_cast<std::size_t>(grid->n))
        throw UsageError("field: value array length does not match grid");
    if (parity == Parity::odd && values[0] != 0.0)
        throw UsageError("field: ODD parity requires values[0] == 0");
    RadialField f;
    f.grid = grid;
    f.values = std::move(values);
    f.parity = parity;
    f.units = std::move(units);
    return f;
}

Density make_density(RadialField field, bool normalize) {
    if (field.parity != Parity::even) throw UsageError("density: field must be EVEN");
    for (double v : field.values)
        if (v < 0.0) throw UsageError("density: negative values");
    Density rho;
    const double mass = integrate(*field.grid, field);
    if (!(mass > 0.0)) throw UsageError("density: mass must be positive");
    if (normalize) {
        const double inv = 1.0 / mass;
        for (double& v : field.values) v *= inv;
        rho.mass = integrate(*field.grid, field);
    } else {
        rho.mass = mass;
    }
    rho.field = std::move(field);
    return rho;
}

void require_same_grid(const RadialGrid& grid, const RadialField& f, const char* where) {
    if (!f.grid || f.grid->id != grid.id)
        throw UsageError(std::string(where) + ": field lives on a different grid");
}

void require_parity(const RadialField& f, Parity expected, const char* where) {
    if (f.parity != expected)
        throw UsageError(std::string(where) + ": parity mismatch");
}

double integrate(const RadialGrid& grid, const RadialField& f) {
    require_same_grid(grid, f, "integrate");
    require_parity(f, Parity::even, "integrate");
    return integrate(grid, f.values);
}

double integrate(const RadialGrid& grid, const std::vector<double>& even_values) {
    if (even_values.size() != grid.w.size())
        throw UsageError("integrate: value array length does not match grid");
    return kernels::ops().dot(grid.w.data(), even_values.data(), even_values.size());
}

void ddr_raw(const RadialGrid& grid, const double* f, double* out) {
    const int n = grid.n;
    const double inv2h = 1.0 / (2.0 * grid.h);
    out[0] = 0.0; // even extension: f'(0) = 0
    for (int i = 1; i < n - 1; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2h;
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
}

void div_radial_raw(const RadialGrid& grid, const double* g, double* out) {
    const int n = grid.n;
    const double h = grid.h;
    const double inv2h = 1.0 / (2.0 * h);
    // odd extension: g'(0) = g_1/h up to O(h^2), limit value 3 g'(0)
    out[0] = 3.0 * g[1] / h;
    for (int i = 1; i < n - 1; ++i)
        out[i] = (g[i + 1] - g[i - 1]) * inv2h + 2.0 * g[i] / grid.r[static_cast<std::size_t>(i)];
    out[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) * inv2h
                 + 2.0 * g[n - 1] / grid.r_max;
}

void laplacian_radial_raw(const RadialGrid& grid, const double* f, double* out) {
    const int n = grid.n;
    const double h = grid.h;
    const double invh2 = 1.0 / (h * h);
    const double inv2h = 1.0 / (2.0 * h);
    // even extension at the origin: limit 3 f''(0)
    out[0] = 6.0 * (f[1] - f[0]) * invh2;
    for (int i = 1; i < n - 1; ++i) {
        const double d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * invh2;
        const double d1 = (f[i + 1] - f[i - 1]) * inv2h;
        out[i] = d2 + 2.0 * d1 / grid.r[static_cast<std::size_t>(i)];
    }
    const double d2 = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * invh2;
    const double d1 = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
    out[n - 1] = d2 + 2.0 * d1 / grid.r_max;
}

void ddr_transpose_raw(const RadialGrid& grid, const double* y, double* out) {
    const int n = grid.n;
    const double inv2h = 1.0 / (2.0 * grid.h);
    for (int j = 0; j < n; ++j) out[j] = 0.0;
    for (int i = 1; i < n - 1; ++i) {
        out[i + 1] += y[i] * inv2h;
        out[i - 1] -= y[i] * inv2h;
    }
    out[n - 1] += 3.0 * y[n - 1] * inv2h;
    out[n - 2] -= 4.0 * y[n - 1] * inv2h;
    out[n - 3] += y[n - 1] * inv2h;
}

void ddr_odd_raw(const RadialGrid& grid, const double* g, double* out) {
    const int n = grid.n;
    const double inv2h = 1.0 / (2.0 * grid.h);
    out[0] = g[1] / grid.h; // odd extension: (g_1 - g_{-1}) / 2h = g_1 / h
    for (int i = 1; i < n - 1; ++i) out[i] = (g[i + 1] - g[i - 1]) * inv2h;
    out[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) * inv2h;
}

void ddr_odd_transpose_raw(const RadialGrid& grid, const double* y, double* out) {
    const int n = grid.n;
    const double inv2h = 1.0 / (2.0 * grid.h);
    for (int j = 0; j < n; ++j) out[j] = 0.0;
    out[1] += y[0] / grid.h;
    for (int i = 1; i < n - 1; ++i) {
        out[i + 1] += y[i] * inv2h;
        out[i - 1] -= y[i] * inv2h;
    }
    out[n - 1] += 3.0 * y[n - 1] * inv2h;
    out[n - 2] -= 4.0 * y[n - 1] * inv2h;
    out[n - 3] += y[n - 1] * inv2h;
}

RadialField ddr(const RadialGrid& grid, const RadialField& f) {
    require_same_grid(grid, f, "ddr");
    require_parity(f, Parity::even, "ddr");
    RadialField out = make_field(f.grid, Parity::odd);
    ddr_raw(grid, f.values.data(), out.values.data());
    return out;
}

RadialField div_radial(const RadialGrid& grid, const RadialField& g) {
    require_same_grid(grid, g, "div_radial");
    require_parity(g, Parity::odd, "div_radial");
    RadialField out = make_field(g.grid, Parity::even);
    div_radial_raw(grid, g.values.data(), out.values.data());
    return out;
}

RadialField laplacian_radial(const RadialGrid& grid, const RadialField& f) {
    require_same_grid(grid, f, "laplacian_radial");
    require_parity(f, Parity::even, "laplacian_radial");
    RadialField out = make_field(f.grid, Parity::even);
    laplacian_radial_raw(grid, f.values.data(), out.values.data());
    return out;
}

} // namespace isolandau
