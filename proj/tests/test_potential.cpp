#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isolandau/errors.hpp"
#include "isolandau/field.hpp"
#include "isolandau/potential.hpp"
#include "isolandau/verify.hpp"

using namespace isolandau;

namespace {

constexpr double kPi = std::numbers::pi;

double lm_exact(double r) { // (-Delta)^{-1} of the standard Gaussian
    if (r < 1e-12) return std::pow(2.0 * kPi, -1.5);
    return std::erf(r / std::numbers::sqrt2) / (4.0 * kPi * r);
}

} // namespace

TEST_CASE("solver transposes are exact adjoints") {
    const auto g = build_uniform_grid(143, 7.0);
    const std::size_t n = static_cast<std::size_t>(g->n);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(n), y(n), nx(n), nty(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = dist(rng);
        y[i] = dist(rng);
    }
    coulomb_potential_raw(*g, x.data(), nx.data(), false);
    coulomb_potential_transpose_raw(*g, y.data(), nty.data());
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a += nx[i] * y[i];
        b += x[i] * nty[i];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-13));

    x[0] = 0.0; // ODD input for the vector solve
    vector_potential_raw(*g, x.data(), nx.data());
    vector_potential_transpose_raw(*g, y.data(), nty.data());
    a = b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a += nx[i] * y[i];
        b += x[i] * nty[i];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("uniform ball potential matches the closed form") {
    const auto g = build_uniform_grid(4097, 8.0);
    RadialField f = make_field(g, Parity::even);
    const double c = 3.0 / (4.0 * kPi);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        f[i] = r < 1.0 ? c : (r == 1.0 ? 0.5 * c : 0.0);
    }
    const Density rho = make_density(f);
    const PotentialResult res = newtonian_potential(*g, rho);
    const int i1 = (g->n - 1) / 8;     // r = 1
    const int i2 = (g->n - 1) / 4;     // r = 2
    CHECK(res.u[0] == doctest::Approx(3.0 / (8.0 * kPi)).epsilon(2e-4));
    CHECK(res.u[i1] == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(2e-4));
    CHECK(res.u[i2] == doctest::Approx(1.0 / (8.0 * kPi)).epsilon(2e-4));
    CHECK(res.total_mass_used == doctest::Approx(1.0).epsilon(1e-4));

    // strictly decreasing beyond the support
    for (int i = i1 + 2; i < g->n - 1; ++i) CHECK(res.u[i + 1] < res.u[i]);

    // far field m/(4 pi r) at the last node
    CHECK(res.u[g->n - 1]
          == doctest::Approx(res.total_mass_used / (4.0 * kPi * g->r_max)).epsilon(1e-6));
}

TEST_CASE("Gaussian potential matches the erf closed form") {
    const auto g = build_uniform_grid(2049, 12.0);
    const Density rho = testdens::gaussian(g, 1.0);
    const PotentialResult res = newtonian_potential(*g, rho);
    double err = 0.0;
    for (int i = 0; i < g->n; ++i)
        err = std::max(err, std::fabs(res.u[i] - lm_exact(g->r[static_cast<std::size_t>(i)])));
    CHECK(err < 1e-8);
    CHECK(res.u[0] == doctest::Approx(std::pow(2.0 * kPi, -1.5)).epsilon(1e-7));
}

TEST_CASE("zero source gives zero potential") {
    const auto g = build_uniform_grid(64, 4.0);
    std::vector<double> zero(static_cast<std::size_t>(g->n), 0.0), out(zero);
    coulomb_potential_raw(*g, zero.data(), out.data(), true);
    for (double v : out) CHECK(v == 0.0);
    vector_potential_raw(*g, zero.data(), out.data());
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("negative-Laplacian residual of the scalar potential is second order") {
    auto run = [](int n) {
        const auto g = build_uniform_grid(n, 10.0);
        const Density rho = testdens::gaussian(g, 1.0);
        const PotentialResult res = newtonian_potential(*g, rho);
        const RadialField lap = laplacian_radial(*g, res.u);
        double err = 0.0;
        for (int i = 1; i < g->n - 1; ++i)
            err = std::max(err, std::fabs(-lap[i] - rho.values()[static_cast<std::size_t>(i)]));
        return err;
    };
    const double e1 = run(257), e2 = run(513);
    CHECK(e1 < 2e-4);
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("vector potential: commutation with the gradient") {
    const auto g = build_uniform_grid(2049, 12.0);
    const Density rho = testdens::gaussian(g, 1.0);
    const RadialField drho = ddr(*g, rho.field);
    const PotentialResult hres = vector_newtonian_potential(*g, drho);
    const PotentialResult ures = newtonian_potential(*g, rho);
    const RadialField du = ddr(*g, ures.u);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g->n; ++i) {
        num = std::max(num, std::fabs(hres.u[i] - du[i]));
        den = std::max(den, std::fabs(du[i]));
    }
    CHECK(num / den < 1e-5);
}

TEST_CASE("vector potential: discrete vector-Laplacian residual") {
    auto run = [](int n) {
        const auto g = build_uniform_grid(n, 10.0);
        RadialField gv = make_field(g, Parity::odd);
        for (int i = 1; i < g->n; ++i) {
            const double r = g->r[static_cast<std::size_t>(i)];
            gv[i] = r * std::exp(-r * r);
        }
        const PotentialResult res = vector_newtonian_potential(*g, gv);
        // h'' + 2h'/r - 2h/r^2 = d/dr (h' + 2h/r): compose the two
        // parity-aware stencils so the origin stays second order
        const RadialField div = div_radial(*g, res.u);
        const RadialField lap = ddr(*g, div);
        double err = 0.0;
        for (int i = 0; i < g->n - 1; ++i)
            err = std::max(err, std::fabs(-lap[i] - gv[i]));
        return err;
    };
    const double e1 = run(257), e2 = run(513);
    CHECK(e1 < 2e-4);
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("vector potential far field and parity validation") {
    const auto g = build_uniform_grid(1025, 8.0);
    RadialField gv = make_field(g, Parity::odd);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        gv[i] = r * std::exp(-4.0 * r * r); // compactly supported in practice
    }
    const PotentialResult res = vector_newtonian_potential(*g, gv);
    // closed form: h(rmax) = (1/(3 rmax^2)) int s^3 g ds = moment/(4pi)/(3 rmax^2)
    const double expected =
        res.total_mass_used / (4.0 * kPi) / (3.0 * g->r_max * g->r_max);
    CHECK(res.u[g->n - 1] == doctest::Approx(expected).epsilon(1e-10));

    CHECK_THROWS_AS(vector_newtonian_potential(*g, make_field(g, Parity::even)),
                    UsageError);
}

TEST_CASE("identity: int grad rho . grad L rho = int rho^2") {
    const auto g = build_uniform_grid(2049, 12.0);
    const Density rho = testdens::gaussian(g, 1.0);
    const PotentialResult res = newtonian_potential(*g, rho);
    const RadialField drho = ddr(*g, rho.field);
    const RadialField du = ddr(*g, res.u);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < g->n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        lhs += g->w[k] * drho[i] * du[i];
        rhs += g->w[k] * rho.values()[k] * rho.values()[k];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("3d oracle: point mass Green's function") {
    std::vector<CloudPoint> cloud = {{{0.0, 0.0, 0.0}, 1.0}};
    const std::vector<std::array<double, 3>> queries = {{2.0, 0.0, 0.0}};
    const auto vals = potential_oracle_3d(cloud, 1.0, queries);
    CHECK(vals[0] == doctest::Approx(1.0 / (8.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("3d oracle: radial Gaussian against the erf value") {
    const int m = 32;
    const double L = 6.0, delta = 2.0 * L / m;
    std::vector<CloudPoint> cloud;
    cloud.reserve(static_cast<std::size_t>(m) * m * m);
    const double norm = std::pow(2.0 * kPi, -1.5);
    for (int ix = 0; ix < m; ++ix)
        for (int iy = 0; iy < m; ++iy)
            for (int iz = 0; iz < m; ++iz) {
                const std::array<double, 3> p = {-L + (ix + 0.5) * delta,
                                                 -L + (iy + 0.5) * delta,
                                                 -L + (iz + 0.5) * delta};
                const double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                cloud.push_back({p, norm * std::exp(-0.5 * r2)});
            }
    const std::vector<std::array<double, 3>> queries = {{1.0, 0.0, 0.0}};
    const auto vals = potential_oracle_3d(cloud, delta * delta * delta, queries);
    CHECK(std::fabs(vals[0] - lm_exact(1.0)) < 2e-2);
    CHECK(std::fabs(vals[0] - lm_exact(1.0)) / lm_exact(1.0) < 2e-2);
}

TEST_CASE("3d oracle: zero density and resource guard") {
    std::vector<CloudPoint> cloud = {{{0.0, 0.0, 0.0}, 0.0}};
    const std::vector<std::array<double, 3>> queries = {{1.0, 0.0, 0.0}};
    CHECK(potential_oracle_3d(cloud, 1.0, queries)[0] == 0.0);

    std::vector<CloudPoint> big(41ull * 41ull * 41ull, {{0, 0, 0}, 0.0});
    CHECK_THROWS_AS(potential_oracle_3d(big, 1.0, queries), ResourceError);
}
