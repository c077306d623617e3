#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isolandau/errors.hpp"
#include "isolandau/field.hpp"
#include "isolandau/verify.hpp"

using namespace isolandau;

namespace {
constexpr double kPi = std::numbers::pi;

RadialField fill_even(const GridPtr& g, double (*f)(double)) {
    RadialField out = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) out[i] = f(g->r[static_cast<std::size_t>(i)]);
    return out;
}
} // namespace

TEST_CASE("uniform grid layout") {
    const auto g = build_uniform_grid(16, 15.0);
    CHECK(g->h == doctest::Approx(1.0));
    for (int i = 0; i < 16; ++i)
        CHECK(g->r[static_cast<std::size_t>(i)] == doctest::Approx(double(i)));
    CHECK(g->w[0] == 0.0);
    for (double w : g->w) CHECK(w >= 0.0);
    CHECK(g->r.front() == 0.0);
    CHECK(g->r.back() == 15.0);
}

TEST_CASE("grid construction rejects bad parameters") {
    CHECK_THROWS_AS(build_uniform_grid(4, 3.0), ConfigError);
    CHECK_THROWS_AS(build_uniform_grid(15, 3.0), ConfigError);
    CHECK_THROWS_AS(build_uniform_grid(64, 0.0), ConfigError);
    CHECK_THROWS_AS(build_uniform_grid(64, -1.0), ConfigError);
}

TEST_CASE("ball volume to the composite rule's order") {
    // indicator of the unit ball, half-value at the edge node; the trapezoid
    // value is exactly 4 pi (R^3/3 + h^2 R/6), so the sharp error bound is
    // 4 pi h^2 R / 6
    const auto g = build_uniform_grid(2049, 8.0);
    RadialField f = make_field(g, Parity::even);
    const double R = 1.0;
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        f[i] = r < R ? 1.0 : (r == R ? 0.5 : 0.0);
    }
    const double vol = integrate(*g, f);
    const double exact = 4.0 * kPi * R * R * R / 3.0;
    const double sharp = 4.0 * kPi * g->h * g->h * R / 6.0;
    CHECK(std::fabs(vol - exact) <= 1.05 * sharp);
    CHECK(std::fabs(vol - exact) >= 0.95 * sharp); // the bound is attained
}

TEST_CASE("Gaussian mass and second moment") {
    const auto g = build_uniform_grid(2049, 12.0);
    const auto g2 = build_uniform_grid(4097, 12.0);
    auto gauss = [](double r) {
        return std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * r * r);
    };
    const double mass = integrate(*g, fill_even(g, gauss));
    const double mass2 = integrate(*g2, fill_even(g2, gauss));
    CHECK(std::fabs(mass - 1.0) < 1e-8);
    CHECK(std::fabs(mass - mass2) < 1e-12); // quadrature oracle at double resolution

    RadialField r2m = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        r2m[i] = r * r * gauss(r);
    }
    CHECK(integrate(*g, r2m) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("integrate of zero field and error paths") {
    const auto g = build_uniform_grid(64, 4.0);
    CHECK(integrate(*g, make_field(g, Parity::even)) == 0.0);
    CHECK_THROWS_AS(integrate(*g, make_field(g, Parity::odd)), UsageError);
    const auto other = build_uniform_grid(64, 4.0);
    CHECK_THROWS_AS(integrate(*g, make_field(other, Parity::even)), UsageError);
}

TEST_CASE("ddr exact on quadratics, div_radial exact on linear") {
    const auto g = build_uniform_grid(128, 4.0);
    RadialField f = fill_even(g, [](double r) { return r * r; });
    const RadialField df = ddr(*g, f);
    for (int i = 0; i < g->n; ++i)
        CHECK(df[i] == doctest::Approx(2.0 * g->r[static_cast<std::size_t>(i)])
                           .epsilon(1e-12));

    RadialField lin = make_field(g, Parity::odd);
    for (int i = 0; i < g->n; ++i) lin[i] = g->r[static_cast<std::size_t>(i)];
    const RadialField div = div_radial(*g, lin);
    for (int i = 0; i < g->n; ++i) CHECK(div[i] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("radial Laplacian of a Gaussian profile") {
    // analytic oracle: Delta e^{-r^2/2} = (r^2 - 3) e^{-r^2/2}
    auto run = [](int n) {
        const auto g = build_uniform_grid(n, 8.0);
        RadialField f = fill_even(g, [](double r) { return std::exp(-0.5 * r * r); });
        const RadialField lap = laplacian_radial(*g, f);
        double err = 0.0;
        for (int i = 0; i < g->n - 1; ++i) {
            const double r = g->r[static_cast<std::size_t>(i)];
            const double exact = (r * r - 3.0) * std::exp(-0.5 * r * r);
            err = std::max(err, std::fabs(lap[i] - exact));
        }
        return err;
    };
    const double e1 = run(257), e2 = run(513);
    CHECK(e1 < 2e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15)); // second order
}

TEST_CASE("discrete integration by parts") {
    auto run = [](int n) {
        const auto g = build_uniform_grid(n, 10.0);
        RadialField f = make_field(g, Parity::even);
        RadialField gv = make_field(g, Parity::odd);
        for (int i = 0; i < g->n; ++i) {
            const double r = g->r[static_cast<std::size_t>(i)];
            f[i] = std::exp(-r * r);
            gv[i] = r * std::exp(-r * r);
        }
        const RadialField divg = div_radial(*g, gv);
        const RadialField df = ddr(*g, f);
        double a = 0.0, b = 0.0;
        for (int i = 0; i < g->n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            a += g->w[k] * f[i] * divg[i];
            b += g->w[k] * df[i] * gv[i];
        }
        return std::fabs(a + b);
    };
    const double e1 = run(257), e2 = run(513);
    CHECK(e1 < 1e-2);
    CHECK(e1 / e2 > 3.0); // vanishes at second order
}

TEST_CASE("div of ddr agrees with the Laplacian in the interior") {
    const auto g = build_uniform_grid(513, 8.0);
    RadialField f = fill_even(g, [](double r) { return std::exp(-0.5 * r * r); });
    const RadialField a = div_radial(*g, ddr(*g, f));
    const RadialField b = laplacian_radial(*g, f);
    double err = 0.0;
    for (int i = 1; i < g->n - 1; ++i) err = std::max(err, std::fabs(a[i] - b[i]));
    CHECK(err < 5e-4); // both are O(h^2) discretizations of the same operator
}

TEST_CASE("quadrature converges at second order on slowly decaying integrands") {
    // f = (1+r^2)^{-3} on [0,4]; exact primitive of r^2 (1+r^2)^{-3} is
    // (1/8)(arctan r + r (r^2-1)/(1+r^2)^2)
    const double R = 4.0;
    const double exact =
        4.0 * kPi * (1.0 / 8.0)
        * (std::atan(R) + R * (R * R - 1.0) / ((1.0 + R * R) * (1.0 + R * R)));
    auto err = [&](int n) {
        const auto g = build_uniform_grid(n, R);
        RadialField f = fill_even(g, [](double r) {
            const double q = 1.0 + r * r;
            return 1.0 / (q * q * q);
        });
        return std::fabs(integrate(*g, f) - exact);
    };
    const double ratio = err(513) / err(1025);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("parity and density invariants") {
    const auto g = build_uniform_grid(32, 2.0);
    std::vector<double> vals(32, 1.0);
    CHECK_THROWS_AS(make_field(g, Parity::odd, vals), UsageError); // values[0] != 0

    RadialField neg = make_field(g, Parity::even);
    neg[3] = -1.0;
    CHECK_THROWS_AS(make_density(neg), UsageError);

    RadialField ok = make_field(g, Parity::even);
    for (int i = 0; i < 32; ++i) ok[i] = 2.0;
    const Density d = make_density(ok, true);
    CHECK(std::fabs(d.mass - 1.0) < 1e-12);
}

TEST_CASE("rescaled density lands on the nested grid exactly") {
    const auto g = build_uniform_grid(257, 8.0);
    const auto g2 = build_uniform_grid(257, 4.0);
    const Density rho = testdens::gaussian(g, 1.0);
    const Density rl = testdens::rescaled(rho, g2, 2.0);
    CHECK(rl.values()[10] == doctest::Approx(8.0 * rho.values()[10]).epsilon(1e-15));
    CHECK(std::fabs(rl.mass - rho.mass) < 1e-6); // mass-preserving rescaling
}
