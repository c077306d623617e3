#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isolandau/diagnostics.hpp"
#include "isolandau/errors.hpp"
#include "isolandau/geometry.hpp"
#include "isolandau/landau.hpp"
#include "isolandau/potential.hpp"
#include "isolandau/verify.hpp"

using namespace isolandau;

namespace {

RadialField log_of(const Density& rho) {
    RadialField f = make_field(rho.grid(), Parity::even);
    for (int i = 0; i < rho.grid()->n; ++i)
        f[i] = std::log(std::max(rho.values()[static_cast<std::size_t>(i)], 1e-300));
    return f;
}

} // namespace

TEST_CASE("onsager operator annihilates constants") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density rho = testdens::gaussian(g, 1.0);
    RadialField c = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) c[i] = 3.7;
    const RadialField out = apply_onsager(*g, rho, c);
    // exact zero up to roundoff of the one-sided boundary stencil
    for (int i = 0; i < g->n; ++i) CHECK(std::fabs(out[i]) < 1e-25);
}

TEST_CASE("gradient-flow identity: K log rho equals the Landau right-hand side") {
    auto mismatch = [](int n) {
        const auto g = build_uniform_grid(n, 12.0);
        const Density rho = testdens::gaussian(g, 1.0);
        const RadialField lhs = apply_onsager(*g, rho, log_of(rho));
        const RadialField rhs = landau_rhs_divform(*g, rho);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g->n; ++i) {
            num = std::max(num, std::fabs(lhs[i] - rhs[i]));
            den = std::max(den, std::fabs(rhs[i]));
        }
        return num / den;
    };
    const double e1 = mismatch(1025), e2 = mismatch(2049);
    CHECK(e2 < 1e-3);
    CHECK(e1 / e2 > 2.5); // second-order decrease
}

TEST_CASE("metric form: null space, symmetry, dissipation value") {
    const auto g = build_uniform_grid(513, 12.0);
    const Density rho = testdens::gaussian(g, 1.0);

    RadialField c = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) c[i] = -1.25;
    RadialField phi = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        phi[i] = std::exp(-0.3 * r * r);
    }
    CHECK(metric_form(*g, rho, c, phi) == 0.0); // constants have zero gradient

    CHECK(metric_form(*g, rho, phi, c) == metric_form(*g, rho, c, phi));

    const RadialField lr = log_of(rho);
    const double d = dissipation_closed(*g, rho);
    CHECK(metric_form(*g, rho, lr, lr) == doctest::Approx(d).epsilon(1e-3 / 0.09));
}

TEST_CASE("metric positivity on seeded random potentials") {
    const auto g = build_uniform_grid(513, 12.0);
    std::mt19937_64 rng(2024);
    const Density cat[2] = {testdens::gaussian(g, 1.0),
                            testdens::smoothed_ball(g, 1.5, 0.35)};
    for (const Density& rho : cat) {
        for (int k = 0; k < 10; ++k) {
            const RadialField phi = testdens::random_smooth_phi(g, rng);
            const MetricFormParts parts = metric_form_parts(*g, rho, phi, phi);
            CHECK(parts.value >= -1e-10 * parts.local);
        }
    }
}

TEST_CASE("metric positivity cross-checked on a 3d cloud oracle") {
    // brute-force check of the kernel inequality
    //   iint rho(x) rho(y) [u(x)^2 - u(x) u(y)] / |x-y| >= 0
    // through the free-space oracle on a 17^3 cloud, for 3 seeded draws
    const auto g = build_uniform_grid(257, 8.0);
    const Density rho = testdens::gaussian(g, 1.0);
    std::mt19937_64 rng(77);

    const int m = 17;
    const double L = 4.0, delta = 2.0 * L / m;
    std::vector<CloudPoint> cloud;
    std::vector<std::array<double, 3>> pts;
    for (int ix = 0; ix < m; ++ix)
        for (int iy = 0; iy < m; ++iy)
            for (int iz = 0; iz < m; ++iz) {
                const std::array<double, 3> p = {-L + (ix + 0.5) * delta,
                                                 -L + (iy + 0.5) * delta,
                                                 -L + (iz + 0.5) * delta};
                pts.push_back(p);
            }
    auto radial_value = [&](const RadialField& f, double r) {
        const double x = std::min(r / g->h, double(g->n - 1));
        const int i = static_cast<int>(x);
        const double frac = x - i;
        if (i + 1 >= g->n) return f[g->n - 1];
        return (1.0 - frac) * f[i] + frac * f[i + 1];
    };

    for (int draw = 0; draw < 3; ++draw) {
        const RadialField u = testdens::random_smooth_phi(g, rng);
        cloud.clear();
        std::vector<double> uvals;
        for (const auto& p : pts) {
            const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            cloud.push_back({p, radial_value(rho.field, r)});
            uvals.push_back(radial_value(u, r));
        }
        std::vector<CloudPoint> cloud_u = cloud;
        for (std::size_t i = 0; i < cloud_u.size(); ++i) cloud_u[i].rho *= uvals[i];

        const double vol = delta * delta * delta;
        const auto p_rho = potential_oracle_3d(cloud, vol, pts);
        const auto p_rho_u = potential_oracle_3d(cloud_u, vol, pts);
        double lhs = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            lhs += cloud[i].rho * uvals[i] * (uvals[i] * p_rho[i] - p_rho_u[i]) * vol;
            scale += cloud[i].rho * uvals[i] * uvals[i] * p_rho[i] * vol;
        }
        CHECK(lhs >= -1e-6 * std::fabs(scale));
    }
}

TEST_CASE("solve_potential inverts the Onsager operator") {
    const auto g = build_uniform_grid(513, 12.0);
    const Density rho = testdens::gaussian(g, 1.0);

    CHECK(solve_potential(*g, rho, make_field(g, Parity::even)).values
          == make_field(g, Parity::even).values); // sigma = 0 -> phi = 0

    RadialField sigma = landau_rhs_divform(*g, rho);
    for (double& v : sigma.values) v = -v;
    const RadialField phi = solve_potential(*g, rho, sigma);

    // round trip
    const RadialField back = apply_onsager(*g, rho, phi);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g->n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        num += g->w[k] * (back[i] + sigma[i]) * (back[i] + sigma[i]);
        den += g->w[k] * sigma[i] * sigma[i];
    }
    CHECK(std::sqrt(num / den) < 1e-6);

    // gradient matches grad log rho where the density is supported
    const RadialField dphi = ddr(*g, phi);
    const RadialField dlog = ddr(*g, log_of(rho));
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < g->n; ++i) {
        if (rho.values()[static_cast<std::size_t>(i)] < 1e-6) continue;
        err = std::max(err, std::fabs(dphi[i] - dlog[i]));
        scale = std::max(scale, std::fabs(dlog[i]));
    }
    CHECK(err / scale < 1e-2);

    // non-mean-zero sigma is rejected
    RadialField bad = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) bad[i] = 1.0;
    CHECK_THROWS_AS(solve_potential(*g, rho, bad), UsageError);

    // unreachable tolerance reports non-convergence with the residual
    SolveOptions tight;
    tight.rtol = 1e-15;
    tight.max_iterations = 3;
    CHECK_THROWS_AS(solve_potential(*g, rho, sigma, tight), NumericalError);
}

TEST_CASE("geodesic right-hand side is stationary for constant phi") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density rho = testdens::gaussian(g, 1.0);
    GeodesicState s = make_geodesic_state(rho, make_field(g, Parity::even));
    const auto [drho, dphi] = geodesic_rhs(*g, s);
    for (int i = 0; i < g->n; ++i) {
        CHECK(drho[i] == 0.0);
        CHECK(dphi[i] == 0.0);
    }
}

TEST_CASE("geodesic right-hand side at phi = -log rho recovers the flow") {
    const auto g = build_uniform_grid(1025, 12.0);
    const Density rho = testdens::gaussian(g, 1.0);
    RadialField phi = log_of(rho);
    for (double& v : phi.values) v = -v;
    const GeodesicState s = make_geodesic_state(rho, phi);
    const RadialField rhs = landau_rhs_divform(*g, rho);

    // the direct scheme is nodally consistent
    {
        std::vector<double> drho(static_cast<std::size_t>(g->n)),
            dphi(static_cast<std::size_t>(g->n));
        geodesic_rhs_raw(*g, s.rho.values.data(), s.phi.values.data(), drho.data(),
                         dphi.data(), GeodesicScheme::direct);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g->n; ++i) {
            num = std::max(num, std::fabs(drho[static_cast<std::size_t>(i)] - rhs[i]));
            den = std::max(den, std::fabs(rhs[i]));
        }
        CHECK(num / den < 5e-3);
    }
    // the energy-conserving adjoint scheme agrees in the quadrature norm
    // (its divergence is weak-form consistent, not nodal at the first node)
    {
        std::vector<double> drho(static_cast<std::size_t>(g->n)),
            dphi(static_cast<std::size_t>(g->n));
        geodesic_rhs_raw(*g, s.rho.values.data(), s.phi.values.data(), drho.data(),
                         dphi.data(), GeodesicScheme::adjoint);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g->n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            num += g->w[k] * (drho[k] - rhs[i]) * (drho[k] - rhs[i]);
            den += g->w[k] * rhs[i] * rhs[i];
        }
        CHECK(std::sqrt(num / den) < 1e-2);
    }
}

TEST_CASE("hamiltonian conservation and time reversal") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density rho = testdens::gaussian(g, 1.0);
    RadialField phi = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        phi[i] = 0.1 * std::exp(-0.5 * r * r / 2.25);
    }
    const GeodesicState s0 = make_geodesic_state(rho, phi);
    GeodesicOptions opts;
    opts.t_end = 0.3;
    opts.dt = 1e-3;
    opts.sample_every = 50;
    const GeodesicResult fwd = geodesic_integrate(s0, opts);
    CHECK(fwd.h0 > 0.0);
    CHECK(fwd.max_rel_h_drift < 1e-8);

    GeodesicState mid = fwd.final_state;
    for (double& v : mid.phi.values) v = -v;
    const GeodesicResult back = geodesic_integrate(mid, opts);
    double l1 = 0.0;
    for (int i = 0; i < g->n; ++i)
        l1 += g->w[static_cast<std::size_t>(i)]
              * std::fabs(back.final_state.rho.values[static_cast<std::size_t>(i)]
                          - rho.values()[static_cast<std::size_t>(i)]);
    CHECK(l1 < 1e-10);

    // stationary when phi = 0
    const GeodesicState z = make_geodesic_state(rho, make_field(g, Parity::even));
    const GeodesicResult still = geodesic_integrate(z, opts);
    CHECK(still.max_rel_h_drift == 0.0);
    for (int i = 0; i < g->n; ++i)
        CHECK(still.final_state.rho.values[static_cast<std::size_t>(i)]
              == rho.values()[static_cast<std::size_t>(i)]);
}

namespace {

// time-reparameterized admissible path: (rho(s(t)), s'(t) phi(s(t))) also
// satisfies the continuity equation, with action int s'(t)^2 m(s(t)) dt
std::vector<GeodesicSample> reparam_path(const std::vector<GeodesicSample>& dense,
                                         int coarse_samples) {
    const double T = dense.back().t;
    std::vector<GeodesicSample> out;
    for (int j = 0; j <= coarse_samples; ++j) {
        const double t = T * j / coarse_samples;
        const double u = t / T;
        const double s = T * u * u * (3.0 - 2.0 * u);      // smoothstep
        const double sp = 6.0 * u * (1.0 - u);             // ds/dt
        // linear interpolation of the dense samples at time s
        const double x = s / (dense[1].t - dense[0].t);
        const std::size_t i0 =
            std::min(static_cast<std::size_t>(x), dense.size() - 2);
        const double frac = x - static_cast<double>(i0);
        GeodesicSample smp;
        smp.t = t;
        smp.rho.resize(dense[0].rho.size());
        smp.phi.resize(dense[0].phi.size());
        for (std::size_t k = 0; k < smp.rho.size(); ++k) {
            smp.rho[k] = (1.0 - frac) * dense[i0].rho[k] + frac * dense[i0 + 1].rho[k];
            smp.phi[k] = sp
                         * ((1.0 - frac) * dense[i0].phi[k] + frac * dense[i0 + 1].phi[k]);
        }
        out.push_back(std::move(smp));
    }
    return out;
}

} // namespace

TEST_CASE("path action: geodesic value and suboptimal reparameterizations") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density rho = testdens::gaussian(g, 1.0);
    RadialField phi = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        phi[i] = 0.1 * std::exp(-0.25 * r * r);
    }
    const GeodesicState s0 = make_geodesic_state(rho, phi);
    GeodesicOptions opts;
    opts.t_end = 1.0;
    opts.dt = 2e-3;
    opts.sample_every = 1; // dense path for reparameterization
    const GeodesicResult res = geodesic_integrate(s0, opts);

    std::vector<GeodesicSample> coarse;
    for (std::size_t k = 0; k < res.samples.size(); k += 25)
        coarse.push_back(res.samples[k]);
    if ((res.samples.size() - 1) % 25 != 0) coarse.push_back(res.samples.back());
    const PathActionResult act = path_action(g, coarse);
    CHECK(act.continuity_ok);
    CHECK(act.action == doctest::Approx(2.0 * res.h0).epsilon(1e-3));

    CHECK_THROWS_AS(path_action(g, {res.samples[0]}), UsageError);

    // the smoothstep reparameterization is admissible with action
    // 2H int (6u(1-u))^2 du = 1.2 * 2H; it bounds the geodesic action from
    // above and its trapezoid error decays at second order in the sampling
    const double exact_sub = 1.2 * 2.0 * res.h0;
    const double a_coarse = path_action(g, reparam_path(res.samples, 20), 1.0).action;
    const double a_fine = path_action(g, reparam_path(res.samples, 40), 1.0).action;
    CHECK(a_coarse > 2.0 * res.h0); // suboptimal beats the geodesic action
    const double e_coarse = std::fabs(a_coarse - exact_sub);
    const double e_fine = std::fabs(a_fine - exact_sub);
    // at least second order (fourth here: s'^2 has flat endpoints)
    CHECK(e_coarse / e_fine > 3.5);
}

TEST_CASE("shooting: identical endpoints converge immediately") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density rho = testdens::gaussian(g, 1.0);
    const ShootingResult res = wk_distance_shooting(rho, rho);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    CHECK(res.wk_estimate == 0.0);
    CHECK(res.terminal_residual <= 1e-12);
}

TEST_CASE("shooting rejects mass mismatch") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density a = testdens::gaussian(g, 1.0);
    RadialField f = a.field;
    for (double& v : f.values) v *= 2.0;
    const Density b = make_density(f);
    CHECK_THROWS_AS(wk_distance_shooting(a, b), UsageError);
    CHECK_THROWS_AS(w1_radial(a, b), UsageError);
}

TEST_CASE("shooting round-trip recovers sqrt(2H)") {
    const auto g = build_uniform_grid(257, 10.0);
    const Density rho0 = testdens::gaussian(g, 1.0);
    RadialField phi = make_field(g, Parity::even);
    for (int i = 0; i < g->n; ++i) {
        const double r = g->r[static_cast<std::size_t>(i)];
        phi[i] = 0.08 * std::exp(-0.5 * r * r / 1.21);
    }
    const GeodesicState s0 = make_geodesic_state(rho0, phi);
    GeodesicOptions gopt;
    gopt.t_end = 1.0;
    gopt.dt = 2e-3;
    gopt.sample_every = 1 << 30;
    const GeodesicResult fwd = geodesic_integrate(s0, gopt);
    const Density rho1 = make_density(
        make_field(g, Parity::even, fwd.final_state.rho.values), true);

    ShootingOptions sopt;
    sopt.dt = 2e-3;
    const ShootingResult res = wk_distance_shooting(rho0, rho1, sopt);
    CHECK(res.converged);
    const double expected = std::sqrt(2.0 * fwd.h0);
    CHECK(res.wk_estimate == doctest::Approx(expected).epsilon(1e-2));
}

TEST_CASE("w1_radial closed forms") {
    const auto g = build_uniform_grid(65537, 3.0);
    auto ball = [&](double R) {
        RadialField f = make_field(g, Parity::even);
        const double c = 3.0 / (4.0 * std::numbers::pi * R * R * R);
        for (int i = 0; i < g->n; ++i) {
            const double r = g->r[static_cast<std::size_t>(i)];
            f[i] = r < R ? c : (r == R ? 0.5 * c : 0.0);
        }
        return make_density(f, true);
    };
    const Density b1 = ball(1.0), b2 = ball(2.0);
    CHECK(w1_radial(b1, b1) == 0.0);
    CHECK(std::fabs(w1_radial(b1, b2) - 0.75) < 1e-4);

    RadialField pm = make_field(g, Parity::even);
    pm[1] = 1.0;
    const Density point = make_density(pm, true);
    CHECK(std::fabs(w1_radial(point, b2) - 1.5) < 1e-4); // 3R/4 with R = 2
}

TEST_CASE("w1 LP oracle agreement and symmetry") {
    const auto g = build_uniform_grid(513, 4.0);
    auto ball = [&](double R) {
        RadialField f = make_field(g, Parity::even);
        const double c = 3.0 / (4.0 * std::numbers::pi * R * R * R);
        for (int i = 0; i < g->n; ++i)
            f[i] = g->r[static_cast<std::size_t>(i)] <= R ? c : 0.0;
        return make_density(f, true);
    };
    const Density b1 = ball(1.0), b2 = ball(2.0);
    CloudSpec spec;
    spec.pts_per_axis = 11;
    spec.half_extent = 2.2;
    const double lp = w1_lp_oracle(b1, b2, spec);
    const double ref = w1_radial(b1, b2);
    CHECK(std::fabs(lp - ref) / ref < 5e-2);
    CHECK(w1_lp_oracle(b2, b1, spec) == doctest::Approx(lp).epsilon(1e-9));
    CHECK(w1_lp_oracle(b1, b1, spec) <= 1e-12);

    CloudSpec big;
    big.pts_per_axis = 16;
    CHECK_THROWS_AS(w1_lp_oracle(b1, b2, big), ResourceError);
}

TEST_CASE("inequality report conventions") {
    InequalityReport rep = w1_wk_inequality_report(
        {{0.0, 0.0, true}, {0.3, 0.2, true}});
    CHECK(rep.ratios[0] == 0.0);
    CHECK(rep.ratios[1] == doctest::Approx(1.5));
    CHECK(rep.max_ratio == doctest::Approx(1.5));
    CHECK_THROWS_AS(w1_wk_inequality_report({{0.1, 0.1, false}}), UsageError);
}
