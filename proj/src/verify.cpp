#include "isolandau/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isolandau/diagnostics.hpp"
#include "isolandau/errors.hpp"
#include "isolandau/geometry.hpp"
#include "isolandau/kernels.hpp"
#include "isolandau/landau.hpp"
#include "isolandau/potential.hpp"
#include "isolandau/tolerances.hpp"

namespace isolandau {

namespace testdens {

Density gaussian(const GridPtr& grid, double sigma) {
    RadialField f = make_field(grid, Parity::even, "density");
    const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -1.5);
    for (int i = 0; i < grid->n; ++i) {
        const double r = grid->r[static_cast<std::size_t>(i)];
        f[i] = norm * std::exp(-0.5 * r * r / (sigma * sigma));
    }
    return make_density(std::move(f), true);
}

Density smoothed_ball(const GridPtr& grid, double radius, double edge_width) {
    RadialField f = make_field(grid, Parity::even, "density");
    for (int i = 0; i < grid->n; ++i) {
        const double r = grid->r[static_cast<std::size_t>(i)];
        f[i] = 0.5 * (1.0 - std::tanh((r - radius) / edge_width));
    }
    return make_density(std::move(f), true);
}

Density gaussian_mixture(const GridPtr& grid, double sigma1, double sigma2,
                         double weight1) {
    RadialField f = make_field(grid, Parity::even, "density");
    const double n1 = std::pow(2.0 * std::numbers::pi * sigma1 * sigma1, -1.5);
    const double n2 = std::pow(2.0 * std::numbers::pi * sigma2 * sigma2, -1.5);
    for (int i = 0; i < grid->n; ++i) {
        const double r = grid->r[static_cast<std::size_t>(i)];
        f[i] = weight1 * n1 * std::exp(-0.5 * r * r / (sigma1 * sigma1))
               + (1.0 - weight1) * n2 * std::exp(-0.5 * r * r / (sigma2 * sigma2));
    }
    return make_density(std::move(f), true);
}

Density rescaled(const Density& rho, const GridPtr& target_grid, double lambda) {
    const RadialGrid& src = *rho.grid();
    const RadialGrid& dst = *target_grid;
    if (dst.n != src.n
        || std::fabs(dst.r_max * lambda - src.r_max) > 1e-12 * src.r_max)
        throw UsageError("rescaled: target grid must be the source grid shrunk by lambda");
    RadialField f = make_field(target_grid, Parity::even, "density");
    const double l3 = lambda * lambda * lambda;
    // lambda * r'_i lands exactly on r_i of the source grid
    for (int i = 0; i < dst.n; ++i) f[i] = l3 * rho.values()[static_cast<std::size_t>(i)];
    return make_density(std::move(f));
}

RadialField random_smooth_phi(const GridPtr& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> center(0.0, 0.6 * grid->r_max);
    std::uniform_real_distribution<double> width(0.05 * grid->r_max, 0.25 * grid->r_max);
    RadialField phi = make_field(grid, Parity::even, "phi");
    for (int bump = 0; bump < 4; ++bump) {
        const double a = amp(rng), c = center(rng), s = width(rng);
        for (int i = 0; i < grid->n; ++i) {
            const double r = grid->r[static_cast<std::size_t>(i)];
            const double u = (r - c) / s, v = (r + c) / s;
            phi[i] += a * (std::exp(-0.5 * u * u) + std::exp(-0.5 * v * v));
        }
    }
    return phi;
}

} // namespace testdens

namespace {

RadialField log_field(const Density& rho) {
    RadialField f = make_field(rho.grid(), Parity::even, "log_rho");
    for (int i = 0; i < rho.grid()->n; ++i)
        f[i] = std::log(std::max(rho.values()[static_cast<std::size_t>(i)], 1e-300));
    return f;
}

double max_rel_inf(const std::vector<double>& a, const std::vector<double>& b) {
    // ||a - b||_inf / ||b||_inf
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::fabs(a[i] - b[i]));
        den = std::max(den, std::fabs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

} // namespace

std::vector<CheckResult> run_verify_suite(const SimConfig& cfg) {
    const VerifyTolerances& tol = verify_tolerances();
    std::vector<CheckResult> results;
    auto record = [&](const std::string& name, double measured, double tolerance,
                      bool less_equal = true, const std::string& note = {}) {
        CheckResult r;
        r.name = name;
        r.measured = measured;
        r.tolerance = tolerance;
        r.pass = less_equal ? measured <= tolerance : measured >= tolerance;
        r.note = note;
        results.push_back(r);
    };

    // Each check runs at the resolution its tolerance is calibrated for;
    // the config supplies r_max, gamma, seeds and the Poincare epsilon.
    const GridPtr grid = build_uniform_grid(2049, cfg.grid_r_max);
    const Density gauss = testdens::gaussian(grid, 1.0);

    // --- dissipation triple agreement ---------------------------------------
    {
        const GridPtr og = build_uniform_grid(513, cfg.grid_r_max);
        const Density cat[3] = {testdens::gaussian(og, 1.0),
                                testdens::smoothed_ball(og, 1.5, 0.35),
                                testdens::gaussian_mixture(og, 0.8, 1.6, 0.5)};
        double worst = 0.0;
        for (const Density& rho : cat) {
            const double d_closed = dissipation_closed(*og, rho);
            const double d_double = dissipation_double_oracle(*og, rho);
            const RadialField lr = log_field(rho);
            const double d_metric = metric_form(*og, rho, lr, lr);
            const double scale = std::fabs(d_closed);
            worst = std::max(worst, std::fabs(d_closed - d_double) / scale);
            worst = std::max(worst, std::fabs(d_closed - d_metric) / scale);
            worst = std::max(worst, std::fabs(d_double - d_metric) / scale);
        }
        record("dissipation_triple_agreement", worst, tol.dissipation_triple);

        const double expected = std::pow(2.0 * std::numbers::pi, -1.5) * 5.0
                                    * std::numbers::sqrt2 / 4.0
                                - std::pow(4.0 * std::numbers::pi, -1.5);
        record("dissipation_gaussian_value",
               std::fabs(dissipation_closed(*og, cat[0]) - expected), 1e-3, true,
               "analytic reduction of the Coulomb double integral");
    }

    // --- gradient-flow consistency (Onsager vs RHS) -------------------------
    {
        double worst = 0.0;
        const Density balls = testdens::smoothed_ball(grid, 1.5, 0.35);
        for (const Density* rho : {&gauss, &balls}) {
            const RadialField lr = log_field(*rho);
            const RadialField lhs = apply_onsager(*grid, *rho, lr);
            const RadialField rhs = landau_rhs_divform(*grid, *rho);
            worst = std::max(worst, max_rel_inf(lhs.values, rhs.values));
        }
        record("onsager_rhs_consistency", worst, tol.gradient_flow_consistency);
    }

    // --- reference flow run: H-theorem, Hessian, kappa-Fisher, monotonicity --
    {
        SimulateOptions opts;
        opts.t_end = 1.0;
        opts.ctrl.cfl_safety = cfg.time_cfl_safety;
        opts.ctrl.dt_max = cfg.time_dt_max;
        opts.ctrl.mass_drift_budget = 1e-4;
        const double dt0 = cfl_dt(*grid, gauss, opts.ctrl);
        opts.output_every = std::max(1, static_cast<int>(std::lround(2.7e-3 / dt0)));
        const SimulateResult sim = simulate(gauss, opts);
        const auto records = assemble_records(sim.trace, cfg.diag_gamma);

        double worst_ht = 0.0, worst_hess = 0.0, worst_kf = -HUGE_VAL;
        double prev_entropy = records.front().entropy;
        double prev_moment = records.front().second_moment;
        bool entropy_down = true, moment_up = true;
        for (std::size_t k = 1; k < records.size(); ++k) {
            if (records[k].entropy > prev_entropy + tol.monotonicity_slack)
                entropy_down = false;
            if (records[k].second_moment < prev_moment - tol.monotonicity_slack)
                moment_up = false;
            prev_entropy = records[k].entropy;
            prev_moment = records[k].second_moment;
        }
        for (const auto& rec : records) {
            if (!rec.dEdt_fd) continue;
            worst_ht = std::max(worst_ht, std::fabs(*rec.dEdt_fd + rec.dissipation)
                                              / std::fabs(rec.dissipation));
            const double kf_lhs = *rec.dEdt_fd + rec.kappa * rec.fisher_weighted;
            worst_kf = std::max(worst_kf,
                                kf_lhs - tol.kappa_fisher_slack * std::fabs(*rec.dEdt_fd));
            if (rec.t >= 0.1 && rec.t <= 1.0 && rec.d2Edt2_fd)
                worst_hess = std::max(worst_hess,
                                      std::fabs(rec.hessian_value - *rec.d2Edt2_fd)
                                          / std::fabs(*rec.d2Edt2_fd));
        }
        record("h_theorem_identity", worst_ht, tol.h_theorem);
        record("hessian_vs_fd", worst_hess, tol.hessian_vs_fd);
        record("kappa_fisher_inequality", worst_kf, 0.0, true,
               "max over rows of lhs minus allowed slack");
        record("mass_drift", sim.final_state.mass_drift, tol.mass_drift);
        record("entropy_monotone", entropy_down ? 0.0 : 1.0, 0.5, true,
               "0 = decreasing along the run");
        record("second_moment_increasing", moment_up ? 0.0 : 1.0, 0.5);
    }

    // --- metric positivity and symmetry -------------------------------------
    {
        const GridPtr mg = build_uniform_grid(513, cfg.grid_r_max);
        const Density cat[5] = {testdens::gaussian(mg, 1.0), testdens::gaussian(mg, 1.6),
                                testdens::smoothed_ball(mg, 1.0, 0.3),
                                testdens::smoothed_ball(mg, 2.0, 0.5),
                                testdens::gaussian_mixture(mg, 0.7, 1.8, 0.4)};
        std::mt19937_64 rng(cfg.seeds_master);
        double min_ratio = HUGE_VAL, worst_sym = 0.0;
        for (const Density& rho : cat) {
            RadialField prev = testdens::random_smooth_phi(mg, rng);
            for (int k = 0; k < 20; ++k) {
                const RadialField phi = testdens::random_smooth_phi(mg, rng);
                const MetricFormParts parts = metric_form_parts(*mg, rho, phi, phi);
                const double scale = std::max(parts.local, 1e-300);
                min_ratio = std::min(min_ratio, parts.value / scale);
                const double gab = metric_form(*mg, rho, prev, phi);
                const double gba = metric_form(*mg, rho, phi, prev);
                worst_sym = std::max(worst_sym, std::fabs(gab - gba) / scale);
                prev = phi;
            }
        }
        record("metric_positivity", min_ratio, -tol.metric_positivity, false,
               "min of g(phi,phi) / local term over 100 seeded draws");
        record("metric_symmetry", worst_sym, tol.metric_symmetry);
    }

    // --- Hamiltonian conservation and time reversal -------------------------
    {
        const GridPtr gg = build_uniform_grid(513, cfg.grid_r_max);
        const Density rho0 = testdens::gaussian(gg, 1.0);
        RadialField phi0 = make_field(gg, Parity::even, "phi");
        for (int i = 0; i < gg->n; ++i) {
            const double r = gg->r[static_cast<std::size_t>(i)];
            phi0[i] = 0.1 * std::exp(-0.5 * r * r / (1.5 * 1.5));
        }
        GeodesicOptions gopt;
        gopt.t_end = 1.0;
        gopt.dt = 1e-3;
        gopt.sample_every = 100;
        const GeodesicState s0 = make_geodesic_state(rho0, phi0);
        const GeodesicResult fwd = geodesic_integrate(s0, gopt);
        record("hamiltonian_drift", fwd.max_rel_h_drift, tol.hamiltonian_drift);

        GeodesicOptions half = gopt;
        half.t_end = 0.5;
        const GeodesicResult leg1 = geodesic_integrate(s0, half);
        GeodesicState mid = leg1.final_state;
        for (double& v : mid.phi.values) v = -v;
        const GeodesicResult leg2 = geodesic_integrate(mid, half);
        double l1 = 0.0;
        for (int i = 0; i < gg->n; ++i)
            l1 += gg->w[static_cast<std::size_t>(i)]
                  * std::fabs(leg2.final_state.rho.values[static_cast<std::size_t>(i)]
                              - rho0.values()[static_cast<std::size_t>(i)]);
        record("time_reversal_l1", l1, tol.reversal_l1);
    }

    // --- identity div (-Delta)^{-1}(-grad rho) = rho -------------------------
    {
        const std::size_t un = static_cast<std::size_t>(grid->n);
        std::vector<double> drho(un), vnp(un), div(un);
        ddr_raw(*grid, gauss.values().data(), drho.data());
        for (std::size_t i = 0; i < un; ++i) drho[i] = -drho[i];
        vector_potential_raw(*grid, drho.data(), vnp.data());
        div_radial_raw(*grid, vnp.data(), div.data());
        double err = 0.0;
        for (std::size_t i = 0; i < un; ++i)
            err = std::max(err, std::fabs(div[i] - gauss.values()[i]));
        record("oct282_identity", err, tol.oct282_identity);
    }

    // --- W1 machinery ---------------------------------------------------------
    {
        // closed-form CDF cases on a fine internal grid
        const GridPtr wg = build_uniform_grid(65537, 3.0);
        const Density ball1 = [&] {
            RadialField f = make_field(wg, Parity::even);
            const double c = 3.0 / (4.0 * std::numbers::pi);
            for (int i = 0; i < wg->n; ++i)
                f[i] = wg->r[static_cast<std::size_t>(i)] <= 1.0 ? c : 0.0;
            return make_density(std::move(f), true);
        }();
        const Density ball2 = [&] {
            RadialField f = make_field(wg, Parity::even);
            const double c = 3.0 / (32.0 * std::numbers::pi);
            for (int i = 0; i < wg->n; ++i)
                f[i] = wg->r[static_cast<std::size_t>(i)] <= 2.0 ? c : 0.0;
            return make_density(std::move(f), true);
        }();
        record("w1_ball_pair_closed_form", std::fabs(w1_radial(ball1, ball2) - 0.75),
               tol.w1_closed_form);

        const Density point = [&] {
            RadialField f = make_field(wg, Parity::even);
            f[1] = 1.0;
            return make_density(std::move(f), true);
        }();
        record("w1_point_vs_ball_closed_form",
               std::fabs(w1_radial(point, ball2) - 1.5), tol.w1_closed_form);

        // LP oracle agreement on a coarse cloud
        const GridPtr cg = build_uniform_grid(513, 4.0);
        const Density b1 = [&] {
            RadialField f = make_field(cg, Parity::even);
            const double c = 3.0 / (4.0 * std::numbers::pi);
            for (int i = 0; i < cg->n; ++i)
                f[i] = cg->r[static_cast<std::size_t>(i)] <= 1.0 ? c : 0.0;
            return make_density(std::move(f), true);
        }();
        const Density b2 = [&] {
            RadialField f = make_field(cg, Parity::even);
            const double c = 3.0 / (32.0 * std::numbers::pi);
            for (int i = 0; i < cg->n; ++i)
                f[i] = cg->r[static_cast<std::size_t>(i)] <= 2.0 ? c : 0.0;
            return make_density(std::move(f), true);
        }();
        CloudSpec spec;
        spec.pts_per_axis = 11;
        spec.half_extent = 2.2;
        const double lp = w1_lp_oracle(b1, b2, spec);
        const double wr = w1_radial(b1, b2);
        record("w1_lp_oracle_agreement", std::fabs(lp - wr) / wr, tol.w1_lp_agreement);
    }

    return results;
}

} // namespace isolandau
