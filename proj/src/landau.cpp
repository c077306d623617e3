#include "isolandau/landau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isolandau/errors.hpp"
#include "isolandau/kernels.hpp"
#include "isolandau/potential.hpp"

namespace isolandau {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace

FlowState make_flow_state(Density rho) {
    FlowState s;
    s.mass0 = rho.mass;
    s.rho = std::move(rho);
    return s;
}

void landau_rhs_raw(const RadialGrid& grid, const double* rho, double* out,
                    RhsForm form, double alpha) {
    const int n = grid.n;
    std::vector<double> pot(static_cast<std::size_t>(n));
    coulomb_potential_raw(grid, rho, pot.data(), true);

    if (form == RhsForm::div_form) {
        std::vector<double> drho(static_cast<std::size_t>(n)),
            dpot(static_cast<std::size_t>(n)), flux(static_cast<std::size_t>(n));
        ddr_raw(grid, rho, drho.data());
        ddr_raw(grid, pot.data(), dpot.data());
        for (int i = 0; i < n; ++i)
            flux[static_cast<std::size_t>(i)] =
                pot[static_cast<std::size_t>(i)] * drho[static_cast<std::size_t>(i)]
                - rho[i] * dpot[static_cast<std::size_t>(i)];
        flux[0] = 0.0;
        div_radial_raw(grid, flux.data(), out);
    } else {
        std::vector<double> lap(static_cast<std::size_t>(n));
        laplacian_radial_raw(grid, rho, lap.data());
        for (int i = 0; i < n; ++i)
            out[i] = pot[static_cast<std::size_t>(i)] * lap[static_cast<std::size_t>(i)]
                     + alpha * rho[i] * rho[i];
    }
}

RadialField landau_rhs_divform(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "landau_rhs_divform");
    RadialField out = make_field(rho.grid(), Parity::even);
    landau_rhs_raw(grid, rho.values().data(), out.values.data(), RhsForm::div_form, 1.0);
    return out;
}

RadialField landau_rhs_nondiv(const RadialGrid& grid, const Density& rho, double alpha) {
    require_same_grid(grid, rho.field, "landau_rhs_nondiv");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ConfigError("landau_rhs_nondiv: alpha must lie in (0, 1]");
    RadialField out = make_field(rho.grid(), Parity::even);
    landau_rhs_raw(grid, rho.values().data(), out.values.data(), RhsForm::nondiv, alpha);
    return out;
}

double cfl_dt(const RadialGrid& grid, const Density& rho, const StepControl& ctrl) {
    if (!(ctrl.cfl_safety > 0.0) || ctrl.cfl_safety > 1.0)
        throw ConfigError("cfl_dt: cfl_safety must lie in (0, 1]");
    std::vector<double> pot(static_cast<std::size_t>(grid.n));
    coulomb_potential_raw(grid, rho.values().data(), pot.data(), true);
    const double lmax = kernels::ops().max_val(pot.data(), pot.size());
    const double eps = std::numeric_limits<double>::epsilon();
    const double dt = ctrl.cfl_safety * grid.h * grid.h / (2.0 * std::max(lmax, 0.0) + eps);
    return std::min(dt, ctrl.dt_max);
}

void step_rk4(FlowState& state, const StepControl& ctrl, RhsForm form, double alpha,
              double dt) {
    const RadialGrid& grid = *state.rho.grid();
    const std::size_t n = static_cast<std::size_t>(grid.n);
    const auto& ops = kernels::ops();

    const std::vector<double>& y0 = state.rho.values();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n), ynew(n);

    landau_rhs_raw(grid, y0.data(), k1.data(), form, alpha);
    ops.axpby(1.0, y0.data(), 0.5 * dt, k1.data(), stage.data(), n);
    landau_rhs_raw(grid, stage.data(), k2.data(), form, alpha);
    ops.axpby(1.0, y0.data(), 0.5 * dt, k2.data(), stage.data(), n);
    landau_rhs_raw(grid, stage.data(), k3.data(), form, alpha);
    ops.axpby(1.0, y0.data(), dt, k3.data(), stage.data(), n);
    landau_rhs_raw(grid, stage.data(), k4.data(), form, alpha);
    ops.rk4_combine(y0.data(), k1.data(), k2.data(), k3.data(), k4.data(), dt,
                    ynew.data(), n);

    if (!all_finite(ynew))
        throw NumericalError("step_rk4: non-finite state", state.step_count, state.t);

    for (double& v : ynew)
        if (v < ctrl.rho_floor) v = 0.0;

    RadialField f = make_field(state.rho.grid(), Parity::even, std::move(ynew));
    const double mass = integrate(grid, f);
    if (!(mass > 0.0))
        throw NumericalError("step_rk4: mass collapsed to zero", state.step_count, state.t);
    state.rho.field = std::move(f);
    state.rho.mass = mass;
    state.t += dt;
    state.step_count += 1;
    state.mass_drift = std::fabs(mass - state.mass0);
    if (state.mass_drift > ctrl.mass_drift_budget)
        throw NumericalError("step_rk4: mass drift exceeds budget", state.step_count,
                             state.t);
}

SimulateResult simulate(Density rho0, const SimulateOptions& opts) {
    if (opts.output_every < 1) throw ConfigError("simulate: output.every must be >= 1");
    if (opts.t_end < 0.0) throw ConfigError("simulate: t_end must be nonnegative");

    SimulateResult res;
    FlowState state = make_flow_state(std::move(rho0));

    std::vector<double> pending = opts.snapshot_times;
    std::sort(pending.begin(), pending.end());

    auto take_snapshots = [&]() {
        while (!pending.empty() && state.t >= pending.front() - 1e-12) {
            res.snapshots.push_back({state.t, state.step_count, state.rho});
            pending.erase(pending.begin());
        }
    };

    res.trace.rows.push_back({state.t, state.step_count, state.rho});
    take_snapshots();

    try {
        while (state.t < opts.t_end) {
            double dt = cfl_dt(*state.rho.grid(), state.rho, opts.ctrl);
            if (state.t + dt > opts.t_end) dt = opts.t_end - state.t;
            step_rk4(state, opts.ctrl, opts.form, opts.alpha, dt);
            const bool last = state.t >= opts.t_end - 1e-15;
            if (state.step_count % opts.output_every == 0 || last)
                res.trace.rows.push_back({state.t, state.step_count, state.rho});
            take_snapshots();
        }
    } catch (const NumericalError& err) {
        res.trace.aborted = true;
        res.trace.error = err.what();
        res.trace.error_t = state.t;
    }

    res.final_state = std::move(state);
    return res;
}

} // namespace isolandau
