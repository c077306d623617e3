#pragma once

#include <functional>
#include <string>
#include <vector>

#include "isolandau/field.hpp"

namespace isolandau {

struct StepControl {
    double cfl_safety = 0.5;        // in (0, 1]
    double dt_max = 1e-2;
    double rho_floor = 0.0;         // values below this clip to 0 after a step
    double mass_drift_budget = 1e-5;
};

struct FlowState {
    Density rho;
    double t = 0.0;
    long step_count = 0;
    double mass_drift = 0.0;
    double mass0 = 0.0;
};

FlowState make_flow_state(Density rho);

enum class RhsForm { div_form, nondiv };

// dt rho = div(L rho * grad rho - rho * grad L rho)    (divergence form)
RadialField landau_rhs_divform(const RadialGrid& grid, const Density& rho);
// dt rho = L rho * Delta rho + alpha * rho^2           (Krieger-Strain form)
RadialField landau_rhs_nondiv(const RadialGrid& grid, const Density& rho, double alpha);

// Raw evaluation on a value array (RK stages may carry small undershoots;
// the potential clamps them internally).
void landau_rhs_raw(const RadialGrid& grid, const double* rho, double* out,
                    RhsForm form, double alpha);

// dt = cfl_safety * h^2 / (2 max_i L rho + eps), capped at dt_max; L rho is
// the effective diffusion coefficient.
double cfl_dt(const RadialGrid& grid, const Density& rho, const StepControl& ctrl);

// One classical RK4 step of the given size; clips below rho_floor, updates
// mass bookkeeping, and aborts with NumericalError on NaN/Inf or when the
// mass drift exceeds the budget.
void step_rk4(FlowState& state, const StepControl& ctrl, RhsForm form, double alpha,
              double dt);

struct TraceRow {
    double t = 0.0;
    long step = 0;
    Density rho;
};

struct FlowTrace {
    std::vector<TraceRow> rows;          // one per output time, includes t = 0
    bool aborted = false;
    std::string error;
    double error_t = 0.0;
};

struct SimulateOptions {
    RhsForm form = RhsForm::div_form;
    double alpha = 1.0;
    double t_end = 1.0;
    int output_every = 50;               // steps between trace rows
    StepControl ctrl;
    std::vector<double> snapshot_times;  // densities returned separately
};

struct SimulateResult {
    FlowTrace trace;
    std::vector<TraceRow> snapshots;
    FlowState final_state;
};

// Advances to t_end, emitting a trace row every output_every steps and a
// snapshot at each requested time (taken at the first step reaching it).
// Deterministic for fixed options and backend. Step errors abort the run
// and are recorded on the partial trace instead of propagating.
SimulateResult simulate(Density rho0, const SimulateOptions& opts);

} // namespace isolandau
