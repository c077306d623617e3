#pragma once

namespace isolandau {

// Central tolerance table for the verify suite and CLI reports. Values are
// relative unless noted. Each entry is used by exactly one named check in
// cmd_verify / the acceptance suite; nothing here is tuned per run.
struct VerifyTolerances {
    // dissipation triple agreement (closed form vs double quadrature vs
    // metric form on log rho), pairwise relative at n = 513
    double dissipation_triple = 1e-2;
    // |apply_onsager(rho, log rho) - landau_rhs| / ||landau_rhs||_inf
    double gradient_flow_consistency = 1e-3;
    // |hessian_entropy - d2E/dt2| / |d2E/dt2| along the reference run
    double hessian_vs_fd = 1e-2;
    // metric positivity floor, units of the local (diagonal) term
    double metric_positivity = 1e-10;
    // metric symmetry defect, units of the local term
    double metric_symmetry = 1e-12;
    // geodesic Hamiltonian conservation, relative drift
    double hamiltonian_drift = 1e-6;
    // time-reversal L1 return error
    double reversal_l1 = 1e-4;
    // identity div (-Delta)^{-1}(-grad rho) = rho, max-norm
    double oct282_identity = 1e-4;
    // |dEdt_fd + dissipation| / dissipation along the reference run
    double h_theorem = 1e-3;
    // kappa-Fisher inequality slack, units of |dEdt_fd|
    double kappa_fisher_slack = 1e-6;
    // mass drift budget over the reference run (absolute)
    double mass_drift = 1e-6;
    // per-row slack for entropy decrease / second-moment increase (absolute)
    double monotonicity_slack = 1e-10;
    // w1_radial closed-form cases (absolute)
    double w1_closed_form = 1e-4;
    // w1_radial vs LP oracle (relative)
    double w1_lp_agreement = 5e-2;
    // W1/WK ratio stability across resolutions (relative)
    double ratio_stability = 1e-1;
    // shooting round-trip recovery of sqrt(2H) (relative)
    double shooting_round_trip = 1e-2;
    // scaling laws: D lambda^3, Hessian lambda^6 (relative)
    double scaling_laws = 1e-2;
    // rate bound slack (absolute, adds to -alpha * tail integral)
    double rate_bound_slack = 1e-6;
    // held-out sup-norm bound violation allowance (relative)
    double supnorm_holdout = 5e-2;
};

inline const VerifyTolerances& verify_tolerances() {
    static const VerifyTolerances tol{};
    return tol;
}

} // namespace isolandau
