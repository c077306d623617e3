#pragma once

#include <string>
#include <vector>

#include "isolandau/field.hpp"

namespace isolandau {

// --- Onsager operator and metric tensor ------------------------------------

// K phi = div( rho Lrho grad phi - rho (-Delta)^{-1}(rho grad phi) ),
// the nonlocal mobility applied to a potential. Returns -(sigma) sign
// convention of the paper: this is K phi itself.
RadialField apply_onsager(const RadialGrid& grid, const Density& rho,
                          const RadialField& phi);

struct MetricFormParts {
    double value = 0.0;   // g_K(phi1, phi2)
    double local = 0.0;   // int rho Lrho grad phi1 . grad phi2
    double nonlocal = 0.0; // int (rho grad phi1) . (-Delta)^{-1}(rho grad phi2), symmetrized
};
// g_K(phi1, phi2) = local - nonlocal. The nonlocal part is evaluated in both
// argument orders and averaged, so the form is symmetric to the last bit.
MetricFormParts metric_form_parts(const RadialGrid& grid, const Density& rho,
                                  const RadialField& phi1, const RadialField& phi2);
double metric_form(const RadialGrid& grid, const Density& rho, const RadialField& phi1,
                   const RadialField& phi2);

// H(rho, phi) = (1/2) g_K(phi, phi).
double hamiltonian(const RadialGrid& grid, const Density& rho, const RadialField& phi);

struct SolveOptions {
    double rtol = 1e-8;
    int max_iterations = 5000;
};
// Solves -K phi = sigma for mean-zero sigma by preconditioned CG on the
// quadrature-weighted symmetrization of the operator, gauge-fixing phi to
// rho-weighted mean zero. Throws on non-mean-zero sigma; non-convergence
// raises NumericalError with the best residual attached.
RadialField solve_potential(const RadialGrid& grid, const Density& rho,
                            const RadialField& sigma, const SolveOptions& opts = {});

// --- Geodesics --------------------------------------------------------------

struct GeodesicState {
    RadialField rho;   // built from a Density; may undershoot during evolution
    RadialField phi;   // gauge-fixed to rho-weighted mean zero at initialization
    double t = 0.0;
    double hamiltonian_0 = 0.0;
};
GeodesicState make_geodesic_state(const Density& rho0, RadialField phi0);

// Spatial discretizations of the co-geodesic flow:
//  * direct: the equations as written (div / grad / Green stencils);
//  * adjoint: right-hand sides assembled as exact partial derivatives of the
//    discrete Hamiltonian, so H is conserved by the spatial scheme and the
//    only drift left is the RK4 time error.
enum class GeodesicScheme { direct, adjoint };

// dt rho = -K_rho phi
// dt phi = -(1/2)(|grad phi|^2 Lrho + (-Delta)^{-1}(rho |grad phi|^2))
//          + grad phi . (-Delta)^{-1}(rho grad phi)
void geodesic_rhs_raw(const RadialGrid& grid, const double* rho, const double* phi,
                      double* drho, double* dphi, GeodesicScheme scheme);
// Spec surface (direct scheme) on a full state.
std::pair<RadialField, RadialField> geodesic_rhs(const RadialGrid& grid,
                                                 const GeodesicState& state);

// Value of the conserved discrete Hamiltonian used by the adjoint scheme.
double hamiltonian_raw(const RadialGrid& grid, const double* rho, const double* phi);

struct GeodesicSample {
    double t = 0.0;
    std::vector<double> rho;
    std::vector<double> phi;
};
struct GeodesicOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    int sample_every = 50;
    GeodesicScheme scheme = GeodesicScheme::adjoint;
    double negative_mass_abort = 1e-3; // abort when -int rho_- / int rho_+ exceeds this
};
struct GeodesicResult {
    std::vector<GeodesicSample> samples; // includes t = 0 and t_end
    double h0 = 0.0;
    double max_rel_h_drift = 0.0;
    GeodesicState final_state;
};
GeodesicResult geodesic_integrate(const GeodesicState& s0, const GeodesicOptions& opts);

struct PathActionResult {
    double action = 0.0;            // int_0^1 g(phi, phi) dt, the W_K^2 normalization
    double max_continuity_residual = 0.0;
    bool continuity_ok = true;
};
// Time-trapezoid of the metric form along a sampled path; checks the
// discrete continuity equation and flags (does not fail) violations.
PathActionResult path_action(const GridPtr& grid, const std::vector<GeodesicSample>& path,
                             double continuity_tol = 5e-2);

// --- W_K shooting estimator and W_1 ------------------------------------------

struct ShootingOptions {
    double rtol = 1e-4;        // terminal L1 residual target
    int max_iterations = 60;
    double dt = 2e-3;          // geodesic integration step
    int basis_size = 12;
    GeodesicScheme scheme = GeodesicScheme::adjoint;
};
struct ShootingResult {
    double wk_estimate = 0.0;  // sqrt(2 H(rho0, phi0)) when converged
    RadialField phi0;
    double terminal_residual = 0.0; // L1 norm of rho(1) - rho1
    int iterations = 0;
    bool converged = false;
};
// Boundary-value estimate of W_K by damped Gauss-Newton shooting on a fixed
// 12-term Gaussian radial basis for phi0. EXPERIMENTAL: upper-bound flavored;
// global optimality is not claimed.
ShootingResult wk_distance_shooting(const Density& rho0, const Density& rho1,
                                    const ShootingOptions& opts = {});

// W1 between radial measures via the CDF distance int |F0 - F1| dr.
double w1_radial(const Density& rho0, const Density& rho1);

// Brute-force transport LP oracle on a cell-centered Cartesian cloud.
struct CloudSpec {
    int pts_per_axis = 11;     // resource error above 15
    double half_extent = 4.0;  // cloud covers [-L, L]^3
};
double w1_lp_oracle(const Density& rho0, const Density& rho1, const CloudSpec& spec);

struct DistancePair {
    double w1 = 0.0;
    double wk = 0.0;
    bool converged = false;
};
struct InequalityReport {
    std::vector<double> ratios; // W1 / W_K per pair, 0 for identical endpoints
    double max_ratio = 0.0;     // empirical lower bound on the constant C
};
InequalityReport w1_wk_inequality_report(const std::vector<DistancePair>& pairs);

// --- Transport LP (exact solver used by the oracle) -------------------------

struct TransportProblem {
    std::vector<double> supply;
    std::vector<double> demand;
    std::vector<std::array<double, 3>> src;
    std::vector<std::array<double, 3>> dst;
};
// Exact minimum-cost transport with Euclidean ground cost, by the
// transportation simplex with epsilon-perturbed supplies against degeneracy.
double solve_transport_min_cost(const TransportProblem& problem);

} // namespace isolandau
