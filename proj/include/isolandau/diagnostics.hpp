#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isolandau/field.hpp"
#include "isolandau/landau.hpp"

namespace isolandau {

// One time-stamped row of every monitored functional. Finite-difference
// entries are absent at trace endpoints.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double entropy = 0.0;
    std::optional<double> dEdt_fd;
    double dissipation = 0.0;
    double second_moment = 0.0;
    double kappa = 0.0;
    double fisher_weighted = 0.0;
    double sup_rho = 0.0;
    double sup_Lrho = 0.0;
    double hessian_value = 0.0;
    std::optional<double> d2Edt2_fd;
    double cube_norm = 0.0;
    double eqnpos_value = 0.0;
    double rate_alpha = 0.0;
};

// Boltzmann-Shannon entropy int rho log rho with 0 log 0 = 0.
double entropy(const RadialGrid& grid, const Density& rho);

// Closed-form dissipation D = int L rho |grad rho|^2 / rho - int rho^2;
// along exact solutions dE/dt = -D. Nodes with rho below the guard
// contribute zero to the first integrand.
double dissipation_closed(const RadialGrid& grid, const Density& rho);

// Direct double quadrature of the symmetrized Coulomb-kernel dissipation
// with analytic angular averages. O(n^2); grids above 1025 nodes raise a
// resource error. Test oracle for dissipation_closed.
double dissipation_double_oracle(const RadialGrid& grid, const Density& rho);

double kappa_of_second_moment(double second_moment);
double fisher_weighted_functional(const RadialGrid& grid, const Density& rho);

struct KappaFisherResult {
    double lhs = 0.0;
    double kappa = 0.0;
    double fisher = 0.0;
    bool holds = false;
};
// lhs = dEdt_fd + kappa * int |grad sqrt(rho)|^2 / (1+|x|);
// holds when lhs <= tol_scale * |dEdt_fd|.
KappaFisherResult kappa_fisher_check(const RadialGrid& grid, const Density& rho,
                                     double dEdt_fd, double tol_scale = 1e-6);

// Second time derivative of the entropy along the flow, as a closed-form
// functional of the state (Phi = -log rho, w = dt rho the flow right-hand
// side):
//   total = 2 int w^2 / rho
//           - int w Lrho |grad Phi|^2
//           + 2 int w grad Phi . (-Delta)^{-1}(rho grad Phi)
//           - int w (-Delta)^{-1}(rho |grad Phi|^2)
// Each term is lambda^6-covariant under rho_lambda(x) = lambda^3 rho(lambda x).
struct HessianTerms {
    double total = 0.0;
    double term1 = 0.0, term2 = 0.0, term3 = 0.0, term4 = 0.0;
};
HessianTerms hessian_entropy(const RadialGrid& grid, const Density& rho);

// int (2 gamma rho - |grad rho|^2 Lrho / rho^2)
//     (rho grad Phi . (-Delta)^{-1}(rho grad Phi) + 3 rho^2) dx,
// gamma restricted to (0, 1/7).
double eqnpos_check(const RadialGrid& grid, const Density& rho, double gamma);

struct Moments {
    double mass = 0.0;
    double second_moment = 0.0;
    double cube_norm = 0.0;
    double sup_rho = 0.0;
    double sup_Lrho = 0.0;
};
Moments moments_and_sups(const RadialGrid& grid, const Density& rho);

// Per-row diagnostics for a flow trace; finite differences of the entropy
// use non-uniform 3-point stencils at the output cadence.
std::vector<DiagnosticsRecord> assemble_records(const FlowTrace& trace, double gamma);

struct RateBoundRow {
    double t = 0.0;
    double dEdt_fd = 0.0;
    double tail_cube_integral = 0.0; // trapezoid of cube_norm over [t, t_end]
    double threshold = 0.0;          // -alpha * tail + slack
    double margin = 0.0;             // threshold - dEdt_fd
    bool eqnpos_ok = false;          // assumption holds at this row
    bool holds = false;
};
struct RateBoundReport {
    double rate_alpha = 0.0;
    std::vector<RateBoundRow> rows;
    bool all_asserted_hold = true;   // rows failing the assumption are reported only
    bool any_assumption_violated = false;
};
RateBoundReport rate_bound_check(const std::vector<DiagnosticsRecord>& records,
                                 double gamma, double slack = 1e-6);

struct SupnormFit {
    double s1 = 0.0, c1 = 0.0; // ||rho||_inf   <= c1 (1/t+1)^s1
    double s2 = 0.0, c2 = 0.0; // ||Lrho||_inf  <= c2 (1/t+1)^s2
};
SupnormFit supnorm_fit(const std::vector<DiagnosticsRecord>& records, double t_lo,
                       double t_hi);

// Largest value of (int rho phi^2 - eps int Lrho |grad phi|^2) / int phi^2
// over the probe family, floored at zero; certifies the eps-Poincare
// constant for the probed family only.
double poincare_probe(const RadialGrid& grid, const Density& rho,
                      const std::vector<RadialField>& phis, double eps);
std::vector<RadialField> default_poincare_family(const GridPtr& grid);

// CSV with the exact trace schema; absent finite differences are emitted
// as empty fields.
std::string trace_csv(const std::vector<DiagnosticsRecord>& records);
extern const char* const kTraceCsvHeader;

} // namespace isolandau
