#pragma once

#include <array>
#include <vector>

#include "isolandau/field.hpp"

namespace isolandau {

// Result of an inverse-Laplacian solve. total_mass_used is the integral of
// the (clamped) source in the scalar case; in the vector case it holds the
// far-field moment 4*pi*int_0^rmax s^3 g(s) ds that controls the r^-2 tail.
struct PotentialResult {
    RadialField u;
    double total_mass_used = 0.0;
};

// L rho = (-Delta)^{-1} rho for nonnegative radial data, via the radial
// Green's function u(r) = (1/r) int_0^r s^2 rho ds + int_r^rmax s rho ds.
// Small negative entries (time-stepping undershoot) are clamped to zero
// inside the integrals only.
PotentialResult newtonian_potential(const RadialGrid& grid, const Density& rho);

// Componentwise inverse Laplacian of a radial vector field g e_r: returns
// h (ODD) with -(h'' + 2h'/r - 2h/r^2) = g,
//   h(r) = (r/3) int_r^rmax g ds + (1/(3 r^2)) int_0^r s^3 g ds.
PotentialResult vector_newtonian_potential(const RadialGrid& grid, const RadialField& g);

// Raw O(n) passes on value arrays; clamp_negative mirrors the Density path.
void coulomb_potential_raw(const RadialGrid& grid, const double* rho, double* out,
                           bool clamp_negative, double* mass_out = nullptr);
void vector_potential_raw(const RadialGrid& grid, const double* g, double* out,
                          double* moment_out = nullptr);

// Transposes of the two discrete solve operators with respect to the plain
// Euclidean pairing on node values (the solvers are lower/upper cumulative
// sums, so the transposes are reversed cumulative sums). Used by the
// Hamiltonian geodesic right-hand side.
void coulomb_potential_transpose_raw(const RadialGrid& grid, const double* y, double* out);
void vector_potential_transpose_raw(const RadialGrid& grid, const double* y, double* out);

// Brute-force free-space Riesz oracle on a small Cartesian cloud:
// sum_j rho_j * cell_volume / (4 pi |x - y_j|), the singular self-cell
// replaced by the equal-volume ball average rho_j * r_b^2 / 2. Test-scale
// only; clouds above 40^3 points raise a resource error.
struct CloudPoint {
    std::array<double, 3> x;
    double rho;
};
std::vector<double> potential_oracle_3d(const std::vector<CloudPoint>& cloud,
                                        double cell_volume,
                                        const std::vector<std::array<double, 3>>& queries);

} // namespace isolandau
