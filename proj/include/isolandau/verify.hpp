#pragma once

#include <random>
#include <string>
#include <vector>

#include "isolandau/config.hpp"
#include "isolandau/field.hpp"

namespace isolandau {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string note;
};

// The identity suite behind `isolandau verify`: dissipation triple
// agreement, Onsager/RHS consistency, Hessian vs finite differences, metric
// positivity and symmetry, Hamiltonian conservation and time reversal, the
// div (-Delta)^{-1}(-grad rho) = rho identity, and the W1 oracle cross-check.
// Tolerances come from the central table in tolerances.hpp.
std::vector<CheckResult> run_verify_suite(const SimConfig& cfg);

namespace testdens {

// catalog of smooth positive test densities
Density gaussian(const GridPtr& grid, double sigma);
Density smoothed_ball(const GridPtr& grid, double radius, double edge_width);
Density gaussian_mixture(const GridPtr& grid, double sigma1, double sigma2, double weight1);

// rescaling rho_lambda(x) = lambda^3 rho(lambda x) realized on a matched grid
// (same n, r_max / lambda)
Density rescaled(const Density& rho, const GridPtr& target_grid, double lambda);

// seeded random smooth EVEN potential (sum of symmetrized Gaussian bumps)
RadialField random_smooth_phi(const GridPtr& grid, std::mt19937_64& rng);

} // namespace testdens

} // namespace isolandau
