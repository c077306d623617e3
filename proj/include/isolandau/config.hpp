#pragma once

#include <string>
#include <vector>

#include "isolandau/field.hpp"

namespace isolandau {

// All run parameters, filled from `section.key = value` config text.
// Unknown keys are rejected; invariant violations name the offending key.
struct SimConfig {
    // grid
    int grid_n = 1025;
    double grid_r_max = 12.0;
    // initial datum
    std::string init_kind = "gaussian"; // gaussian | ball | file
    double init_sigma = 1.0;
    double init_radius = 1.0;
    std::string init_path;
    bool init_normalize = true;
    // flow
    double flow_alpha = 1.0;
    std::string flow_form = "div"; // div | nondiv
    // time stepping
    double time_t_end = 1.0;
    double time_cfl_safety = 0.5;
    double time_dt_max = 1e-2;
    double time_rho_floor = 0.0;
    double time_mass_drift_budget = 1e-5;
    // output
    int output_every = 50;
    std::string output_dir = "out";
    std::vector<double> output_snapshots; // times; empty = {0, t_end}
    // diagnostics
    double diag_gamma = 0.1;
    double diag_poincare_eps = 0.1;
    // seeds
    unsigned long seeds_master = 12345;
    // geodesic command
    double geodesic_t_end = 1.0;
    double geodesic_dt = 1e-3;
    int geodesic_sample_every = 50;
    std::string geodesic_phi0_kind = "gaussian_bump"; // zero | gaussian_bump
    double geodesic_phi0_amplitude = 0.1;
    double geodesic_phi0_width = 1.0;
    // distance command
    std::string distance_target_kind = "gaussian";
    double distance_target_sigma = 1.1;
    double distance_target_radius = 1.0;
    std::string distance_target_path;
    double distance_rtol = 1e-4;
    int distance_max_iters = 60;
    double distance_dt = 2e-3;
};

SimConfig parse_config(const std::string& text);
SimConfig load_config_file(const std::string& path);

// The resolved configuration in file format (documented defaults table).
std::string resolved_config_text(const SimConfig& cfg);

// Initial density per init.* (or the distance target per target fields).
Density build_initial_density(const GridPtr& grid, const std::string& kind, double sigma,
                              double radius, const std::string& path, bool normalize);
Density build_density_from_config(const SimConfig& cfg, const GridPtr& grid);

} // namespace isolandau
