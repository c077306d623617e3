#pragma once

#include <string>
#include <vector>

#include "isolandau/field.hpp"
#include "isolandau/geometry.hpp"

namespace isolandau {

// Snapshot schema: {version, n, r_max, t, values:[...]} with values in
// ascending node order.
std::string snapshot_json(const Density& rho, double t);
Density snapshot_from_json(const std::string& text, const GridPtr& grid);

// Geodesic path export: JSON array of {t, rho, phi}.
std::string geodesic_path_json(const std::vector<GeodesicSample>& samples);

// Shooting report: {wk_estimate, residual, iterations, converged}.
std::string shooting_report_json(const ShootingResult& result);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace isolandau
