#include "isolandau/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isolandau/errors.hpp"

namespace isolandau {

using ordered_json = nlohmann::ordered_json;

std::string snapshot_json(const Density& rho, double t) {
    ordered_json j;
    j["version"] = 1;
    j["n"] = rho.grid()->n;
    j["r_max"] = rho.grid()->r_max;
    j["t"] = t;
    j["values"] = rho.values();
    return j.dump();
}

Density snapshot_from_json(const std::string& text, const GridPtr& grid) {
    const auto j = ordered_json::parse(text);
    if (j.at("n").get<int>() != grid->n)
        throw UsageError("snapshot: node count does not match grid");
    const double r_max = j.at("r_max").get<double>();
    if (std::abs(r_max - grid->r_max) > 1e-12 * grid->r_max)
        throw UsageError("snapshot: r_max does not match grid");
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    return make_density(make_field(grid, Parity::even, std::move(values), "density"));
}

std::string geodesic_path_json(const std::vector<GeodesicSample>& samples) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : samples) {
        ordered_json j;
        j["t"] = s.t;
        j["rho"] = s.rho;
        j["phi"] = s.phi;
        arr.push_back(std::move(j));
    }
    return arr.dump();
}

std::string shooting_report_json(const ShootingResult& result) {
    ordered_json j;
    j["wk_estimate"] = result.wk_estimate;
    j["residual"] = result.terminal_residual;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("io: cannot write '" + path + "'");
    out << content;
    if (!out) throw UsageError("io: short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("io: cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace isolandau
