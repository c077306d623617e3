#include "isolandau/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "isolandau/errors.hpp"

namespace isolandau {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: key '" + key + "' expects a boolean, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

} // namespace

SimConfig parse_config(const std::string& text) {
    SimConfig cfg;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> table = {
        {"grid.n", [&](const std::string& k, const std::string& v) { cfg.grid_n = static_cast<int>(parse_int(k, v)); }},
        {"grid.r_max", [&](const std::string& k, const std::string& v) { cfg.grid_r_max = parse_double(k, v); }},
        {"init.kind", [&](const std::string&, const std::string& v) { cfg.init_kind = v; }},
        {"init.sigma", [&](const std::string& k, const std::string& v) { cfg.init_sigma = parse_double(k, v); }},
        {"init.radius", [&](const std::string& k, const std::string& v) { cfg.init_radius = parse_double(k, v); }},
        {"init.path", [&](const std::string&, const std::string& v) { cfg.init_path = v; }},
        {"init.normalize", [&](const std::string& k, const std::string& v) { cfg.init_normalize = parse_bool(k, v); }},
        {"flow.alpha", [&](const std::string& k, const std::string& v) { cfg.flow_alpha = parse_double(k, v); }},
        {"flow.form", [&](const std::string&, const std::string& v) { cfg.flow_form = v; }},
        {"time.t_end", [&](const std::string& k, const std::string& v) { cfg.time_t_end = parse_double(k, v); }},
        {"time.cfl_safety", [&](const std::string& k, const std::string& v) { cfg.time_cfl_safety = parse_double(k, v); }},
        {"time.dt_max", [&](const std::string& k, const std::string& v) { cfg.time_dt_max = parse_double(k, v); }},
        {"time.rho_floor", [&](const std::string& k, const std::string& v) { cfg.time_rho_floor = parse_double(k, v); }},
        {"time.mass_drift_budget", [&](const std::string& k, const std::string& v) { cfg.time_mass_drift_budget = parse_double(k, v); }},
        {"output.every", [&](const std::string& k, const std::string& v) { cfg.output_every = static_cast<int>(parse_int(k, v)); }},
        {"output.dir", [&](const std::string&, const std::string& v) { cfg.output_dir = v; }},
        {"output.snapshots", [&](const std::string& k, const std::string& v) { cfg.output_snapshots = parse_double_list(k, v); }},
        {"diag.gamma", [&](const std::string& k, const std::string& v) { cfg.diag_gamma = parse_double(k, v); }},
        {"diag.poincare_eps", [&](const std::string& k, const std::string& v) { cfg.diag_poincare_eps = parse_double(k, v); }},
        {"seeds.master", [&](const std::string& k, const std::string& v) { cfg.seeds_master = static_cast<unsigned long>(parse_int(k, v)); }},
        {"geodesic.t_end", [&](const std::string& k, const std::string& v) { cfg.geodesic_t_end = parse_double(k, v); }},
        {"geodesic.dt", [&](const std::string& k, const std::string& v) { cfg.geodesic_dt = parse_double(k, v); }},
        {"geodesic.sample_every", [&](const std::string& k, const std::string& v) { cfg.geodesic_sample_every = static_cast<int>(parse_int(k, v)); }},
        {"geodesic.phi0_kind", [&](const std::string&, const std::string& v) { cfg.geodesic_phi0_kind = v; }},
        {"geodesic.phi0_amplitude", [&](const std::string& k, const std::string& v) { cfg.geodesic_phi0_amplitude = parse_double(k, v); }},
        {"geodesic.phi0_width", [&](const std::string& k, const std::string& v) { cfg.geodesic_phi0_width = parse_double(k, v); }},
        {"distance.target_kind", [&](const std::string&, const std::string& v) { cfg.distance_target_kind = v; }},
        {"distance.target_sigma", [&](const std::string& k, const std::string& v) { cfg.distance_target_sigma = parse_double(k, v); }},
        {"distance.target_radius", [&](const std::string& k, const std::string& v) { cfg.distance_target_radius = parse_double(k, v); }},
        {"distance.target_path", [&](const std::string&, const std::string& v) { cfg.distance_target_path = v; }},
        {"distance.rtol", [&](const std::string& k, const std::string& v) { cfg.distance_rtol = parse_double(k, v); }},
        {"distance.max_iters", [&](const std::string& k, const std::string& v) { cfg.distance_max_iters = static_cast<int>(parse_int(k, v)); }},
        {"distance.dt", [&](const std::string& k, const std::string& v) { cfg.distance_dt = parse_double(k, v); }},
    };

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno)
                              + " is not 'section.key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
        it->second(key, value);
    }

    // invariants
    if (cfg.grid_n < 16) throw ConfigError("config: grid.n must be >= 16");
    if (!(cfg.grid_r_max > 0.0)) throw ConfigError("config: grid.r_max must be positive");
    if (cfg.init_kind != "gaussian" && cfg.init_kind != "ball" && cfg.init_kind != "file")
        throw ConfigError("config: init.kind must be gaussian, ball or file");
    if (!(cfg.init_sigma > 0.0)) throw ConfigError("config: init.sigma must be positive");
    if (!(cfg.init_radius > 0.0)) throw ConfigError("config: init.radius must be positive");
    if (cfg.flow_form != "div" && cfg.flow_form != "nondiv")
        throw ConfigError("config: flow.form must be div or nondiv");
    if (!(cfg.flow_alpha > 0.0) || cfg.flow_alpha > 1.0)
        throw ConfigError("config: flow.alpha must lie in (0, 1]");
    if (cfg.time_t_end < 0.0) throw ConfigError("config: time.t_end must be nonnegative");
    if (!(cfg.time_cfl_safety > 0.0) || cfg.time_cfl_safety > 1.0)
        throw ConfigError("config: time.cfl_safety must lie in (0, 1]");
    if (!(cfg.time_dt_max > 0.0)) throw ConfigError("config: time.dt_max must be positive");
    if (cfg.time_rho_floor < 0.0)
        throw ConfigError("config: time.rho_floor must be nonnegative");
    if (!(cfg.time_mass_drift_budget > 0.0))
        throw ConfigError("config: time.mass_drift_budget must be positive");
    if (cfg.output_every < 1) throw ConfigError("config: output.every must be >= 1");
    if (!(cfg.diag_gamma > 0.0 && cfg.diag_gamma < 1.0 / 7.0))
        throw ConfigError("config: diag.gamma must lie in (0, 1/7)");
    if (!(cfg.diag_poincare_eps > 0.0))
        throw ConfigError("config: diag.poincare_eps must be positive");
    if (!(cfg.geodesic_dt > 0.0)) throw ConfigError("config: geodesic.dt must be positive");
    if (cfg.geodesic_sample_every < 1)
        throw ConfigError("config: geodesic.sample_every must be >= 1");
    if (cfg.geodesic_phi0_kind != "zero" && cfg.geodesic_phi0_kind != "gaussian_bump")
        throw ConfigError("config: geodesic.phi0_kind must be zero or gaussian_bump");
    if (!(cfg.geodesic_phi0_width > 0.0))
        throw ConfigError("config: geodesic.phi0_width must be positive");
    if (cfg.distance_target_kind != "gaussian" && cfg.distance_target_kind != "ball"
        && cfg.distance_target_kind != "file")
        throw ConfigError("config: distance.target_kind must be gaussian, ball or file");
    if (!(cfg.distance_rtol > 0.0)) throw ConfigError("config: distance.rtol must be positive");
    if (cfg.distance_max_iters < 1)
        throw ConfigError("config: distance.max_iters must be >= 1");
    if (!(cfg.distance_dt > 0.0)) throw ConfigError("config: distance.dt must be positive");
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string resolved_config_text(const SimConfig& cfg) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "grid.n = " << cfg.grid_n << "\n";
    out << "grid.r_max = " << num(cfg.grid_r_max) << "\n";
    out << "init.kind = " << cfg.init_kind << "\n";
    out << "init.sigma = " << num(cfg.init_sigma) << "\n";
    out << "init.radius = " << num(cfg.init_radius) << "\n";
    out << "init.path = " << cfg.init_path << "\n";
    out << "init.normalize = " << (cfg.init_normalize ? "true" : "false") << "\n";
    out << "flow.alpha = " << num(cfg.flow_alpha) << "\n";
    out << "flow.form = " << cfg.flow_form << "\n";
    out << "time.t_end = " << num(cfg.time_t_end) << "\n";
    out << "time.cfl_safety = " << num(cfg.time_cfl_safety) << "\n";
    out << "time.dt_max = " << num(cfg.time_dt_max) << "\n";
    out << "time.rho_floor = " << num(cfg.time_rho_floor) << "\n";
    out << "time.mass_drift_budget = " << num(cfg.time_mass_drift_budget) << "\n";
    out << "output.every = " << cfg.output_every << "\n";
    out << "output.dir = " << cfg.output_dir << "\n";
    out << "output.snapshots =";
    for (std::size_t i = 0; i < cfg.output_snapshots.size(); ++i)
        out << (i ? "," : " ") << num(cfg.output_snapshots[i]);
    out << "\n";
    out << "diag.gamma = " << num(cfg.diag_gamma) << "\n";
    out << "diag.poincare_eps = " << num(cfg.diag_poincare_eps) << "\n";
    out << "seeds.master = " << cfg.seeds_master << "\n";
    out << "geodesic.t_end = " << num(cfg.geodesic_t_end) << "\n";
    out << "geodesic.dt = " << num(cfg.geodesic_dt) << "\n";
    out << "geodesic.sample_every = " << cfg.geodesic_sample_every << "\n";
    out << "geodesic.phi0_kind = " << cfg.geodesic_phi0_kind << "\n";
    out << "geodesic.phi0_amplitude = " << num(cfg.geodesic_phi0_amplitude) << "\n";
    out << "geodesic.phi0_width = " << num(cfg.geodesic_phi0_width) << "\n";
    out << "distance.target_kind = " << cfg.distance_target_kind << "\n";
    out << "distance.target_sigma = " << num(cfg.distance_target_sigma) << "\n";
    out << "distance.target_radius = " << num(cfg.distance_target_radius) << "\n";
    out << "distance.target_path = " << cfg.distance_target_path << "\n";
    out << "distance.rtol = " << num(cfg.distance_rtol) << "\n";
    out << "distance.max_iters = " << cfg.distance_max_iters << "\n";
    out << "distance.dt = " << num(cfg.distance_dt) << "\n";
    return out.str();
}

Density build_initial_density(const GridPtr& grid, const std::string& kind, double sigma,
                              double radius, const std::string& path, bool normalize) {
    RadialField f = make_field(grid, Parity::even, "density");
    if (kind == "gaussian") {
        const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -1.5);
        for (int i = 0; i < grid->n; ++i) {
            const double r = grid->r[static_cast<std::size_t>(i)];
            f[i] = norm * std::exp(-0.5 * r * r / (sigma * sigma));
        }
    } else if (kind == "ball") {
        const double norm = 3.0 / (4.0 * std::numbers::pi * radius * radius * radius);
        for (int i = 0; i < grid->n; ++i)
            f[i] = grid->r[static_cast<std::size_t>(i)] <= radius ? norm : 0.0;
    } else if (kind == "file") {
        std::ifstream in(path);
        if (!in) throw ConfigError("init: cannot open '" + path + "'");
        for (int i = 0; i < grid->n; ++i)
            if (!(in >> f[i]))
                throw ConfigError("init: file '" + path + "' has fewer values than grid nodes");
        for (int i = 0; i < grid->n; ++i)
            if (f[i] < 0.0) throw ConfigError("init: file density has negative values");
    } else {
        throw ConfigError("init: unknown kind '" + kind + "'");
    }
    return make_density(std::move(f), normalize);
}

Density build_density_from_config(const SimConfig& cfg, const GridPtr& grid) {
    return build_initial_density(grid, cfg.init_kind, cfg.init_sigma, cfg.init_radius,
                                 cfg.init_path, cfg.init_normalize);
}

} // namespace isolandau
