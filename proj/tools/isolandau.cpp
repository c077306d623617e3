// Radial-symmetry laboratory for the isotropic Landau flow: simulation,
// geodesics of the nonlocal mobility metric, distance estimates, and the
// identity verification suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "isolandau/config.hpp"
#include "isolandau/diagnostics.hpp"
#include "isolandau/errors.hpp"
#include "isolandau/geometry.hpp"
#include "isolandau/io.hpp"
#include "isolandau/kernels.hpp"
#include "isolandau/landau.hpp"
#include "isolandau/tolerances.hpp"
#include "isolandau/verify.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace isolandau;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailedChecks = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitResource = 4;

SimConfig load_config(const std::string& config_path, const std::string& out_dir) {
    SimConfig cfg = config_path.empty() ? parse_config("") : load_config_file(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return cfg;
}

void prepare_out_dir(const SimConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    write_text_file(cfg.output_dir + "/config.resolved", resolved_config_text(cfg));
}

RadialField build_phi0(const SimConfig& cfg, const GridPtr& grid) {
    RadialField phi = make_field(grid, Parity::even, "phi");
    if (cfg.geodesic_phi0_kind == "zero") return phi;
    const double s = cfg.geodesic_phi0_width;
    for (int i = 0; i < grid->n; ++i) {
        const double r = grid->r[static_cast<std::size_t>(i)];
        phi[i] = cfg.geodesic_phi0_amplitude * std::exp(-0.5 * r * r / (s * s));
    }
    return phi;
}

int cmd_simulate(const SimConfig& cfg) {
    prepare_out_dir(cfg);
    const GridPtr grid = build_uniform_grid(cfg.grid_n, cfg.grid_r_max);
    Density rho0 = build_density_from_config(cfg, grid);

    SimulateOptions opts;
    opts.form = cfg.flow_form == "div" ? RhsForm::div_form : RhsForm::nondiv;
    opts.alpha = cfg.flow_alpha;
    opts.t_end = cfg.time_t_end;
    opts.output_every = cfg.output_every;
    opts.ctrl.cfl_safety = cfg.time_cfl_safety;
    opts.ctrl.dt_max = cfg.time_dt_max;
    opts.ctrl.rho_floor = cfg.time_rho_floor;
    opts.ctrl.mass_drift_budget = cfg.time_mass_drift_budget;
    opts.snapshot_times = cfg.output_snapshots;
    if (opts.snapshot_times.empty()) opts.snapshot_times = {0.0, cfg.time_t_end};

    const SimulateResult sim = simulate(std::move(rho0), opts);
    const auto records = assemble_records(sim.trace, cfg.diag_gamma);

    std::string csv = trace_csv(records);
    if (sim.trace.aborted)
        csv += "# error: " + sim.trace.error + " at t=" + std::to_string(sim.trace.error_t)
               + "\n";
    write_text_file(cfg.output_dir + "/trace.csv", csv);

    for (std::size_t k = 0; k < sim.snapshots.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "/snapshot_%03zu.json", k);
        write_text_file(cfg.output_dir + name,
                        snapshot_json(sim.snapshots[k].rho, sim.snapshots[k].t));
    }

    const VerifyTolerances& tol = verify_tolerances();
    bool entropy_monotone = true, moment_increasing = true, kappa_all = true;
    double worst_h_theorem = 0.0, worst_hessian = 0.0;
    for (std::size_t k = 1; k < records.size(); ++k) {
        if (records[k].entropy > records[k - 1].entropy + tol.monotonicity_slack)
            entropy_monotone = false;
        if (records[k].second_moment < records[k - 1].second_moment - tol.monotonicity_slack)
            moment_increasing = false;
    }
    for (const auto& rec : records) {
        if (!rec.dEdt_fd) continue;
        worst_h_theorem = std::max(worst_h_theorem, std::fabs(*rec.dEdt_fd + rec.dissipation)
                                                        / std::fabs(rec.dissipation));
        if (*rec.dEdt_fd + rec.kappa * rec.fisher_weighted
            > tol.kappa_fisher_slack * std::fabs(*rec.dEdt_fd))
            kappa_all = false;
        if (rec.d2Edt2_fd && rec.t >= 0.1)
            worst_hessian = std::max(worst_hessian,
                                     std::fabs(rec.hessian_value - *rec.d2Edt2_fd)
                                         / std::fabs(*rec.d2Edt2_fd));
    }
    const RateBoundReport rate = rate_bound_check(records, cfg.diag_gamma,
                                                  tol.rate_bound_slack);
    double min_margin = HUGE_VAL;
    for (const auto& row : rate.rows)
        if (row.eqnpos_ok) min_margin = std::min(min_margin, row.margin);

    ordered_json report;
    report["backend"] = kernels::backend_name(kernels::active_backend());
    report["aborted"] = sim.trace.aborted;
    if (sim.trace.aborted) report["error"] = sim.trace.error;
    report["rows"] = records.size();
    report["t_final"] = sim.final_state.t;
    report["mass_drift"] = sim.final_state.mass_drift;
    report["entropy_monotone"] = entropy_monotone;
    report["second_moment_increasing"] = moment_increasing;
    report["h_theorem_max_rel_err"] = worst_h_theorem;
    report["hessian_max_rel_err"] = worst_hessian;
    report["kappa_fisher_all_hold"] = kappa_all;
    report["rate_bound"] = {{"rate_alpha", rate.rate_alpha},
                            {"all_asserted_hold", rate.all_asserted_hold},
                            {"any_assumption_violated", rate.any_assumption_violated},
                            {"min_margin", rate.rows.empty() ? 0.0 : min_margin}};
    try {
        const SupnormFit fit = supnorm_fit(records, 0.05, cfg.time_t_end);
        report["supnorm_fit"] = {{"s1", fit.s1}, {"c1", fit.c1}, {"s2", fit.s2},
                                 {"c2", fit.c2}};
    } catch (const UsageError&) {
        report["supnorm_fit"] = nullptr;
    }
    {
        const auto family = default_poincare_family(grid);
        report["poincare_c_eps"] = poincare_probe(*grid, sim.final_state.rho, family,
                                                  cfg.diag_poincare_eps);
        report["poincare_eps"] = cfg.diag_poincare_eps;
    }
    write_text_file(cfg.output_dir + "/report.json", report.dump(2) + "\n");

    if (sim.trace.aborted) {
        std::cerr << "simulate: aborted: " << sim.trace.error << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_geodesic(const SimConfig& cfg) {
    prepare_out_dir(cfg);
    const GridPtr grid = build_uniform_grid(cfg.grid_n, cfg.grid_r_max);
    const Density rho0 = build_density_from_config(cfg, grid);
    const GeodesicState s0 = make_geodesic_state(rho0, build_phi0(cfg, grid));

    GeodesicOptions opts;
    opts.t_end = cfg.geodesic_t_end;
    opts.dt = cfg.geodesic_dt;
    opts.sample_every = cfg.geodesic_sample_every;
    const GeodesicResult res = geodesic_integrate(s0, opts);

    write_text_file(cfg.output_dir + "/path.json", geodesic_path_json(res.samples));
    const PathActionResult action = path_action(grid, res.samples);
    ordered_json report;
    report["h0"] = res.h0;
    report["max_rel_h_drift"] = res.max_rel_h_drift;
    report["samples"] = res.samples.size();
    report["action"] = action.action;
    report["continuity_ok"] = action.continuity_ok;
    report["max_continuity_residual"] = action.max_continuity_residual;
    write_text_file(cfg.output_dir + "/report.json", report.dump(2) + "\n");
    return kExitOk;
}

int cmd_distance(const SimConfig& cfg) {
    prepare_out_dir(cfg);
    const GridPtr grid = build_uniform_grid(cfg.grid_n, cfg.grid_r_max);
    const Density rho0 = build_density_from_config(cfg, grid);
    const Density rho1 = build_initial_density(grid, cfg.distance_target_kind,
                                               cfg.distance_target_sigma,
                                               cfg.distance_target_radius,
                                               cfg.distance_target_path,
                                               cfg.init_normalize);

    ShootingOptions opts;
    opts.rtol = cfg.distance_rtol;
    opts.max_iterations = cfg.distance_max_iters;
    opts.dt = cfg.distance_dt;
    const ShootingResult shoot = wk_distance_shooting(rho0, rho1, opts);
    const double w1 = w1_radial(rho0, rho1);

    write_text_file(cfg.output_dir + "/shooting.json", shooting_report_json(shoot) + "\n");
    ordered_json report;
    report["w1"] = w1;
    report["wk_estimate"] = shoot.wk_estimate;
    report["converged"] = shoot.converged;
    report["iterations"] = shoot.iterations;
    report["terminal_residual"] = shoot.terminal_residual;
    report["ratio_w1_over_wk"] = shoot.wk_estimate > 0.0 ? w1 / shoot.wk_estimate : 0.0;
    write_text_file(cfg.output_dir + "/report.json", report.dump(2) + "\n");
    return shoot.converged ? kExitOk : kExitNumerical;
}

int cmd_verify(const SimConfig& cfg) {
    prepare_out_dir(cfg);
    const auto results = run_verify_suite(cfg);
    ordered_json entries = ordered_json::array();
    bool all = true;
    for (const auto& r : results) {
        ordered_json j;
        j["name"] = r.name;
        j["pass"] = r.pass;
        j["measured"] = r.measured;
        j["tolerance"] = r.tolerance;
        if (!r.note.empty()) j["note"] = r.note;
        entries.push_back(std::move(j));
        all = all && r.pass;
        std::printf("%-34s %s  (measured %.3e, tol %.3e)\n", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.measured, r.tolerance);
    }
    ordered_json report;
    report["all_pass"] = all;
    report["entries"] = std::move(entries);
    write_text_file(cfg.output_dir + "/verify.json", report.dump(2) + "\n");
    return all ? kExitOk : kExitFailedChecks;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"isotropic Landau flow laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (section.key = value lines)");
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    };
    CLI::App* sim = app.add_subcommand("simulate", "run the isotropic Landau flow");
    CLI::App* geo = app.add_subcommand("geodesic", "integrate the co-geodesic system");
    CLI::App* dis = app.add_subcommand("distance", "W_K shooting estimate and W1");
    CLI::App* ver = app.add_subcommand("verify", "run the identity verification suite");
    for (CLI::App* sub : {sim, geo, dis, ver}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        const SimConfig cfg = load_config(config_path, out_dir);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (geo->parsed()) return cmd_geodesic(cfg);
        if (dis->parsed()) return cmd_distance(cfg);
        if (ver->parsed()) return cmd_verify(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResource;
    }
    return kExitOk;
}
