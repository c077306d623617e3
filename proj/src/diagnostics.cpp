#include "isolandau/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "isolandau/errors.hpp"
#include "isolandau/kernels.hpp"
#include "isolandau/potential.hpp"

namespace isolandau {

namespace {

constexpr double kRhoGuard = 1e-30;
constexpr double kEightPi = 8.0 * std::numbers::pi;

} // namespace

double entropy(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "entropy");
    const auto& v = rho.values();
    std::vector<double> integrand(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        integrand[i] = v[i] > 0.0 ? v[i] * std::log(v[i]) : 0.0;
    return kernels::ops().dot(grid.w.data(), integrand.data(), integrand.size());
}

double dissipation_closed(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "dissipation_closed");
    const int n = grid.n;
    const auto& v = rho.values();
    std::vector<double> pot(static_cast<std::size_t>(n)), drho(static_cast<std::size_t>(n)),
        integrand(static_cast<std::size_t>(n));
    coulomb_potential_raw(grid, v.data(), pot.data(), true);
    ddr_raw(grid, v.data(), drho.data());
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        integrand[k] = v[k] > kRhoGuard ? pot[k] * drho[k] * drho[k] / v[k] : 0.0;
    }
    const auto& ops = kernels::ops();
    const double first = ops.dot(grid.w.data(), integrand.data(), integrand.size());
    const double second = ops.dot3(grid.w.data(), v.data(), v.data(), v.size());
    return first - second;
}

double dissipation_double_oracle(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "dissipation_double_oracle");
    if (grid.n > 1025)
        throw ResourceError("dissipation_double_oracle: grid exceeds 1025 nodes");
    const int n = grid.n;
    const auto& v = rho.values();
    std::vector<double> drho(static_cast<std::size_t>(n)), u(static_cast<std::size_t>(n)),
        c(static_cast<std::size_t>(n));
    ddr_raw(grid, v.data(), drho.data());
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        u[k] = v[k] > kRhoGuard ? drho[k] / v[k] : 0.0;
        c[k] = grid.w1d[k] * (v[k] > 0.0 ? v[k] : 0.0);
    }
    const double pair = kernels::ops().coulomb_pair_sum(grid.r.data(), u.data(), c.data(),
                                                        static_cast<std::size_t>(n));
    return 2.0 * std::numbers::pi * pair;
}

double kappa_of_second_moment(double second_moment) {
    return 1.0 / (kEightPi * (std::sqrt(second_moment) + 1.0));
}

double fisher_weighted_functional(const RadialGrid& grid, const Density& rho) {
    const int n = grid.n;
    const auto& v = rho.values();
    std::vector<double> sq(static_cast<std::size_t>(n)), dsq(static_cast<std::size_t>(n)),
        integrand(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        sq[static_cast<std::size_t>(i)] = std::sqrt(std::max(v[static_cast<std::size_t>(i)], 0.0));
    ddr_raw(grid, sq.data(), dsq.data());
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        integrand[k] = dsq[k] * dsq[k] / (1.0 + grid.r[k]);
    }
    return kernels::ops().dot(grid.w.data(), integrand.data(), integrand.size());
}

KappaFisherResult kappa_fisher_check(const RadialGrid& grid, const Density& rho,
                                     double dEdt_fd, double tol_scale) {
    KappaFisherResult res;
    Moments m = moments_and_sups(grid, rho);
    res.kappa = kappa_of_second_moment(m.second_moment);
    res.fisher = fisher_weighted_functional(grid, rho);
    res.lhs = dEdt_fd + res.kappa * res.fisher;
    res.holds = res.lhs <= tol_scale * std::fabs(dEdt_fd);
    return res;
}

HessianTerms hessian_entropy(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "hessian_entropy");
    const int n = grid.n;
    const std::size_t un = static_cast<std::size_t>(n);
    const auto& v = rho.values();

    std::vector<double> rdot(un), pot(un), drho(un), phip(un), rg2(un), lrg2(un),
        vnp(un);
    landau_rhs_raw(grid, v.data(), rdot.data(), RhsForm::div_form, 1.0);
    coulomb_potential_raw(grid, v.data(), pot.data(), true);
    ddr_raw(grid, v.data(), drho.data());
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        phip[k] = v[k] > kRhoGuard ? -drho[k] / v[k] : 0.0; // grad Phi, Phi = -log rho
        rg2[k] = v[k] > kRhoGuard ? drho[k] * drho[k] / v[k] : 0.0; // rho |grad Phi|^2
        vnp[k] = -drho[k];                                          // rho grad Phi
    }
    coulomb_potential_raw(grid, rg2.data(), lrg2.data(), false);
    std::vector<double> tmp = vnp;
    vector_potential_raw(grid, tmp.data(), vnp.data()); // (-Delta)^{-1}(rho grad Phi)

    std::vector<double> t1(un), t2(un), t3(un), t4(un);
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        t1[k] = v[k] > kRhoGuard ? 2.0 * rdot[k] * rdot[k] / v[k] : 0.0;
        t2[k] = -rdot[k] * pot[k] * phip[k] * phip[k];
        t3[k] = 2.0 * rdot[k] * phip[k] * vnp[k];
        t4[k] = -rdot[k] * lrg2[k];
    }
    const auto& ops = kernels::ops();
    HessianTerms out;
    out.term1 = ops.dot(grid.w.data(), t1.data(), un);
    out.term2 = ops.dot(grid.w.data(), t2.data(), un);
    out.term3 = ops.dot(grid.w.data(), t3.data(), un);
    out.term4 = ops.dot(grid.w.data(), t4.data(), un);
    out.total = out.term1 + out.term2 + out.term3 + out.term4;
    return out;
}

double eqnpos_check(const RadialGrid& grid, const Density& rho, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0 / 7.0))
        throw ConfigError("eqnpos_check: gamma must lie in (0, 1/7)");
    require_same_grid(grid, rho.field, "eqnpos_check");
    const int n = grid.n;
    const std::size_t un = static_cast<std::size_t>(n);
    const auto& v = rho.values();
    std::vector<double> pot(un), drho(un), vnp(un), integrand(un);
    coulomb_potential_raw(grid, v.data(), pot.data(), true);
    ddr_raw(grid, v.data(), drho.data());
    vector_potential_raw(grid, drho.data(), vnp.data());
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        if (v[k] <= kRhoGuard) {
            integrand[k] = 0.0;
            continue;
        }
        const double a = 2.0 * gamma * v[k] - drho[k] * drho[k] * pot[k] / (v[k] * v[k]);
        // rho grad Phi = -grad rho, so the quadratic term is drho . VNP(drho)
        const double b = drho[k] * vnp[k] + 3.0 * v[k] * v[k];
        integrand[k] = a * b;
    }
    return kernels::ops().dot(grid.w.data(), integrand.data(), un);
}

Moments moments_and_sups(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "moments_and_sups");
    const int n = grid.n;
    const std::size_t un = static_cast<std::size_t>(n);
    const auto& v = rho.values();
    std::vector<double> pot(un), half_r2(un);
    coulomb_potential_raw(grid, v.data(), pot.data(), true);
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        half_r2[k] = 0.5 * grid.r[k] * grid.r[k];
    }
    const auto& ops = kernels::ops();
    Moments m;
    m.mass = ops.dot(grid.w.data(), v.data(), un);
    m.second_moment = ops.dot3(grid.w.data(), half_r2.data(), v.data(), un);
    m.cube_norm = ops.dot4(grid.w.data(), v.data(), v.data(), v.data(), un);
    m.sup_rho = ops.max_val(v.data(), un);
    m.sup_Lrho = ops.max_val(pot.data(), un);
    return m;
}

namespace {

// Lagrange 3-point derivatives on possibly non-uniform times.
double fd1(double fm, double f0, double fp, double hm, double hp) {
    return (-hp / (hm * (hm + hp))) * fm + ((hp - hm) / (hm * hp)) * f0
           + (hm / (hp * (hm + hp))) * fp;
}

double fd2(double fm, double f0, double fp, double hm, double hp) {
    return 2.0 * (fm / (hm * (hm + hp)) - f0 / (hm * hp) + fp / (hp * (hm + hp)));
}

} // namespace

std::vector<DiagnosticsRecord> assemble_records(const FlowTrace& trace, double gamma) {
    std::vector<DiagnosticsRecord> records;
    records.reserve(trace.rows.size());
    const double rate_alpha = (1.0 - 7.0 * gamma) / 2.0;
    for (const TraceRow& row : trace.rows) {
        const RadialGrid& grid = *row.rho.grid();
        DiagnosticsRecord rec;
        rec.t = row.t;
        Moments m = moments_and_sups(grid, row.rho);
        rec.mass = m.mass;
        rec.second_moment = m.second_moment;
        rec.cube_norm = m.cube_norm;
        rec.sup_rho = m.sup_rho;
        rec.sup_Lrho = m.sup_Lrho;
        rec.entropy = entropy(grid, row.rho);
        rec.dissipation = dissipation_closed(grid, row.rho);
        rec.kappa = kappa_of_second_moment(m.second_moment);
        rec.fisher_weighted = fisher_weighted_functional(grid, row.rho);
        rec.hessian_value = hessian_entropy(grid, row.rho).total;
        rec.eqnpos_value = eqnpos_check(grid, row.rho, gamma);
        rec.rate_alpha = rate_alpha;
        records.push_back(std::move(rec));
    }
    for (std::size_t k = 1; k + 1 < records.size(); ++k) {
        const double hm = records[k].t - records[k - 1].t;
        const double hp = records[k + 1].t - records[k].t;
        if (!(hm > 0.0) || !(hp > 0.0)) continue;
        records[k].dEdt_fd = fd1(records[k - 1].entropy, records[k].entropy,
                                 records[k + 1].entropy, hm, hp);
        records[k].d2Edt2_fd = fd2(records[k - 1].entropy, records[k].entropy,
                                   records[k + 1].entropy, hm, hp);
    }
    return records;
}

RateBoundReport rate_bound_check(const std::vector<DiagnosticsRecord>& records,
                                 double gamma, double slack) {
    if (!(gamma > 0.0 && gamma < 1.0 / 7.0))
        throw ConfigError("rate_bound_check: gamma must lie in (0, 1/7)");
    RateBoundReport report;
    report.rate_alpha = (1.0 - 7.0 * gamma) / 2.0;
    const std::size_t n = records.size();
    // trailing trapezoid of the cube norm over [t_k, t_end]
    std::vector<double> tail(n, 0.0);
    for (std::size_t k = n; k-- > 1;) {
        // iterate downward: tail[k-1] from tail[k]
        if (k == n - 1) tail[k] = 0.0;
        const double dt = records[k].t - records[k - 1].t;
        tail[k - 1] = tail[k] + 0.5 * dt * (records[k].cube_norm + records[k - 1].cube_norm);
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!records[k].dEdt_fd) continue;
        RateBoundRow row;
        row.t = records[k].t;
        row.dEdt_fd = *records[k].dEdt_fd;
        row.tail_cube_integral = tail[k];
        row.threshold = -report.rate_alpha * tail[k] + slack;
        row.margin = row.threshold - row.dEdt_fd;
        row.eqnpos_ok = records[k].eqnpos_value >= 0.0;
        row.holds = row.dEdt_fd <= row.threshold;
        if (!row.eqnpos_ok) report.any_assumption_violated = true;
        if (row.eqnpos_ok && !row.holds) report.all_asserted_hold = false;
        report.rows.push_back(row);
    }
    return report;
}

SupnormFit supnorm_fit(const std::vector<DiagnosticsRecord>& records, double t_lo,
                       double t_hi) {
    if (!(t_lo > 0.0)) throw UsageError("supnorm_fit: t_lo must be positive");
    std::vector<double> x, y1, y2;
    for (const auto& rec : records) {
        if (rec.t < t_lo || rec.t > t_hi) continue;
        if (!(rec.sup_rho > 0.0) || !(rec.sup_Lrho > 0.0)) continue;
        x.push_back(std::log(1.0 / rec.t + 1.0));
        y1.push_back(std::log(rec.sup_rho));
        y2.push_back(std::log(rec.sup_Lrho));
    }
    if (x.size() < 8)
        throw UsageError("supnorm_fit: fewer than 8 usable rows in [t_lo, t_hi]");
    auto fit = [&](const std::vector<double>& y, double& slope, double& c) {
        const double n = static_cast<double>(x.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        const double denom = n * sxx - sx * sx;
        slope = (n * sxy - sx * sy) / denom;
        c = std::exp((sy - slope * sx) / n);
    };
    SupnormFit out;
    fit(y1, out.s1, out.c1);
    fit(y2, out.s2, out.c2);
    return out;
}

double poincare_probe(const RadialGrid& grid, const Density& rho,
                      const std::vector<RadialField>& phis, double eps) {
    if (phis.empty()) throw UsageError("poincare_probe: empty probe family");
    const int n = grid.n;
    const std::size_t un = static_cast<std::size_t>(n);
    const auto& v = rho.values();
    std::vector<double> pot(un), dphi(un), phi2(un), grad2(un);
    coulomb_potential_raw(grid, v.data(), pot.data(), true);
    const auto& ops = kernels::ops();
    double best = 0.0;
    for (const RadialField& phi : phis) {
        require_same_grid(grid, phi, "poincare_probe");
        require_parity(phi, Parity::even, "poincare_probe");
        ddr_raw(grid, phi.values.data(), dphi.data());
        ops.mul(phi.values.data(), phi.values.data(), phi2.data(), un);
        ops.mul(dphi.data(), dphi.data(), grad2.data(), un);
        const double den = ops.dot(grid.w.data(), phi2.data(), un);
        if (!(den > 0.0))
            throw UsageError("poincare_probe: probe with zero L2 mass on the grid");
        const double num = ops.dot3(grid.w.data(), v.data(), phi2.data(), un)
                           - eps * ops.dot3(grid.w.data(), pot.data(), grad2.data(), un);
        best = std::max(best, num / den);
    }
    return best;
}

std::vector<RadialField> default_poincare_family(const GridPtr& grid) {
    std::vector<RadialField> family;
    const double rmax = grid->r_max;
    const double centers[5] = {0.0, 0.15, 0.3, 0.45, 0.6};
    const double widths[4] = {0.05, 0.1, 0.2, 0.35};
    for (double cf : centers) {
        for (double wf : widths) {
            RadialField phi = make_field(grid, Parity::even, "probe");
            const double c = cf * rmax, s = wf * rmax;
            for (int i = 0; i < grid->n; ++i) {
                const double r = grid->r[static_cast<std::size_t>(i)];
                const double a = (r - c) / s, b = (r + c) / s;
                phi[i] = std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b);
            }
            family.push_back(std::move(phi));
        }
    }
    return family;
}

const char* const kTraceCsvHeader =
    "t,mass,entropy,dEdt_fd,dissipation,second_moment,kappa,fisher_weighted,"
    "sup_rho,sup_Lrho,hessian_value,d2Edt2_fd,cube_norm,eqnpos_value,rate_alpha";

std::string trace_csv(const std::vector<DiagnosticsRecord>& records) {
    std::string out(kTraceCsvHeader);
    out += '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    };
    auto put_opt = [&](const std::optional<double>& v) {
        if (v) put(*v);
    };
    for (const auto& r : records) {
        put(r.t);
        out += ',';
        put(r.mass);
        out += ',';
        put(r.entropy);
        out += ',';
        put_opt(r.dEdt_fd);
        out += ',';
        put(r.dissipation);
        out += ',';
        put(r.second_moment);
        out += ',';
        put(r.kappa);
        out += ',';
        put(r.fisher_weighted);
        out += ',';
        put(r.sup_rho);
        out += ',';
        put(r.sup_Lrho);
        out += ',';
        put(r.hessian_value);
        out += ',';
        put_opt(r.d2Edt2_fd);
        out += ',';
        put(r.cube_norm);
        out += ',';
        put(r.eqnpos_value);
        out += ',';
        put(r.rate_alpha);
        out += '\n';
    }
    return out;
}

} // namespace isolandau
