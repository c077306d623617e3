#include "isolandau/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isolandau/errors.hpp"
#include "isolandau/kernels.hpp"
#include "isolandau/potential.hpp"

namespace isolandau {

namespace {

using std::size_t;

// rho-weighted mean-zero gauge
void gauge_fix(const RadialGrid& grid, const double* rho, double* phi) {
    const size_t n = static_cast<size_t>(grid.n);
    const auto& ops = kernels::ops();
    const double mass = ops.dot(grid.w.data(), rho, n);
    if (!(std::fabs(mass) > 0.0)) return;
    const double mean = ops.dot3(grid.w.data(), rho, phi, n) / mass;
    for (size_t i = 0; i < n; ++i) phi[i] -= mean;
}

} // namespace

// --- Onsager operator and metric form ---------------------------------------

namespace {

void apply_onsager_raw(const RadialGrid& grid, const double* rho, const double* phi,
                       double* out) {
    const int n = grid.n;
    const size_t un = static_cast<size_t>(n);
    std::vector<double> pot(un), dphi(un), g(un), vnp(un), flux(un);
    coulomb_potential_raw(grid, rho, pot.data(), true);
    ddr_raw(grid, phi, dphi.data());
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = rho[i] * dphi[static_cast<size_t>(i)];
    vector_potential_raw(grid, g.data(), vnp.data());
    for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        flux[k] = pot[k] * g[k] - rho[i] * vnp[k];
    }
    div_radial_raw(grid, flux.data(), out);
}

} // namespace

RadialField apply_onsager(const RadialGrid& grid, const Density& rho,
                          const RadialField& phi) {
    require_same_grid(grid, rho.field, "apply_onsager");
    require_same_grid(grid, phi, "apply_onsager");
    require_parity(phi, Parity::even, "apply_onsager");
    RadialField out = make_field(rho.grid(), Parity::even);
    apply_onsager_raw(grid, rho.values().data(), phi.values.data(), out.values.data());
    return out;
}

MetricFormParts metric_form_parts(const RadialGrid& grid, const Density& rho,
                                  const RadialField& phi1, const RadialField& phi2) {
    require_same_grid(grid, rho.field, "metric_form");
    require_same_grid(grid, phi1, "metric_form");
    require_same_grid(grid, phi2, "metric_form");
    const int n = grid.n;
    const size_t un = static_cast<size_t>(n);
    const double* v = rho.values().data();

    std::vector<double> pot(un), d1(un), d2(un), g1(un), g2(un), tmp(un);
    coulomb_potential_raw(grid, v, pot.data(), true);
    ddr_raw(grid, phi1.values.data(), d1.data());
    ddr_raw(grid, phi2.values.data(), d2.data());
    for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        g1[k] = v[k] * d1[k];
        g2[k] = v[k] * d2[k];
    }
    const auto& ops = kernels::ops();
    std::vector<double> rho_pot(un), d12(un);
    ops.mul(v, pot.data(), rho_pot.data(), un);
    // single product array keeps the form symmetric to the last bit
    ops.mul(d1.data(), d2.data(), d12.data(), un);
    MetricFormParts parts;
    parts.local = ops.dot3(grid.w.data(), rho_pot.data(), d12.data(), un);
    vector_potential_raw(grid, g2.data(), tmp.data());
    const double a = ops.dot3(grid.w.data(), g1.data(), tmp.data(), un);
    vector_potential_raw(grid, g1.data(), tmp.data());
    const double b = ops.dot3(grid.w.data(), g2.data(), tmp.data(), un);
    parts.nonlocal = 0.5 * (a + b);
    parts.value = parts.local - parts.nonlocal;
    return parts;
}

double metric_form(const RadialGrid& grid, const Density& rho, const RadialField& phi1,
                   const RadialField& phi2) {
    return metric_form_parts(grid, rho, phi1, phi2).value;
}

double hamiltonian(const RadialGrid& grid, const Density& rho, const RadialField& phi) {
    return 0.5 * metric_form(grid, rho, phi, phi);
}

// --- solve_potential ---------------------------------------------------------

RadialField solve_potential(const RadialGrid& grid, const Density& rho,
                            const RadialField& sigma, const SolveOptions& opts) {
    require_same_grid(grid, rho.field, "solve_potential");
    require_same_grid(grid, sigma, "solve_potential");
    require_parity(sigma, Parity::even, "solve_potential");
    const int n = grid.n;
    const size_t un = static_cast<size_t>(n);
    const auto& ops = kernels::ops();
    const double* rv = rho.values().data();

    auto wnorm = [&](const double* x) {
        std::vector<double> sq(un);
        ops.mul(x, x, sq.data(), un);
        return std::sqrt(std::max(0.0, ops.dot(grid.w.data(), sq.data(), un)));
    };

    const double sigma_norm = wnorm(sigma.values.data());
    const double sigma_mean = ops.dot(grid.w.data(), sigma.values.data(), un);
    if (sigma_norm == 0.0) return make_field(rho.grid(), Parity::even, "potential");
    if (std::fabs(sigma_mean) > 1e-10 * sigma_norm)
        throw UsageError("solve_potential: sigma must have zero integral");

    // Solve W(-K) phi = W sigma by Jacobi-preconditioned BiCGStab. The
    // operator is positive semi-definite but self-adjoint only up to the
    // discretization order, which rules out plain CG; constants span the
    // null space and are removed by the final gauge fix.
    auto apply_S = [&](const double* x, double* out) {
        apply_onsager_raw(grid, rv, x, out);
        for (int i = 0; i < n; ++i) {
            const size_t k = static_cast<size_t>(i);
            out[k] = -out[k] * grid.w[k];
        }
    };

    std::vector<double> pot(un), diag(un);
    coulomb_potential_raw(grid, rv, pot.data(), true);
    double dmax = 0.0;
    for (size_t i = 0; i < un; ++i) {
        diag[i] = grid.w[i] * 2.0 * rv[i] * pot[i] / (grid.h * grid.h);
        dmax = std::max(dmax, diag[i]);
    }
    const double dfloor = dmax > 0.0 ? 1e-10 * dmax : 1.0;
    for (size_t i = 0; i < un; ++i) diag[i] = std::max(diag[i], dfloor);

    std::vector<double> phi(un, 0.0), b(un), r(un), r0(un), p(un, 0.0), v(un, 0.0),
        s(un), t(un), y(un), z(un), best(un, 0.0), resid(un);
    ops.mul(grid.w.data(), sigma.values.data(), b.data(), un);
    r = b;
    r0 = r;

    auto spec_residual = [&](const double* x) {
        apply_onsager_raw(grid, rv, x, resid.data()); // K phi
        for (size_t i = 0; i < un; ++i) resid[i] += sigma.values[i];
        return wnorm(resid.data()) / sigma_norm;
    };

    double best_res = spec_residual(phi.data());
    double rho_k = 1.0, alpha = 1.0, omega = 1.0;
    int it = 0;
    for (; it < opts.max_iterations && best_res > opts.rtol; ++it) {
        const double rho_new = ops.dot(r0.data(), r.data(), un);
        if (rho_new == 0.0) break; // breakdown; keep best iterate
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho_new / rho_k) * (alpha / omega);
            for (size_t i = 0; i < un; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        rho_k = rho_new;
        for (size_t i = 0; i < un; ++i) y[i] = p[i] / diag[i];
        apply_S(y.data(), v.data());
        const double r0v = ops.dot(r0.data(), v.data(), un);
        if (r0v == 0.0) break;
        alpha = rho_k / r0v;
        for (size_t i = 0; i < un; ++i) s[i] = r[i] - alpha * v[i];
        for (size_t i = 0; i < un; ++i) z[i] = s[i] / diag[i];
        apply_S(z.data(), t.data());
        const double tt = ops.dot(t.data(), t.data(), un);
        omega = tt > 0.0 ? ops.dot(t.data(), s.data(), un) / tt : 0.0;
        for (size_t i = 0; i < un; ++i) {
            phi[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        const double res = spec_residual(phi.data());
        if (res < best_res) {
            best_res = res;
            best = phi;
        }
        if (omega == 0.0) break;
    }

    if (best_res > opts.rtol)
        throw NumericalError("solve_potential: no convergence, residual "
                             + std::to_string(best_res) + " after "
                             + std::to_string(it) + " iterations");
    RadialField out = make_field(rho.grid(), Parity::even, "potential");
    out.values = best;
    gauge_fix(grid, rv, out.values.data());
    return out;
}

// --- geodesics ---------------------------------------------------------------

GeodesicState make_geodesicstate_impl(RadialField rho, RadialField phi) {
    GeodesicState s;
    const RadialGrid& grid = *rho.grid;
    gauge_fix(grid, rho.values.data(), phi.values.data());
    s.hamiltonian_0 = hamiltonian_raw(grid, rho.values.data(), phi.values.data());
    s.rho = std::move(rho);
    s.phi = std::move(phi);
    return s;
}

GeodesicState make_geodesic_state(const Density& rho0, RadialField phi0) {
    require_same_grid(*rho0.grid(), phi0, "make_geodesic_state");
    require_parity(phi0, Parity::even, "make_geodesic_state");
    return make_geodesicstate_impl(rho0.field, std::move(phi0));
}

double hamiltonian_raw(const RadialGrid& grid, const double* rho, const double* phi) {
    const int n = grid.n;
    const size_t un = static_cast<size_t>(n);
    std::vector<double> pot(un), e(un), g(un), vg(un), rho_pot(un);
    coulomb_potential_raw(grid, rho, pot.data(), false);
    ddr_raw(grid, phi, e.data());
    const auto& ops = kernels::ops();
    ops.mul(rho, pot.data(), rho_pot.data(), un);
    ops.mul(rho, e.data(), g.data(), un);
    vector_potential_raw(grid, g.data(), vg.data());
    const double local = ops.dot4(grid.w.data(), rho_pot.data(), e.data(), e.data(), un);
    const double nonlocal = ops.dot3(grid.w.data(), g.data(), vg.data(), un);
    return 0.5 * (local - nonlocal);
}

void geodesic_rhs_raw(const RadialGrid& grid, const double* rho, const double* phi,
                      double* drho, double* dphi, GeodesicScheme scheme) {
    const int n = grid.n;
    const size_t un = static_cast<size_t>(n);
    const auto& ops = kernels::ops();

    if (scheme == GeodesicScheme::direct) {
        std::vector<double> pot(un), e(un), g(un), vg(un), e2rho(un), inv_e2(un);
        coulomb_potential_raw(grid, rho, pot.data(), true);
        ddr_raw(grid, phi, e.data());
        ops.mul(rho, e.data(), g.data(), un);
        vector_potential_raw(grid, g.data(), vg.data());

        apply_onsager_raw(grid, rho, phi, drho);
        for (size_t i = 0; i < un; ++i) drho[i] = -drho[i];

        for (size_t i = 0; i < un; ++i) e2rho[i] = e[i] * e[i] * rho[i];
        coulomb_potential_raw(grid, e2rho.data(), inv_e2.data(), false);
        for (size_t i = 0; i < un; ++i)
            dphi[i] = -0.5 * (e[i] * e[i] * pot[i] + inv_e2[i]) + e[i] * vg[i];
        return;
    }

    // adjoint scheme: exact gradients of the discrete Hamiltonian with the
    // lumped pairing M (= quadrature weights; half-cell volume at the origin)
    std::vector<double> pot(un), e(un), g(un), vg(un), vtwg(un), wg(un), m(un);
    coulomb_potential_raw(grid, rho, pot.data(), false);
    ddr_raw(grid, phi, e.data());
    ops.mul(rho, e.data(), g.data(), un);
    vector_potential_raw(grid, g.data(), vg.data());
    ops.mul(grid.w.data(), g.data(), wg.data(), un);
    vector_potential_transpose_raw(grid, wg.data(), vtwg.data());

    for (size_t i = 0; i < un; ++i) m[i] = grid.w[i];
    m[0] = grid.w[1] / 6.0; // consistent half-cell volume at r = 0

    // dH/dphi = D^T ( w rho L e - 0.5 rho (w Vg + V^T w g) )
    std::vector<double> inner(un), dtr(un);
    for (size_t i = 0; i < un; ++i)
        inner[i] = grid.w[i] * rho[i] * pot[i] * e[i]
                   - 0.5 * rho[i] * (grid.w[i] * vg[i] + vtwg[i]);
    ddr_transpose_raw(grid, inner.data(), dtr.data());
    for (size_t i = 0; i < un; ++i) drho[i] = dtr[i] / m[i];

    // dH/drho = 0.5 w L e^2 + 0.5 N^T(w rho e^2) - 0.5 e (w Vg + V^T w g)
    std::vector<double> wre2(un), nt(un);
    for (size_t i = 0; i < un; ++i) wre2[i] = grid.w[i] * rho[i] * e[i] * e[i];
    coulomb_potential_transpose_raw(grid, wre2.data(), nt.data());
    for (size_t i = 0; i < un; ++i) {
        const double grad_rho = 0.5 * grid.w[i] * pot[i] * e[i] * e[i] + 0.5 * nt[i]
                                - 0.5 * e[i] * (grid.w[i] * vg[i] + vtwg[i]);
        dphi[i] = -grad_rho / m[i];
    }
}

std::pair<RadialField, RadialField> geodesic_rhs(const RadialGrid& grid,
                                                 const GeodesicState& state) {
    require_same_grid(grid, state.rho, "geodesic_rhs");
    RadialField drho = make_field(state.rho.grid, Parity::even);
    RadialField dphi = make_field(state.rho.grid, Parity::even);
    geodesic_rhs_raw(grid, state.rho.values.data(), state.phi.values.data(),
                     drho.values.data(), dphi.values.data(), GeodesicScheme::direct);
    return {std::move(drho), std::move(dphi)};
}

GeodesicResult geodesic_integrate(const GeodesicState& s0, const GeodesicOptions& opts) {
    const RadialGrid& grid = *s0.rho.grid;
    const int n = grid.n;
    const size_t un = static_cast<size_t>(n);
    const auto& ops = kernels::ops();
    if (!(opts.dt > 0.0)) throw ConfigError("geodesic_integrate: dt must be positive");

    // concatenated state y = (rho, phi)
    const size_t dim = 2 * un;
    std::vector<double> y(dim), k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);
    std::copy(s0.rho.values.begin(), s0.rho.values.end(), y.begin());
    std::copy(s0.phi.values.begin(), s0.phi.values.end(), y.begin() + un);

    auto rhs = [&](const double* state, double* out) {
        geodesic_rhs_raw(grid, state, state + un, out, out + un, opts.scheme);
    };

    GeodesicResult res;
    res.h0 = hamiltonian_raw(grid, y.data(), y.data() + un);
    const double h_scale = std::max(std::fabs(res.h0), 1e-12);

    const long steps = std::lround(opts.t_end / opts.dt);
    const double dt = steps > 0 ? opts.t_end / static_cast<double>(steps) : opts.dt;

    auto sample = [&](double t) {
        GeodesicSample s;
        s.t = t;
        s.rho.assign(y.begin(), y.begin() + un);
        s.phi.assign(y.begin() + un, y.end());
        res.samples.push_back(std::move(s));
    };
    sample(0.0);

    double t = 0.0;
    for (long step = 0; step < steps; ++step) {
        rhs(y.data(), k1.data());
        ops.axpby(1.0, y.data(), 0.5 * dt, k1.data(), stage.data(), dim);
        rhs(stage.data(), k2.data());
        ops.axpby(1.0, y.data(), 0.5 * dt, k2.data(), stage.data(), dim);
        rhs(stage.data(), k3.data());
        ops.axpby(1.0, y.data(), dt, k3.data(), stage.data(), dim);
        rhs(stage.data(), k4.data());
        ops.rk4_combine(y.data(), k1.data(), k2.data(), k3.data(), k4.data(), dt,
                        y.data(), dim);
        t = static_cast<double>(step + 1) * dt;

        for (double v : y)
            if (!std::isfinite(v))
                throw NumericalError("geodesic_integrate: non-finite state", step, t);
        double neg = 0.0, pos = 0.0;
        for (size_t i = 0; i < un; ++i) {
            const double rw = grid.w[i] * y[i];
            if (rw < 0.0) neg -= rw;
            else pos += rw;
        }
        if (pos <= 0.0 || neg / pos > opts.negative_mass_abort)
            throw NumericalError("geodesic_integrate: negative mass fraction above limit",
                                 step, t);

        const double h = hamiltonian_raw(grid, y.data(), y.data() + un);
        res.max_rel_h_drift = std::max(res.max_rel_h_drift, std::fabs(h - res.h0) / h_scale);

        if ((step + 1) % opts.sample_every == 0 || step + 1 == steps) sample(t);
    }

    res.final_state.rho = make_field(s0.rho.grid, Parity::even,
                                     std::vector<double>(y.begin(), y.begin() + un));
    res.final_state.phi = make_field(s0.rho.grid, Parity::even,
                                     std::vector<double>(y.begin() + un, y.end()));
    res.final_state.t = t;
    res.final_state.hamiltonian_0 = res.h0;
    return res;
}

PathActionResult path_action(const GridPtr& grid, const std::vector<GeodesicSample>& path,
                             double continuity_tol) {
    if (path.size() < 2) throw UsageError("path_action: need at least two samples");
    const RadialGrid& g = *grid;
    const size_t un = static_cast<size_t>(g.n);
    for (const auto& s : path)
        if (s.rho.size() != un || s.phi.size() != un)
            throw UsageError("path_action: sample length does not match grid");

    PathActionResult res;
    std::vector<double> mvals(path.size());
    for (size_t k = 0; k < path.size(); ++k) {
        // metric form evaluated on raw values (rho may carry tiny undershoot)
        std::vector<double> pot(un), e(un), gg(un), vg(un), rho_pot(un);
        coulomb_potential_raw(g, path[k].rho.data(), pot.data(), true);
        ddr_raw(g, path[k].phi.data(), e.data());
        const auto& ops = kernels::ops();
        ops.mul(path[k].rho.data(), pot.data(), rho_pot.data(), un);
        ops.mul(path[k].rho.data(), e.data(), gg.data(), un);
        vector_potential_raw(g, gg.data(), vg.data());
        mvals[k] = ops.dot4(g.w.data(), rho_pot.data(), e.data(), e.data(), un)
                   - ops.dot3(g.w.data(), gg.data(), vg.data(), un);
    }
    std::vector<double> kphi(un), kphi_next(un);
    for (size_t k = 0; k + 1 < path.size(); ++k) {
        const double dt = path[k + 1].t - path[k].t;
        if (!(dt > 0.0)) throw UsageError("path_action: sample times must increase");
        res.action += 0.5 * dt * (mvals[k] + mvals[k + 1]);

        apply_onsager_raw(g, path[k].rho.data(), path[k].phi.data(), kphi.data());
        apply_onsager_raw(g, path[k + 1].rho.data(), path[k + 1].phi.data(),
                          kphi_next.data());
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < un; ++i) {
            const double ct = (path[k + 1].rho[i] - path[k].rho[i]) / dt
                              + 0.5 * (kphi[i] + kphi_next[i]);
            num += g.w[i] * ct * ct;
            den += g.w[i] * kphi[i] * kphi[i];
        }
        const double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
        res.max_continuity_residual = std::max(res.max_continuity_residual, rel);
    }
    res.continuity_ok = res.max_continuity_residual <= continuity_tol;
    return res;
}

// --- W_K shooting -------------------------------------------------------------

namespace {

std::vector<RadialField> shooting_basis(const GridPtr& grid, const Density& rho0,
                                        int count) {
    // Gaussian bumps with widths tied to the initial datum's rms radius.
    const RadialGrid& g = *grid;
    const size_t un = static_cast<size_t>(g.n);
    std::vector<double> half_r2(un);
    for (size_t i = 0; i < un; ++i) half_r2[i] = 0.5 * g.r[i] * g.r[i];
    const double e2 = kernels::ops().dot3(g.w.data(), half_r2.data(),
                                          rho0.values().data(), un);
    const double scale = std::sqrt(std::max(2.0 * e2 / 3.0, 1e-6)); // per-axis std dev
    std::vector<RadialField> basis;
    for (int k = 0; k < count; ++k) {
        const double frac = count > 1 ? static_cast<double>(k) / (count - 1) : 0.0;
        const double sigma = scale * 0.35 * std::pow(3.0 / 0.35, frac);
        RadialField b = make_field(grid, Parity::even, "basis");
        for (int i = 0; i < g.n; ++i) {
            const double r = g.r[static_cast<size_t>(i)];
            b[i] = std::exp(-0.5 * r * r / (sigma * sigma));
        }
        basis.push_back(std::move(b));
    }
    return basis;
}

// dense symmetric solve (12x12 normal equations), Gaussian elimination with
// partial pivoting
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[static_cast<size_t>(r * n + col)])
                > std::fabs(a[static_cast<size_t>(piv * n + col)]))
                piv = r;
        if (std::fabs(a[static_cast<size_t>(piv * n + col)]) < 1e-300) return false;
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<size_t>(col * n + c)], a[static_cast<size_t>(piv * n + c)]);
            std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
        }
        const double d = a[static_cast<size_t>(col * n + col)];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<size_t>(r * n + col)] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                a[static_cast<size_t>(r * n + c)] -= f * a[static_cast<size_t>(col * n + c)];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < n; ++c)
            acc -= a[static_cast<size_t>(r * n + c)] * b[static_cast<size_t>(c)];
        b[static_cast<size_t>(r)] = acc / a[static_cast<size_t>(r * n + r)];
    }
    return true;
}

} // namespace

ShootingResult wk_distance_shooting(const Density& rho0, const Density& rho1,
                                    const ShootingOptions& opts) {
    const GridPtr grid = rho0.grid();
    require_same_grid(*grid, rho1.field, "wk_distance_shooting");
    if (std::fabs(rho0.mass - rho1.mass) > 1e-8)
        throw UsageError("wk_distance_shooting: endpoint masses differ");

    const RadialGrid& g = *grid;
    const size_t un = static_cast<size_t>(g.n);
    const int nb = opts.basis_size;
    const std::vector<RadialField> basis = shooting_basis(grid, rho0, nb);

    auto phi_of = [&](const std::vector<double>& c) {
        RadialField phi = make_field(grid, Parity::even);
        for (int k = 0; k < nb; ++k)
            kernels::ops().axpby(1.0, phi.values.data(), c[static_cast<size_t>(k)],
                                 basis[static_cast<size_t>(k)].values.data(),
                                 phi.values.data(), un);
        return phi;
    };

    GeodesicOptions gopt;
    gopt.t_end = 1.0;
    gopt.dt = opts.dt;
    gopt.sample_every = 1 << 30; // endpoints only
    gopt.scheme = opts.scheme;

    // terminal density for coefficients c
    auto terminal = [&](const std::vector<double>& c) -> std::vector<double> {
        GeodesicState s = make_geodesicstate_impl(rho0.field, phi_of(c));
        GeodesicResult r = geodesic_integrate(s, gopt);
        return r.final_state.rho.values;
    };

    auto l1_resid = [&](const std::vector<double>& rho_end) {
        double acc = 0.0;
        for (size_t i = 0; i < un; ++i)
            acc += g.w[i] * std::fabs(rho_end[i] - rho1.values()[i]);
        return acc;
    };

    ShootingResult out;
    std::vector<double> c(static_cast<size_t>(nb), 0.0);
    std::vector<double> rho_end = terminal(c);
    double resid = l1_resid(rho_end);
    double lambda = 1e-3;

    int it = 0;
    for (; it < opts.max_iterations && resid > opts.rtol; ++it) {
        // weighted least-squares residual e_i = sqrt(w_i) (rho_end - rho1)
        std::vector<double> e(un);
        for (size_t i = 0; i < un; ++i)
            e[i] = std::sqrt(g.w[i]) * (rho_end[i] - rho1.values()[i]);

        // forward-difference Jacobian, one geodesic solve per basis function
        const double fd = 1e-4;
        std::vector<double> jac(un * static_cast<size_t>(nb));
        for (int k = 0; k < nb; ++k) {
            std::vector<double> ck = c;
            ck[static_cast<size_t>(k)] += fd;
            const std::vector<double> rk = terminal(ck);
            for (size_t i = 0; i < un; ++i)
                jac[i * static_cast<size_t>(nb) + static_cast<size_t>(k)] =
                    std::sqrt(g.w[i]) * (rk[i] - rho_end[i]) / fd;
        }

        // normal equations with Levenberg damping
        std::vector<double> jtj(static_cast<size_t>(nb * nb), 0.0),
            jte(static_cast<size_t>(nb), 0.0);
        for (size_t i = 0; i < un; ++i) {
            const double* row = &jac[i * static_cast<size_t>(nb)];
            for (int a = 0; a < nb; ++a) {
                jte[static_cast<size_t>(a)] -= row[a] * e[i];
                for (int b = a; b < nb; ++b)
                    jtj[static_cast<size_t>(a * nb + b)] += row[a] * row[b];
            }
        }
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < a; ++b)
                jtj[static_cast<size_t>(a * nb + b)] = jtj[static_cast<size_t>(b * nb + a)];

        bool accepted = false;
        for (int tries = 0; tries < 8 && !accepted; ++tries) {
            std::vector<double> lhs = jtj, rhs = jte;
            for (int a = 0; a < nb; ++a)
                lhs[static_cast<size_t>(a * nb + a)] +=
                    lambda * (jtj[static_cast<size_t>(a * nb + a)] + 1e-12);
            if (!solve_dense(lhs, rhs, nb)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> cnew = c;
            for (int a = 0; a < nb; ++a) cnew[static_cast<size_t>(a)] += rhs[static_cast<size_t>(a)];
            std::vector<double> rho_new;
            double resid_new = HUGE_VAL;
            try {
                rho_new = terminal(cnew);
                resid_new = l1_resid(rho_new);
            } catch (const NumericalError&) {
                // diverged trial step; damp harder
            }
            if (resid_new < resid) {
                c = std::move(cnew);
                rho_end = std::move(rho_new);
                resid = resid_new;
                lambda = std::max(lambda / 3.0, 1e-10);
                accepted = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) break; // stalled
    }

    out.iterations = it;
    out.terminal_residual = resid;
    out.converged = resid <= opts.rtol;
    out.phi0 = phi_of(c);
    gauge_fix(g, rho0.values().data(), out.phi0.values.data());
    const double h = hamiltonian_raw(g, rho0.values().data(), out.phi0.values.data());
    out.wk_estimate = std::sqrt(std::max(2.0 * h, 0.0));
    return out;
}

// --- W1 ------------------------------------------------------------------------

double w1_radial(const Density& rho0, const Density& rho1) {
    const GridPtr grid = rho0.grid();
    require_same_grid(*grid, rho1.field, "w1_radial");
    if (std::fabs(rho0.mass - rho1.mass) > 1e-8)
        throw UsageError("w1_radial: masses differ");
    const RadialGrid& g = *grid;
    const int n = g.n;
    const size_t un = static_cast<size_t>(n);
    // radial mass functions F(r) = 4 pi int_0^r s^2 rho ds
    std::vector<double> f0(un), f1(un), diff(un);
    const double four_pi = 4.0 * std::numbers::pi;
    double acc0 = 0.0, acc1 = 0.0;
    f0[0] = f1[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        const double r0 = g.r[k - 1], r1 = g.r[k];
        acc0 += 0.5 * g.h * (r0 * r0 * rho0.values()[k - 1] + r1 * r1 * rho0.values()[k]);
        acc1 += 0.5 * g.h * (r0 * r0 * rho1.values()[k - 1] + r1 * r1 * rho1.values()[k]);
        f0[k] = four_pi * acc0;
        f1[k] = four_pi * acc1;
    }
    for (size_t i = 0; i < un; ++i) diff[i] = std::fabs(f0[i] - f1[i]);
    return kernels::ops().dot(g.w1d.data(), diff.data(), un);
}

double w1_lp_oracle(const Density& rho0, const Density& rho1, const CloudSpec& spec) {
    if (spec.pts_per_axis > 15)
        throw ResourceError("w1_lp_oracle: cloud exceeds 15^3 points");
    if (spec.pts_per_axis < 2) throw UsageError("w1_lp_oracle: cloud too small");
    const GridPtr grid = rho0.grid();
    require_same_grid(*grid, rho1.field, "w1_lp_oracle");
    if (std::fabs(rho0.mass - rho1.mass) > 1e-8)
        throw UsageError("w1_lp_oracle: masses differ");

    const RadialGrid& g = *grid;
    auto radial_at = [&](const Density& rho, double r) {
        if (r >= g.r_max) return 0.0;
        const double x = r / g.h;
        const int i = static_cast<int>(x);
        const double frac = x - i;
        const auto& v = rho.values();
        if (i + 1 >= g.n) return v[static_cast<size_t>(g.n - 1)];
        return (1.0 - frac) * v[static_cast<size_t>(i)] + frac * v[static_cast<size_t>(i + 1)];
    };

    const int m = spec.pts_per_axis;
    const double L = spec.half_extent;
    const double delta = 2.0 * L / m; // cell-centered lattice
    TransportProblem problem;
    double tot0 = 0.0, tot1 = 0.0;
    for (int ix = 0; ix < m; ++ix) {
        for (int iy = 0; iy < m; ++iy) {
            for (int iz = 0; iz < m; ++iz) {
                const std::array<double, 3> p = {-L + (ix + 0.5) * delta,
                                                 -L + (iy + 0.5) * delta,
                                                 -L + (iz + 0.5) * delta};
                const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                const double m0 = radial_at(rho0, r) * delta * delta * delta;
                const double m1 = radial_at(rho1, r) * delta * delta * delta;
                if (m0 > 0.0) {
                    problem.supply.push_back(m0);
                    problem.src.push_back(p);
                    tot0 += m0;
                }
                if (m1 > 0.0) {
                    problem.demand.push_back(m1);
                    problem.dst.push_back(p);
                    tot1 += m1;
                }
            }
        }
    }
    if (!(tot0 > 0.0) || !(tot1 > 0.0))
        throw UsageError("w1_lp_oracle: a density has no mass on the cloud");
    for (double& s : problem.supply) s /= tot0;
    for (double& d : problem.demand) d /= tot1;
    return solve_transport_min_cost(problem);
}

InequalityReport w1_wk_inequality_report(const std::vector<DistancePair>& pairs) {
    InequalityReport rep;
    for (const auto& p : pairs) {
        if (!p.converged)
            throw UsageError("w1_wk_inequality_report: pair lacks a converged shooting result");
        const double ratio = p.wk > 0.0 ? p.w1 / p.wk : 0.0;
        rep.ratios.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

} // namespace isolandau
