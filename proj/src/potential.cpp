#include "isolandau/potential.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "isolandau/errors.hpp"

namespace isolandau {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// y_i = int_0^{r_i} f ds by the composite trapezoid rule.
void cumtrapz(const RadialGrid& grid, const double* f, double* y) {
    y[0] = 0.0;
    const double half_h = 0.5 * grid.h;
    for (int i = 1; i < grid.n; ++i) y[i] = y[i - 1] + half_h * (f[i - 1] + f[i]);
}

// y_i = int_{r_i}^{r_max} f ds.
void rev_cumtrapz(const RadialGrid& grid, const double* f, double* y) {
    const int n = grid.n;
    y[n - 1] = 0.0;
    const double half_h = 0.5 * grid.h;
    for (int i = n - 2; i >= 0; --i) y[i] = y[i + 1] + half_h * (f[i] + f[i + 1]);
}

// Euclidean transposes of the two cumulative maps above.
void cumtrapz_transpose(const RadialGrid& grid, const double* z, double* y) {
    const int n = grid.n;
    const double h = grid.h;
    double suffix = 0.0; // sum_{i >= k+1} z_i
    for (int k = n - 1; k >= 1; --k) {
        y[k] = 0.5 * h * z[k] + h * suffix;
        suffix += z[k];
    }
    y[0] = 0.5 * h * suffix;
}

void rev_cumtrapz_transpose(const RadialGrid& grid, const double* z, double* y) {
    const int n = grid.n;
    const double h = grid.h;
    double prefix = 0.0; // sum_{i <= k-1} z_i
    y[0] = 0.5 * h * z[0];
    for (int k = 1; k <= n - 2; ++k) {
        prefix += z[k - 1];
        y[k] = 0.5 * h * z[k] + h * prefix;
    }
    y[n - 1] = 0.5 * h * (prefix + z[n - 2]);
}

int thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ISO_LANDAU_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return static_cast<int>(hw);
}

} // namespace

// The cumulative rules use an exact-on-parity rule for the first cell (the
// integrands vanish like s^2 and s^3 at the origin, where the plain
// trapezoid loses an order) and carry the Euler-Maclaurin endpoint
// correction -(h^2/12)[F'(r) - F'(h)] over the composite part. Without
// these the O(h^2) error profile of int_0^r s^2 rho / r tends to a nonzero
// constant at the origin, which kinks the derivative of the potential
// across the first node.

void coulomb_potential_raw(const RadialGrid& grid, const double* rho, double* out,
                           bool clamp_negative, double* mass_out) {
    const int n = grid.n;
    const double h = grid.h;
    const double em = h * h / 12.0;
    std::vector<double> v(static_cast<std::size_t>(n)), dv(static_cast<std::size_t>(n)),
        f(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n)),
        b(static_cast<std::size_t>(n)), tail(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = clamp_negative && rho[i] < 0.0 ? 0.0 : rho[i];
    ddr_raw(grid, v.data(), dv.data());

    for (int i = 0; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        f[static_cast<std::size_t>(i)] = r * r * v[static_cast<std::size_t>(i)];
    }
    cumtrapz(grid, f.data(), a.data()); // int_0^r s^2 rho
    // first cell, exact for even quadratics: h^3 (2 rho_0/15 + rho_1/5)
    const double a1 = h * h * h * (2.0 * v[0] / 15.0 + v[1] / 5.0);
    const double c1 = 0.5 * h * f[1]; // the trapezoid's first cell
    const double fp1 = 2.0 * grid.r[1] * v[1] + grid.r[1] * grid.r[1] * dv[1];
    a[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        const std::size_t k = static_cast<std::size_t>(i);
        const double fp = 2.0 * r * v[k] + r * r * dv[k]; // (s^2 rho)'
        a[k] = a[k] - c1 + a1 - em * (fp - fp1);
    }

    for (int i = 0; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        f[static_cast<std::size_t>(i)] = r * v[static_cast<std::size_t>(i)];
    }
    rev_cumtrapz(grid, f.data(), tail.data()); // int_r^rmax s rho
    const double gp_end = v[static_cast<std::size_t>(n - 1)]
                          + grid.r_max * dv[static_cast<std::size_t>(n - 1)];
    for (int i = 0; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        const std::size_t k = static_cast<std::size_t>(i);
        b[k] = tail[k] - em * (gp_end - (v[k] + r * dv[k]));
    }

    out[0] = b[0];
    for (int i = 1; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        out[i] = a[k] / grid.r[k] + b[k];
    }
    if (mass_out) *mass_out = kFourPi * a[static_cast<std::size_t>(n - 1)];
}

void vector_potential_raw(const RadialGrid& grid, const double* g, double* out,
                          double* moment_out) {
    const int n = grid.n;
    const double h = grid.h;
    const double em = h * h / 12.0;
    std::vector<double> dg(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n)),
        p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    ddr_odd_raw(grid, g, dg.data());

    for (int i = 0; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        f[static_cast<std::size_t>(i)] = r * r * r * g[i];
    }
    cumtrapz(grid, f.data(), p.data()); // int_0^r s^3 g
    // first cell, exact for odd-linear g: (h^4/5) g_1
    const double p1 = h * h * h * h * g[1] / 5.0;
    const double c1 = 0.5 * h * f[1];
    const double hp1 = 3.0 * grid.r[1] * grid.r[1] * g[1]
                       + grid.r[1] * grid.r[1] * grid.r[1] * dg[1];
    p[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        const std::size_t k = static_cast<std::size_t>(i);
        const double hp = 3.0 * r * r * g[i] + r * r * r * dg[k]; // (s^3 g)'
        p[k] = p[k] - c1 + p1 - em * (hp - hp1);
    }

    rev_cumtrapz(grid, g, q.data()); // int_r^rmax g
    const double dg_end = dg[static_cast<std::size_t>(n - 1)];
    for (int i = 0; i < n; ++i)
        q[static_cast<std::size_t>(i)] -= em * (dg_end - dg[static_cast<std::size_t>(i)]);

    out[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        const std::size_t k = static_cast<std::size_t>(i);
        out[i] = r * q[k] / 3.0 + p[k] / (3.0 * r * r);
    }
    if (moment_out) *moment_out = kFourPi * p[static_cast<std::size_t>(n - 1)];
}

void coulomb_potential_transpose_raw(const RadialGrid& grid, const double* y, double* out) {
    const int n = grid.n;
    const std::size_t un = static_cast<std::size_t>(n);
    const double h = grid.h;
    const double em = h * h / 12.0;
    const double r1 = grid.r[1];
    std::vector<double> t(un), s(un), acc(un, 0.0), tmp(un);

    // A path adjoint; t = Dr y with Dr = 1/r (0 at the origin).
    for (int i = 0; i < n; ++i)
        t[static_cast<std::size_t>(i)] =
            i == 0 ? 0.0 : y[i] / grid.r[static_cast<std::size_t>(i)];
    double tsum = 0.0;
    for (std::size_t i = 0; i < un; ++i) tsum += t[i];

    cumtrapz_transpose(grid, t.data(), s.data()); // C^T t
    for (std::size_t i = 0; i < un; ++i) {
        const double r = grid.r[i];
        acc[i] += r * r * s[i] - em * 2.0 * r * t[i]; // R^2 C^T t - em 2R t
        tmp[i] = r * r * t[i];
    }
    ddr_transpose_raw(grid, tmp.data(), s.data()); // D^T (R^2 t)
    for (std::size_t i = 0; i < un; ++i) acc[i] -= em * s[i];
    // first-cell replacement and the shifted correction origin (rank one in t)
    acc[1] -= tsum * 0.5 * h * r1 * r1;              // remove trapezoid first cell
    acc[0] += tsum * 2.0 * h * h * h / 15.0;         // exact even-quadratic rule
    acc[1] += tsum * h * h * h / 5.0;
    acc[1] += em * tsum * 2.0 * r1;                  // + em Gf^T e_1
    std::fill(tmp.begin(), tmp.end(), 0.0);
    tmp[1] = r1 * r1;
    ddr_transpose_raw(grid, tmp.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) acc[i] += em * tsum * s[i];

    // B path: out += [R Crev^T + em (I + D^T R) - em (I + D^T R) e_{n-1} 1^T] y
    rev_cumtrapz_transpose(grid, y, s.data());
    double ysum = 0.0;
    for (std::size_t i = 0; i < un; ++i) ysum += y[i];
    for (std::size_t i = 0; i < un; ++i) {
        acc[i] += grid.r[i] * s[i] + em * y[i];
        tmp[i] = grid.r[i] * y[i];
    }
    ddr_transpose_raw(grid, tmp.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) acc[i] += em * s[i];
    std::fill(tmp.begin(), tmp.end(), 0.0);
    tmp[un - 1] = grid.r_max;
    ddr_transpose_raw(grid, tmp.data(), s.data());
    acc[un - 1] -= em * ysum;
    for (std::size_t i = 0; i < un; ++i) acc[i] -= em * ysum * s[i];

    for (std::size_t i = 0; i < un; ++i) out[i] = acc[i];
}

void vector_potential_transpose_raw(const RadialGrid& grid, const double* y, double* out) {
    const int n = grid.n;
    const std::size_t un = static_cast<std::size_t>(n);
    const double h = grid.h;
    const double em = h * h / 12.0;
    const double r1 = grid.r[1];
    std::vector<double> t(un), s(un), acc(un, 0.0), tmp(un);

    // P path adjoint; t = Da y with Da = 1/(3 r^2) (0 at the origin).
    for (int i = 0; i < n; ++i) {
        const double r = grid.r[static_cast<std::size_t>(i)];
        t[static_cast<std::size_t>(i)] = i == 0 ? 0.0 : y[i] / (3.0 * r * r);
    }
    double tsum = 0.0;
    for (std::size_t i = 0; i < un; ++i) tsum += t[i];

    cumtrapz_transpose(grid, t.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) {
        const double r = grid.r[i];
        acc[i] += r * r * r * s[i] - em * 3.0 * r * r * t[i];
        tmp[i] = r * r * r * t[i];
    }
    ddr_odd_transpose_raw(grid, tmp.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) acc[i] -= em * s[i];
    acc[1] -= tsum * 0.5 * h * r1 * r1 * r1;       // remove trapezoid first cell
    acc[1] += tsum * h * h * h * h / 5.0;          // exact odd-linear rule
    acc[1] += em * tsum * 3.0 * r1 * r1;           // + em Gh^T e_1
    std::fill(tmp.begin(), tmp.end(), 0.0);
    tmp[1] = r1 * r1 * r1;
    ddr_odd_transpose_raw(grid, tmp.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) acc[i] += em * tsum * s[i];

    // Q path through Db = r/3:
    // out += [Crev^T + em D_o^T - em D_o^T e_{n-1} 1^T] (Db y)
    for (std::size_t i = 0; i < un; ++i) t[i] = grid.r[i] * y[i] / 3.0;
    rev_cumtrapz_transpose(grid, t.data(), s.data());
    double qsum = 0.0;
    for (std::size_t i = 0; i < un; ++i) qsum += t[i];
    for (std::size_t i = 0; i < un; ++i) acc[i] += s[i];
    ddr_odd_transpose_raw(grid, t.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) acc[i] += em * s[i];
    std::fill(tmp.begin(), tmp.end(), 0.0);
    tmp[un - 1] = 1.0;
    ddr_odd_transpose_raw(grid, tmp.data(), s.data());
    for (std::size_t i = 0; i < un; ++i) acc[i] -= em * qsum * s[i];

    for (std::size_t i = 0; i < un; ++i) out[i] = acc[i];
}

PotentialResult newtonian_potential(const RadialGrid& grid, const Density& rho) {
    require_same_grid(grid, rho.field, "newtonian_potential");
    PotentialResult res;
    res.u = make_field(rho.grid(), Parity::even, "potential");
    coulomb_potential_raw(grid, rho.values().data(), res.u.values.data(), true,
                          &res.total_mass_used);
    return res;
}

PotentialResult vector_newtonian_potential(const RadialGrid& grid, const RadialField& g) {
    require_same_grid(grid, g, "vector_newtonian_potential");
    require_parity(g, Parity::odd, "vector_newtonian_potential");
    PotentialResult res;
    res.u = make_field(g.grid, Parity::odd, "potential");
    vector_potential_raw(grid, g.values.data(), res.u.values.data(), &res.total_mass_used);
    return res;
}

std::vector<double> potential_oracle_3d(const std::vector<CloudPoint>& cloud,
                                        double cell_volume,
                                        const std::vector<std::array<double, 3>>& queries) {
    constexpr std::size_t kMaxCloud = 40ull * 40ull * 40ull;
    if (cloud.size() > kMaxCloud)
        throw ResourceError("potential_oracle_3d: cloud exceeds 40^3 points");
    if (!(cell_volume > 0.0)) throw UsageError("potential_oracle_3d: cell_volume <= 0");

    // equal-volume ball average of 1/(4 pi |y|) over one cell is r_b^2 / 2
    const double r_ball = std::cbrt(3.0 * cell_volume / kFourPi);
    const double self_term = 0.5 * r_ball * r_ball;
    const double eps2 = 1e-24 * r_ball * r_ball;

    std::vector<double> result(queries.size(), 0.0);
    auto work = [&](std::size_t q0, std::size_t q1) {
        for (std::size_t q = q0; q < q1; ++q) {
            const auto& x = queries[q];
            double acc = 0.0;
            for (const auto& p : cloud) {
                const double dx = x[0] - p.x[0];
                const double dy = x[1] - p.x[1];
                const double dz = x[2] - p.x[2];
                const double d2 = dx * dx + dy * dy + dz * dz;
                if (d2 < eps2) {
                    acc += p.rho * self_term;
                } else {
                    acc += p.rho * cell_volume / (kFourPi * std::sqrt(d2));
                }
            }
            result[q] = acc;
        }
    };

    const int nthreads = thread_budget();
    if (nthreads <= 1 || queries.size() < 8) {
        work(0, queries.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (queries.size() + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const std::size_t lo = static_cast<std::size_t>(t) * chunk;
            if (lo >= queries.size()) break;
            const std::size_t hi = std::min(queries.size(), lo + chunk);
            pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

} // namespace isolandau
