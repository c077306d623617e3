#include "isolandau/kernels.hpp"

#include <cmath>

// Reference kernels. Fixed ascending-index summation order for
// reproducibility; the AVX2 variants must agree within the tolerances
// checked by the kernel equivalence tests.

namespace isolandau::kernels::detail {

namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double dot3_scalar(const double* w, const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

double dot4_scalar(const double* w, const double* x, const double* y, const double* z,
                   std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i] * z[i];
    return acc;
}

double max_val_scalar(const double* x, std::size_t n) {
    double m = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) m = x[i] > m ? x[i] : m;
    return m;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(x[i]);
        m = a > m ? a : m;
    }
    return m;
}

void mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void axpby_scalar(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void rk4_combine_scalar(const double* y0, const double* k1, const double* k2,
                        const double* k3, const double* k4, double dt, double* out,
                        std::size_t n) {
    const double c = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y0[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double coulomb_pair_sum_scalar(const double* r, const double* u, const double* c,
                               std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (c[i] == 0.0) continue;
        const double ri = r[i], ui = u[i], ui2 = ui * ui;
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double rj = r[j], uj = u[j];
            const double rmax = ri > rj ? ri : rj;
            const double rmin = ri < rj ? ri : rj;
            const double inv = rmax > 0.0 ? 1.0 / rmax : 0.0; // r=r'=0 integrand vanishes
            const double kern = (ui2 + uj * uj) * ri * ri * rj * rj * inv
                                - (2.0 / 3.0) * ui * uj * rmin * rmin * rmin;
            row += c[j] * kern;
        }
        total += c[i] * row;
    }
    return total;
}

} // namespace

extern const Ops scalar_ops;
const Ops scalar_ops = {
    sum_scalar,   dot_scalar,   dot3_scalar,        dot4_scalar,
    max_val_scalar, max_abs_scalar,
    mul_scalar,   axpby_scalar, rk4_combine_scalar, coulomb_pair_sum_scalar,
};

} // namespace isolandau::kernels::detail
