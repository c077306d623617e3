#include "isolandau/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2/FMA variants. Reductions use a fixed 4-lane blocked accumulation
// pattern, so results are bit-reproducible run to run; they differ from the
// scalar ascending-order sums only by reduction rounding.

namespace isolandau::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double dot3_avx2(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        acc = _mm256_fmadd_pd(p, _mm256_loadu_pd(y + i), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * x[i] * y[i];
    return total;
}

double dot4_avx2(const double* w, const double* x, const double* y, const double* z,
                 std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        p = _mm256_mul_pd(p, _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(p, _mm256_loadu_pd(z + i), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * x[i] * y[i] * z[i];
    return total;
}

double max_val_avx2(const double* x, std::size_t n) {
    double m = -HUGE_VAL;
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vm = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
        __m128d lo = _mm256_castpd256_pd128(vm);
        __m128d hi = _mm256_extractf128_pd(vm, 1);
        lo = _mm_max_pd(lo, hi);
        __m128d sw = _mm_unpackhi_pd(lo, lo);
        m = _mm_cvtsd_f64(_mm_max_sd(lo, sw));
    }
    for (; i < n; ++i) m = x[i] > m ? x[i] : m;
    return m;
}

double max_abs_avx2(const double* x, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d vm = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vm = _mm256_max_pd(vm, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    __m128d lo = _mm256_castpd256_pd128(vm);
    __m128d hi = _mm256_extractf128_pd(vm, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    double m = _mm_cvtsd_f64(_mm_max_sd(lo, sw));
    for (; i < n; ++i) {
        const double a = std::fabs(x[i]);
        m = a > m ? a : m;
    }
    return m;
}

void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void axpby_avx2(double a, const double* x, double b, const double* y, double* out,
                std::size_t n) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t));
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void rk4_combine_avx2(const double* y0, const double* k1, const double* k2,
                      const double* k3, const double* k4, double dt, double* out,
                      std::size_t n) {
    const double c = dt / 6.0;
    const __m256d vc = _mm256_set1_pd(c), v2 = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
        __m256d m = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
        s = _mm256_fmadd_pd(v2, m, s);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vc, s, _mm256_loadu_pd(y0 + i)));
    }
    for (; i < n; ++i)
        out[i] = y0[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double coulomb_pair_sum_avx2(const double* r, const double* u, const double* c,
                             std::size_t n) {
    const __m256d two_thirds = _mm256_set1_pd(2.0 / 3.0);
    const __m256d zero = _mm256_setzero_pd();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (c[i] == 0.0) continue;
        const double ri = r[i], ui = u[i];
        const __m256d vri = _mm256_set1_pd(ri);
        const __m256d vri2 = _mm256_set1_pd(ri * ri);
        const __m256d vui = _mm256_set1_pd(ui);
        const __m256d vui2 = _mm256_set1_pd(ui * ui);
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d rj = _mm256_loadu_pd(r + j);
            const __m256d uj = _mm256_loadu_pd(u + j);
            const __m256d cj = _mm256_loadu_pd(c + j);
            const __m256d rmax = _mm256_max_pd(vri, rj);
            const __m256d rmin = _mm256_min_pd(vri, rj);
            // zero out 1/max where max == 0 (both points at the origin)
            const __m256d ok = _mm256_cmp_pd(rmax, zero, _CMP_GT_OQ);
            const __m256d inv = _mm256_and_pd(ok, _mm256_div_pd(_mm256_set1_pd(1.0), rmax));
            const __m256d rj2 = _mm256_mul_pd(rj, rj);
            const __m256d usum = _mm256_fmadd_pd(uj, uj, vui2);
            __m256d t1 = _mm256_mul_pd(_mm256_mul_pd(usum, vri2), _mm256_mul_pd(rj2, inv));
            __m256d min3 = _mm256_mul_pd(_mm256_mul_pd(rmin, rmin), rmin);
            __m256d t2 = _mm256_mul_pd(two_thirds, _mm256_mul_pd(_mm256_mul_pd(vui, uj), min3));
            acc = _mm256_fmadd_pd(cj, _mm256_sub_pd(t1, t2), acc);
        }
        double row = hsum(acc);
        for (; j < n; ++j) {
            const double rj = r[j], uj = u[j];
            const double rmx = ri > rj ? ri : rj;
            const double rmn = ri < rj ? ri : rj;
            const double inv = rmx > 0.0 ? 1.0 / rmx : 0.0;
            row += c[j] * ((ui * ui + uj * uj) * ri * ri * rj * rj * inv
                           - (2.0 / 3.0) * ui * uj * rmn * rmn * rmn);
        }
        total += c[i] * row;
    }
    return total;
}

} // namespace

extern const Ops avx2_ops;
const Ops avx2_ops = {
    sum_avx2,   dot_avx2,   dot3_avx2,        dot4_avx2,
    max_val_avx2, max_abs_avx2,
    mul_avx2,   axpby_avx2, rk4_combine_avx2, coulomb_pair_sum_avx2,
};

} // namespace isolandau::kernels::detail
