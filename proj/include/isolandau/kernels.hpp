#pragma once

#include <cstddef>

namespace isolandau::kernels {

// Data-parallel inner loops used by the field, potential and diagnostics
// code. Every entry point has a scalar reference implementation and, on
// x86-64, an AVX2 variant; the backend is picked once at startup (cpuid,
// overridable with ISO_LANDAU_SIMD=scalar|avx2|auto) and is fixed for the
// lifetime of the process unless set_backend is called. Each backend is
// individually deterministic: results are bit-reproducible across runs for
// a fixed backend, n and input. The two backends may differ by reduction
// rounding; the equivalence tests bound that difference.
enum class Backend { scalar, avx2 };

struct Ops {
    // reductions
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*dot3)(const double* w, const double* x, const double* y, std::size_t n);
    double (*dot4)(const double* w, const double* x, const double* y, const double* z,
                   std::size_t n);
    double (*max_val)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);

    // elementwise
    void (*mul)(const double* x, const double* y, double* out, std::size_t n);
    // out = a*x + b*y
    void (*axpby)(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n);
    // out = y0 + (dt/6)*(k1 + 2 k2 + 2 k3 + k4)
    void (*rk4_combine)(const double* y0, const double* k1, const double* k2,
                        const double* k3, const double* k4, double dt, double* out,
                        std::size_t n);

    // Pair-interaction sum for the Coulomb-kernel double quadrature:
    //   S = sum_i c_i * sum_j c_j [ (u_i^2+u_j^2) r_i^2 r_j^2 / max(r_i,r_j)
    //                               - (2/3) u_i u_j min(r_i,r_j)^3 ]
    // (the angular average of the 1/|x-y| kernel for radial data).
    double (*coulomb_pair_sum)(const double* r, const double* u, const double* c,
                               std::size_t n);
};

const Ops& ops();                  // active backend
const Ops& ops(Backend b);         // specific backend (throws if unavailable)
Backend active_backend();
void set_backend(Backend b);       // throws UsageError if unavailable
bool backend_available(Backend b);
const char* backend_name(Backend b);

} // namespace isolandau::kernels
