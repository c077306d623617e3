#include "isolandau/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "isolandau/errors.hpp"

namespace isolandau::kernels {

namespace detail {
extern const Ops scalar_ops;
#ifdef ISOLANDAU_HAVE_AVX2_TU
extern const Ops avx2_ops;
#endif
} // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(ISOLANDAU_HAVE_AVX2_TU) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    const char* env = std::getenv("ISO_LANDAU_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!cpu_has_avx2())
                throw UsageError("ISO_LANDAU_SIMD=avx2 but AVX2 is not available");
            return Backend::avx2;
        }
        // anything else (incl. "auto") falls through to detection
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = detect_backend();

} // namespace

bool backend_available(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

const Ops& ops(Backend b) {
    switch (b) {
    case Backend::scalar:
        return detail::scalar_ops;
    case Backend::avx2:
#ifdef ISOLANDAU_HAVE_AVX2_TU
        if (cpu_has_avx2()) return detail::avx2_ops;
#endif
        throw UsageError("AVX2 kernel backend is not available on this machine");
    }
    throw UsageError("unknown kernel backend");
}

const Ops& ops() { return ops(g_backend); }

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
    if (!backend_available(b))
        throw UsageError("requested kernel backend is not available on this machine");
    g_backend = b;
}

const char* backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

} // namespace isolandau::kernels
