#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "isolandau/errors.hpp"
#include "isolandau/kernels.hpp"

using namespace isolandau;
namespace k = isolandau::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = 0.5,
                               double hi = 1.5) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

} // namespace

TEST_CASE("scalar backend is always available") {
    CHECK(k::backend_available(k::Backend::scalar));
    CHECK(std::strcmp(k::backend_name(k::Backend::scalar), "scalar") == 0);
}

TEST_CASE("kernel backends agree on every entry point") {
    if (!k::backend_available(k::Backend::avx2)) {
        MESSAGE("AVX2 unavailable; equivalence covered by the scalar path only");
        return;
    }
    const k::Ops& s = k::ops(k::Backend::scalar);
    const k::Ops& v = k::ops(k::Backend::avx2);
    std::mt19937_64 rng(991);

    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 33u, 100u, 1023u, 1024u, 2049u}) {
        const auto w = random_vec(rng, n);
        const auto x = random_vec(rng, n);
        const auto y = random_vec(rng, n);
        const auto z = random_vec(rng, n, -1.0, 1.0);

        CHECK(s.sum(x.data(), n) == doctest::Approx(v.sum(x.data(), n)).epsilon(1e-13));
        CHECK(s.dot(x.data(), y.data(), n)
              == doctest::Approx(v.dot(x.data(), y.data(), n)).epsilon(1e-13));
        CHECK(s.dot3(w.data(), x.data(), y.data(), n)
              == doctest::Approx(v.dot3(w.data(), x.data(), y.data(), n)).epsilon(1e-13));
        CHECK(s.dot4(w.data(), x.data(), y.data(), z.data(), n)
              == doctest::Approx(v.dot4(w.data(), x.data(), y.data(), z.data(), n))
                     .epsilon(1e-13));
        CHECK(s.max_val(z.data(), n) == v.max_val(z.data(), n));
        CHECK(s.max_abs(z.data(), n) == v.max_abs(z.data(), n));

        std::vector<double> out_s(n), out_v(n);
        s.mul(x.data(), y.data(), out_s.data(), n);
        v.mul(x.data(), y.data(), out_v.data(), n);
        CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);

        s.axpby(0.7, x.data(), -1.3, y.data(), out_s.data(), n);
        v.axpby(0.7, x.data(), -1.3, y.data(), out_v.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(out_s[i] == doctest::Approx(out_v[i]).epsilon(1e-15));

        const auto k2 = random_vec(rng, n), k3 = random_vec(rng, n),
                   k4 = random_vec(rng, n);
        s.rk4_combine(x.data(), y.data(), k2.data(), k3.data(), k4.data(), 1e-3,
                      out_s.data(), n);
        v.rk4_combine(x.data(), y.data(), k2.data(), k3.data(), k4.data(), 1e-3,
                      out_v.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(out_s[i] == doctest::Approx(out_v[i]).epsilon(1e-15));
    }

    // pair-interaction kernel: ascending radii including the origin
    for (std::size_t n : {2u, 9u, 64u, 257u}) {
        std::vector<double> r(n);
        const auto u = random_vec(rng, n, -1.0, 1.0);
        const auto c = random_vec(rng, n, 0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<double>(i) * 0.01;
        const double a = s.coulomb_pair_sum(r.data(), u.data(), c.data(), n);
        const double b = v.coulomb_pair_sum(r.data(), u.data(), c.data(), n);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("kernels are deterministic run to run") {
    std::mt19937_64 rng(7);
    const std::size_t n = 1537;
    const auto x = random_vec(rng, n), y = random_vec(rng, n);
    const k::Ops& ops = k::ops();
    const double a = ops.dot(x.data(), y.data(), n);
    const double b = ops.dot(x.data(), y.data(), n);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("pair kernel handles both points at the origin") {
    const double r[2] = {0.0, 0.0};
    const double u[2] = {1.0, -2.0};
    const double c[2] = {1.0, 1.0};
    const double val = k::ops(k::Backend::scalar).coulomb_pair_sum(r, u, c, 2);
    CHECK(val == 0.0); // integrand carries r^2 r'^2
}

TEST_CASE("backend selection round-trips") {
    const k::Backend before = k::active_backend();
    k::set_backend(k::Backend::scalar);
    CHECK(k::active_backend() == k::Backend::scalar);
    k::set_backend(before);
    if (!k::backend_available(k::Backend::avx2))
        CHECK_THROWS_AS(k::set_backend(k::Backend::avx2), UsageError);
}
