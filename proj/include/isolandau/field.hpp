#pragma once

#include <memory>
#include <string>
#include <vector>

namespace isolandau {

// Radial discretization of R^3 for radially symmetric data. Scalars are
// EVEN in r (f'(0) = 0); radial components of vector fields are ODD
// (g(0) = 0). All volume integrals reduce to 4*pi * int_0^rmax f(r) r^2 dr.
enum class Parity { even, odd };

struct RadialGrid {
    int n = 0;
    double r_max = 0.0;
    double h = 0.0;
    std::vector<double> r;    // nodes, r_i = i*h
    std::vector<double> w;    // 3D quadrature weights 4*pi*r^2 * trapezoid; w[0] = 0
    std::vector<double> w1d;  // plain 1D trapezoid weights on [0, r_max]
    unsigned long id = 0;     // identity for grid-mismatch checks
};

using GridPtr = std::shared_ptr<const RadialGrid>;

struct RadialField {
    GridPtr grid;
    std::vector<double> values;
    Parity parity = Parity::even;
    std::string units;

    int n() const { return grid ? grid->n : 0; }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

// Nonnegative EVEN field with cached mass; the state of the flow.
struct Density {
    RadialField field;
    double mass = 0.0;

    const GridPtr& grid() const { return field.grid; }
    const std::vector<double>& values() const { return field.values; }
};

GridPtr build_uniform_grid(int n, double r_max);

RadialField make_field(const GridPtr& grid, Parity parity, std::string units = {});
RadialField make_field(const GridPtr& grid, Parity parity, std::vector<double> values,
                       std::string units = {});

// Builds a Density from an EVEN field. Negative entries are a usage error
// (time steppers clip before re-wrapping). With normalize set, the values
// are rescaled so that the mass is 1.
Density make_density(RadialField field, bool normalize = false);

// Sum w_i f_i; fixed-order summation, EVEN integrands only.
double integrate(const RadialGrid& grid, const RadialField& f);
double integrate(const RadialGrid& grid, const std::vector<double>& even_values);

// d/dr of an EVEN field; ODD result. Centered second order in the interior,
// exact zero at r = 0, one-sided second order at r_max.
RadialField ddr(const RadialGrid& grid, const RadialField& f);

// Divergence g' + 2 g/r of an ODD radial component; EVEN result. The r -> 0
// limit is 3 g'(0).
RadialField div_radial(const RadialGrid& grid, const RadialField& g);

// Laplacian f'' + 2 f'/r of an EVEN field; the r -> 0 limit is 3 f''(0).
RadialField laplacian_radial(const RadialGrid& grid, const RadialField& f);

// Shared validation helpers.
void require_same_grid(const RadialGrid& grid, const RadialField& f, const char* where);
void require_parity(const RadialField& f, Parity expected, const char* where);

// Raw stencils on value arrays (used by hot loops that avoid field wrappers).
void ddr_raw(const RadialGrid& grid, const double* f, double* out);
void div_radial_raw(const RadialGrid& grid, const double* g, double* out);
void laplacian_radial_raw(const RadialGrid& grid, const double* f, double* out);
// derivative of an ODD array (odd extension at the origin)
void ddr_odd_raw(const RadialGrid& grid, const double* g, double* out);
// Euclidean transposes of the stencil matrices (adjoint-based assemblies).
void ddr_transpose_raw(const RadialGrid& grid, const double* y, double* out);
void ddr_odd_transpose_raw(const RadialGrid& grid, const double* y, double* out);

} // namespace isolandau
