#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

// Finite-difference calculus on flat complex tori [0,1]^{2n} (n = 1 or 2
// complex dimensions).  Scalar potentials live on a uniform m^{2n} lattice;
// ddc() turns them into Hermitian (1,1)-form coefficient fields, and
// mixed_ma() wedges n of those into a measure.
//
// Conventions.  ddc = (i/2pi) d dbar, so in one complex variable the measure
// density of ddc(u) is Laplacian(u) / (4 pi) and the standard rotation-
// invariant reference weight on the plane has unit total mass.  A form field
// stores G_ij = (1/pi) * d^2 u / dz_i dzbar_j; for n = 1 the density is G_11,
// for n = 2 the wedge density of (G, H) is
//
//   G11 H22 + G22 H11 - 2 Re(G12 conj(H12)).
//
// Stencils.  For n = 1 the compact 5-point Laplacian is used.  For n = 2
// every second derivative is a product of centered first differences (wide
// diagonal and four-corner mixed stencils): with that choice the lattice
// symbols obey the Lagrange identity exactly, so pure second-derivative
// wedge masses vanish to roundoff and the total mixed mass equals the
// background mass for any potentials.
namespace pshlab::grid {

struct TorusGeometry {
  int n = 1;               // complex dimension, 1 or 2
  int m = 16;              // lattice points per real axis
  double theta_mass = 1.0; // total background mass (n = 1) or its square root base (n = 2)

  std::size_t num_cells() const;
  double cell_volume() const;
  // Diagonal coefficient of the flat background form: theta_mass for n = 1,
  // theta_mass / sqrt(2) for n = 2 (so the top wedge has mass theta_mass^2).
  double theta_coeff() const;
};

// Validated constructor: n in {1,2}, m >= 5, positive mass.
TorusGeometry make_torus(int n, int m, double theta_mass);

struct GridField {
  TorusGeometry geom;
  std::vector<double> v;  // row-major over (x1,y1[,x2,y2]) indices
};

// Hermitian (1,1)-form coefficients per cell.  For n = 1 only d11 is used.
struct FormField {
  TorusGeometry geom;
  std::vector<double> d11;
  std::vector<double> d22;
  std::vector<double> re12;
  std::vector<double> im12;
};

struct MeasureField {
  TorusGeometry geom;
  std::vector<double> mass;  // signed mass per cell

  double total() const;
};

GridField make_field(const TorusGeometry& geom);

// Evaluate f at the lattice points; f receives {x,y} or {x1,y1,x2,y2} with
// coordinates i/m in [0,1).
GridField sample(const TorusGeometry& geom,
                 const std::function<double(std::span<const double>)>& f);

// Discrete ddc of a potential.
FormField ddc(const GridField& u);

// Constant background form; the second overload overrides the total mass.
FormField theta_form(const TorusGeometry& geom);
FormField theta_form(const TorusGeometry& geom, double mass);

FormField add(const FormField& a, const FormField& b);

// Wedge of n form fields into a measure (n = geometry dimension).  The
// density formula is symmetric under swapping the arguments, bit for bit.
MeasureField mixed_ma(std::span<const FormField> forms);

// sum over cells of field * mass.
double integrate(const GridField& f, const MeasureField& mu);

// Half the l1 distance between the mass vectors.
double tv_distance(const MeasureField& a, const MeasureField& b);

// First cell where the form fails to be positive semidefinite beyond tol
// (smallest eigenvalue < -tol), if any.
std::optional<std::size_t> psh_violation(const FormField& form, double tol);

// One-sided derivative of h at 0+ from samples at a0, a0/2, a0/4: the
// step-halving quotient D(a) = (h(a) - h(a/2)) / (a/2) is extrapolated once,
// which is exact when h is quadratic in a.
double dini_right(const std::function<double(double)>& h, double a0);

// Lattice dump: one row per cell, "i,j[,k,l],value".
void write_csv(const std::filesystem::path& path, const GridField& f);

}  // namespace pshlab::grid
