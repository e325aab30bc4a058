#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/lift.hpp"

// Product of a one-dimensional complex torus base with a projective-line
// fiber.  The fiber is covered by two unit-disk charts glued along |w| = 1
// (chart 0: z = w, chart 1: z = 1/w); each chart carries a uniform
// fiber_cells x fiber_cells grid on [-1,1]^2 with two rings of padding
// points outside, so that all stencils at owned cells stay in range.  Cell
// centers sit at half-integer multiples of the spacing; no center lies on
// the glue circle or at the chart-1 origin (the degenerate locus of the
// lift).
//
// A cell is owned by chart 0 when |w_c| <= 1 and by chart 1 when |w_c| < 1,
// so every fiber point is counted exactly once.  Fiber masses are divided
// by fs_norm, the quadrature mass of the reference fiber weight over the
// owned cells, so the discrete fiber reference measure has total mass one
// by construction.
//
// ma_lift() forms the discrete Monge-Ampere measure of a product potential
// against the background (base theta) x (c0 * fiber reference form):
//
//   t_bb = theta + (d_xx + d_yy) pot / 4pi        (compact, base-periodic)
//   t_ff = c0 * fs_density + (d_uu + d_vv) pot / 4pi
//   t_bf = [(d_xu + d_yv) + i (d_xv - d_yu)] / 4pi (centered, 2h wide)
//   density = 2 (t_bb t_ff - |t_bf|^2)
//
// Negative densities are clamped to zero (clamped_mass tracks how much) and
// cells whose 2x2 coefficient matrix dips below -1e-3 in smallest eigenvalue
// are counted as warnings.  The chart-1 cells hugging the degenerate locus
// (|w_c| <= 1.1 h) are excluded from the measure: their mass is estimated
// separately by extrapolating the mean density over the surrounding ring
// (1.1 h < |w_c| <= 2.5 h) across the excluded area, mirroring the
// convention that mass sitting on the degenerate locus is not counted.
namespace pshlab::product {

struct ProductGeometry {
  grid::TorusGeometry base;  // one complex dimension
  int fiber_cells = 64;      // cells per fiber axis, even
  int pad = 2;               // padding points per side
  double fs_norm = 1.0;      // discrete mass of the fiber reference weight

  int fiber_points() const { return fiber_cells + 2 * pad; }
  double fiber_h() const { return 2.0 / fiber_cells; }
  double fiber_center(int a) const { return -1.0 + (a - pad + 0.5) * fiber_h(); }
  std::size_t base_cells() const { return base.num_cells(); }
  std::size_t num_points() const;
  std::size_t index(int chart, int k, int l, std::size_t b) const;
  bool owned(int chart, int k, int l) const;
};

// Validated constructor; fills fs_norm.  Requires a one-dimensional base
// and an even fiber_cells >= 8.
ProductGeometry make_product(const grid::TorusGeometry& base, int fiber_cells);

// Reference fiber weight (1/pi) (1 + |w|^2)^{-2}; unit mass over either
// chart pair in the continuum.
double fs_density(std::complex<double> w);

struct ProductField {
  ProductGeometry geom;
  std::vector<double> v;  // indexed by ProductGeometry::index
};

struct LiftMaStats {
  double total_mass = 0.0;            // mass kept in the measure
  double clamped_mass = 0.0;          // negative density removed by clamping
  double off_v_mass = 0.0;            // mass where alpha_hat lies outside (0,1)
  double excluded_area = 0.0;         // fiber area of the excluded cells
  double excluded_mass_estimate = 0.0;
  long negative_warning_cells = 0;    // cells with smallest eigenvalue < -1e-3
  long excluded_cells = 0;            // excluded fiber cells (per chart grid)
};

struct ProductMeasure {
  ProductGeometry geom;
  std::vector<double> mass;  // zero on unowned and excluded cells
  LiftMaStats stats;

  // Mass over one base cell; total() sums these, so collapsing the fiber
  // preserves the total bit for bit.
  double per_base(std::size_t b) const;
  double total() const;
};

// Pointwise lift of base potentials phi and eta to every product grid point
// (padding included).  Only one-dimensional fibers are supported.
ProductField lift_field(const ProductGeometry& geom, const grid::GridField& phi,
                        const grid::GridField& eta, const lift::LiftConfig& cfg);

// Discrete Monge-Ampere measure of a product potential.  off_v_mass is left
// at zero here: the alpha_hat classification needs the base potentials and
// is only available through ma_lift_pushforward.
ProductMeasure ma_lift(const ProductField& pot, const lift::LiftConfig& cfg);

// Fiber collapse of a product measure.
grid::MeasureField pushforward(const ProductMeasure& mu);

// Streaming fusion of pushforward(ma_lift(lift_field(...))): identical
// arithmetic, but only three fiber rows of the lift are alive at a time, so
// production-size grids fit in memory.
std::pair<grid::MeasureField, LiftMaStats> ma_lift_pushforward(const ProductGeometry& geom,
                                                               const grid::GridField& phi,
                                                               const grid::GridField& eta,
                                                               const lift::LiftConfig& cfg);

struct FiberCellInfo {
  std::size_t base_index;
  int chart;
  int k;
  int l;
  double t_ff;          // fiber-fiber density coefficient, clamped at zero
  double alpha_center;  // alpha_hat of the lift at the cell center
};

// Visits every owned (fiber cell, base cell) pair of the lift of (phi, eta)
// with the fiber-direction density coefficient and alpha_hat.  Streaming;
// multiply fiber sums by fiber_h()^2 / fs_norm to turn them into masses.
void scan_fiber_density(const ProductGeometry& geom, const grid::GridField& phi,
                        const grid::GridField& eta, const lift::LiftConfig& cfg,
                        const std::function<void(const FiberCellInfo&)>& visit);

// Checks that every branch potential (1-t) eta + t phi, t on a uniform grid
// of alpha_steps+1 values in [0,1], keeps theta + ddc positive up to tol on
// the base.  The fiber background contributes (1 - c0) times the reference
// form, which is nonnegative for every admissible config.  Returns a
// description of the first violation, if any.
std::optional<std::string> branch_psh_violation(const ProductGeometry& geom,
                                                const grid::GridField& phi,
                                                const grid::GridField& eta,
                                                const lift::LiftConfig& cfg, int alpha_steps,
                                                double tol);

}  // namespace pshlab::product
