#pragma once

#include <cstdint>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/report.hpp"

// Named, reproducible desk-scale experiments.  Each one assembles fixture
// potentials on a torus base (and, where needed, lifts them through the
// projective-line fiber), measures a quantitative identity of the envelope
// lift or of the discrete wedge calculus, and emits a report whose rows pin
// the measured values against closed forms, quadrature oracles, exact
// symmetries, or rigorous bounds.
namespace pshlab::experiments {

// Shared knobs; each experiment reads the subset its report lists under
// "inputs" and ignores the rest.
struct RunParams {
  int base_cells = 24;   // lattice points per real axis on the base
  int fiber_cells = 96;  // fiber cells per axis for product-space runs
  int big_n = 1;         // fiber dimension / quadrature order cap
  int dim = 1;           // complex dimension of the base (1 or 2)
  double eps = 0.1;      // fixture amplitude
  double a0 = 0.1;       // step for one-sided derivatives
  std::vector<double> a_list{0.1, 0.05, 0.025, 0.0125};
  std::uint64_t seed = 20260814;
};

// Standard fixtures on a one-dimensional base at unit background mass:
// ordered potentials gamma <= psi2 <= psi1 = 0, a potential phi whose
// curvature stays strictly positive, a bounded pair (u1, u2), and a smooth
// bump chi supported in [1/4, 3/4]^2.  All of them keep the background
// positive for eps <= 0.15.
struct BaseFixtures {
  grid::GridField psi1, psi2, gamma, phi, u1, u2, chi;
};
BaseFixtures standard_fixtures(const grid::TorusGeometry& base, double eps);

// Weight polynomial of the fiber-averaged background power:
//
//   beta_weight(n, N, x, y) = N * Integral_0^1 ((1-t) x + t y)^n t^{N-1} dt
//                           = sum_j binom(n,j) * N j! / ((n-j+N)...(n+N)) x^j y^{n-j},
//
// evaluated through the exact coefficient products.  Requires 0 <= n <= 3,
// N >= 1.
double beta_weight(int dim, int big_n, double x, double y);

// Wedge integration-by-parts symmetry: exact at dim = 1, second-order with
// an M-halving ratio check at dim = 2, including a run against a distinct
// background mass.
report::ExperimentReport run_ibp(const RunParams& params);

// Fiber collapse of the lift measure against the closed-form target
// 2*theta + ddc(phi), with mass, clamping, and off-support budgets.
report::ExperimentReport run_wn_pushforward(const RunParams& params);

// beta_weight against adaptive quadrature over n <= dim, N <= big_n, and
// seeded (x, y) pairs.
report::ExperimentReport run_beta(const RunParams& params);

// Total-variation distance between the fiber-averaged measure and its limit:
// the ratio TV_N * (N+1) / ||ddc phi||_TV equals one identically.
report::ExperimentReport run_tv_convergence(const RunParams& params);

// One-sided derivative of the weighted lift difference against the
// closed-form leading coefficient (1/2) * Integral(chi v theta_phi), plus
// invariance under swapping which potential enters the measure.
report::ExperimentReport run_iwn_leading(const RunParams& params);

// Base-grid pairing Integral(u ddc v) against the product-space one-sided
// derivative that represents it at fiber dimension one.
report::ExperimentReport run_intres(const RunParams& params);

// Quadratic-order expansion of the lift difference: slope of the sup-norm
// residual, the pointwise Lipschitz bound, and the exceedance-area proxy.
report::ExperimentReport run_an_expansion(const RunParams& params);

}  // namespace pshlab::experiments
