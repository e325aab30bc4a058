#pragma once

#include <complex>
#include <span>
#include <vector>

// Envelope lift of a potential on the base through a projective fiber.
//
// A point of P^N is given in homogeneous coordinates [Z_0 : ... : Z_N]; the
// degenerate locus is Z_0 = 0.  For pointwise potential values phi and eta,
// the lifted potential at a fiber point is
//
//   lift = c0 * l_0 + eta - envelope(alpha_hat),
//   alpha_hat_a = (c0 * log|z_a|^2 + phi - eta) / 2,   z_a = Z_a / Z_0,
//
// where l_B = log(|Z_B|^2 / sum_C |Z_C|^2) and envelope() is the simplex
// envelope from simplex.hpp (alpha_hat entries are -inf where Z_a = 0).
// Equivalently, by expanding the envelope as a minimum over the simplex,
//
//   lift = max over alpha in S_N of
//          (1 - |alpha|)(eta + c0 l_0) + |alpha| phi
//          + c0 * sum_a alpha_a l_a - |alpha|^2_2,
//
// which is what lift_sup_oracle() scans directly.  On Z_0 = 0 the lift is
// -inf by convention.
namespace pshlab::lift {

struct FsPoint {
  std::vector<std::complex<double>> z;  // homogeneous coordinates, size N + 1
};

struct LiftConfig {
  int big_n = 1;   // fiber dimension N >= 1
  double c0 = 1.0; // background scale, in (0, 1]
};

// Validated constructor: big_n >= 1 and c0 in (0, 1].
LiftConfig make_lift_config(int big_n, double c0);

// log of the normalized squared homogeneous coordinate, -inf where it
// vanishes.  Rejects points with all coordinates zero or non-finite entries.
double fs_metric_log(const FsPoint& p, std::size_t a);

// alpha_hat for inhomogeneous coordinates z (size N); -inf where z_a = 0.
std::vector<double> alpha_hat(double phi, double eta, std::span<const std::complex<double>> z,
                              const LiftConfig& cfg);

// Value of the lifted potential at p; -inf when Z_0 = 0.
double lift_value(double phi, double eta, const FsPoint& p, const LiftConfig& cfg);

// The alpha = 0 competitor: eta + c0 * l_0.  Always a lower bound.
double lift_lower_bound(double eta, const FsPoint& p, const LiftConfig& cfg);

// Direct scan of the defining maximum over the lattice S_N intersect
// (resolution * Z)^N.  A lower bound for lift_value that tightens as the
// resolution shrinks (each halving scans a superset).  N <= 2 only.
double lift_sup_oracle(double phi, double eta, const FsPoint& p, const LiftConfig& cfg,
                       double resolution);

// envelope(alpha + t2 * ones) - envelope(alpha + t1 * ones), with -inf
// entries preserved.  This is the kernel of the two-potential difference
// below: shifting the potential by a constant s shifts every alpha_hat
// entry by s / 2.
double envelope_shift_diff(std::span<const double> alpha, double t1, double t2);

// Pointwise difference of two lifts with potentials interpolated toward a
// common anchor:
//
//   a_value = lift[a psi1 + (1-a) gamma] - lift[a psi2 + (1-a) gamma],
//
// all potentials given by their values at the point with fiber coordinates
// z.  Bounded by a * |psi1 - psi2|.
double a_value(double a, double psi1, double psi2, double gamma, double eta,
               std::span<const std::complex<double>> z, const LiftConfig& cfg);

}  // namespace pshlab::lift
