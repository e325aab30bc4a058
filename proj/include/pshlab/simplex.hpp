#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

// Geometry of the closed corner simplex
//
//   S_N = { a in R^N : a_i >= 0 for all i, sum_i a_i <= 1 }
//
// and the two derived potentials used throughout the lift machinery:
//
//   dist2(x)    = |x - P(x)|^2          squared distance to S_N,
//   envelope(x) = dist2(x) - |x|^2      concave "shifted" envelope,
//
// where P is the Euclidean closest-point projection.  envelope() extends
// continuously to arguments with -inf entries by dropping them (the value
// only depends on the finite coordinates, in the lower-dimensional simplex);
// the empty vector has envelope 0.  dir_deriv() is the one-sided derivative
// of the envelope along the all-ones direction, which is defined everywhere
// because the envelope is C^1.
namespace pshlab::simplex {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Tolerance for deciding which constraints are active at a projected point.
// Ties count as active for both the coordinate and the sum constraint.
inline constexpr double kFaceTol = 1e-12;

// Closest point of S_N.  Entries must be finite.
std::vector<double> project(std::span<const double> x);

// Squared Euclidean distance to S_N.  Entries must be finite.
double dist2(std::span<const double> x);

// envelope(x) = dist2(x) - |x|^2, computed in the cancellation-free form
// sum_i p_i (p_i - 2 x_i) with p = project(x).  Accepts -inf entries
// (dropped); rejects NaN and +inf.
double envelope(std::span<const double> x);

// One-sided derivative t -> envelope(x + t*(1,...,1)) at t = 0+.
// Equals -2 * sum_i project(x)_i; always in [-2, 0].  Accepts -inf entries.
double dir_deriv(std::span<const double> x);

// Scalar (N = 1) closed forms.
double project1(double x);
double envelope1(double x);
double dir_deriv1(double x);

// Description of the affine action of the projection over one face of S_N:
// on the preimage of a face, P(x) = M x + c where M projects onto the face's
// affine hull.  zero_set lists the pinned coordinates; sum_active says
// whether the face lies in the hyperplane sum = 1.
struct FacePattern {
  std::vector<std::size_t> zero_set;
  bool sum_active = false;
  std::vector<double> affine_matrix;  // N x N, row-major
  std::vector<double> affine_offset;  // N

  std::vector<double> apply(std::span<const double> x) const;
};

// Face of S_N whose relative interior (or closure, at ties) contains
// project(x).
FacePattern active_face(std::span<const double> x);

// Exhaustive lattice search for dist2, used as an independent check.  Scans
// all points of S_N with coordinates in resolution * Z (closed-form along the
// last axis), so the result is an upper bound for dist2 that tightens as the
// resolution shrinks.  Only supports N <= 3; throws otherwise.
double brute_force_dist2(std::span<const double> x, double resolution);

}  // namespace pshlab::simplex
