#include "pshlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pshlab::simplex {
namespace {

void require_finite(std::span<const double> x, const char* who) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(who) + ": entries must be finite");
    }
  }
}

// Finite coordinates of x, in order.  -inf entries are dropped (the extended
// semantics of the envelope); NaN and +inf are rejected.
std::vector<double> finite_part(std::span<const double> x, const char* who) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) {
    if (v == kNegInf) continue;
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(who) + ": NaN and +inf not allowed");
    }
    out.push_back(v);
  }
  return out;
}

double envelope_finite(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const std::vector<double> p = project(x);
  double g = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) g += p[i] * (p[i] - 2.0 * x[i]);
  return g;
}

}  // namespace

std::vector<double> project(std::span<const double> x) {
  require_finite(x, "project");
  std::vector<double> y(x.size());
  double pos_sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::max(x[i], 0.0);
    pos_sum += y[i];
  }
  if (pos_sum <= 1.0) return y;

  // The projection lies on the sum = 1 face; use the sort-and-threshold rule
  // for the unit simplex.
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double cand = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - cand > 0.0) tau = cand;
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max(x[i] - tau, 0.0);
  return y;
}

double dist2(std::span<const double> x) {
  require_finite(x, "dist2");
  const std::vector<double> p = project(x);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - p[i];
    d += r * r;
  }
  return d;
}

double envelope(std::span<const double> x) {
  const std::vector<double> xf = finite_part(x, "envelope");
  return envelope_finite(xf);
}

double dir_deriv(std::span<const double> x) {
  const std::vector<double> xf = finite_part(x, "dir_deriv");
  if (xf.empty()) return 0.0;
  // The envelope is C^1 with gradient -2 * project(x), so the derivative
  // along (1,...,1) is -2 times the coordinate sum of the projection.
  const std::vector<double> p = project(xf);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  return -2.0 * s;
}

double project1(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("project1: entry must be finite");
  return std::clamp(x, 0.0, 1.0);
}

double envelope1(double x) {
  if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("envelope1: NaN and +inf not allowed");
  }
  if (x <= 0.0) return 0.0;  // includes the -inf extension
  if (x <= 1.0) return -x * x;
  return 1.0 - 2.0 * x;
}

double dir_deriv1(double x) {
  if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("dir_deriv1: NaN and +inf not allowed");
  }
  if (x == kNegInf) return 0.0;
  return -2.0 * std::clamp(x, 0.0, 1.0);
}

std::vector<double> FacePattern::apply(std::span<const double> x) const {
  const std::size_t n = affine_offset.size();
  if (x.size() != n) throw std::invalid_argument("FacePattern::apply: size mismatch");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = affine_offset[i];
    for (std::size_t j = 0; j < n; ++j) v += affine_matrix[i * n + j] * x[j];
    out[i] = v;
  }
  return out;
}

FacePattern active_face(std::span<const double> x) {
  require_finite(x, "active_face");
  const std::size_t n = x.size();
  const std::vector<double> p = project(x);

  FacePattern face;
  std::vector<bool> pinned(n, false);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += p[i];
    if (p[i] <= kFaceTol) {
      pinned[i] = true;
      face.zero_set.push_back(i);
    }
  }
  face.sum_active = sum >= 1.0 - kFaceTol;

  face.affine_matrix.assign(n * n, 0.0);
  face.affine_offset.assign(n, 0.0);
  const std::size_t free_count = n - face.zero_set.size();
  if (!face.sum_active) {
    // Interior of the corner: the projection just zeroes pinned coordinates.
    for (std::size_t i = 0; i < n; ++i) {
      if (!pinned[i]) face.affine_matrix[i * n + i] = 1.0;
    }
  } else if (free_count > 0) {
    // Projection onto { a = 0 on the pinned set, sum over the rest = 1 }:
    // subtract the mean excess from each free coordinate.
    const double inv_k = 1.0 / static_cast<double>(free_count);
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) continue;
      face.affine_offset[i] = inv_k;
      for (std::size_t j = 0; j < n; ++j) {
        if (pinned[j]) continue;
        face.affine_matrix[i * n + j] = (i == j ? 1.0 : 0.0) - inv_k;
      }
    }
  }
  return face;
}

namespace {

// Best squared deviation from t over the lattice { j * res : 0 <= j <=
// floor(budget / res) }.  Exact: the nearest admissible lattice point is the
// clamped rounding.
double tail_dist2(double t, double budget, double res) {
  long jmax = static_cast<long>(std::floor(budget / res + 1e-9));
  if (jmax < 0) jmax = 0;
  long j = std::lround(t / res);
  j = std::clamp(j, 0L, jmax);
  const double d = t - static_cast<double>(j) * res;
  return d * d;
}

double scan_lattice(std::span<const double> x, std::size_t i, double budget, double res,
                    double acc) {
  if (i + 1 == x.size()) return acc + tail_dist2(x[i], budget, res);
  const long imax = std::max(0L, static_cast<long>(std::floor(budget / res + 1e-9)));
  double best = std::numeric_limits<double>::infinity();
  for (long q = 0; q <= imax; ++q) {
    const double a = static_cast<double>(q) * res;
    const double d = x[i] - a;
    best = std::min(best, scan_lattice(x, i + 1, budget - a, res, acc + d * d));
  }
  return best;
}

}  // namespace

double brute_force_dist2(std::span<const double> x, double resolution) {
  require_finite(x, "brute_force_dist2");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("brute_force_dist2: resolution must be positive");
  }
  if (x.size() > 3) {
    throw std::invalid_argument("brute_force_dist2: only N <= 3 is supported");
  }
  if (x.empty()) return 0.0;
  return scan_lattice(x, 0, 1.0, resolution, 0.0);
}

}  // namespace pshlab::simplex
