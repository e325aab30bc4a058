#include "pshlab/lift.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pshlab/simplex.hpp"

namespace pshlab::lift {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double norm_sq_sum(const FsPoint& p, const char* who) {
  if (p.z.empty()) throw std::invalid_argument(std::string(who) + ": empty point");
  double total = 0.0;
  for (const auto& c : p.z) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw std::invalid_argument(std::string(who) + ": non-finite coordinate");
    }
    total += std::norm(c);
  }
  if (total == 0.0) throw std::invalid_argument(std::string(who) + ": all coordinates vanish");
  return total;
}

void check_point_size(const FsPoint& p, const LiftConfig& cfg, const char* who) {
  if (p.z.size() != static_cast<std::size_t>(cfg.big_n) + 1) {
    throw std::invalid_argument(std::string(who) + ": point has wrong dimension");
  }
}

}  // namespace

LiftConfig make_lift_config(int big_n, double c0) {
  if (big_n < 1) throw std::invalid_argument("make_lift_config: big_n must be >= 1");
  if (!(c0 > 0.0) || c0 > 1.0) {
    throw std::invalid_argument("make_lift_config: c0 must lie in (0, 1]");
  }
  return LiftConfig{big_n, c0};
}

double fs_metric_log(const FsPoint& p, std::size_t a) {
  const double total = norm_sq_sum(p, "fs_metric_log");
  if (a >= p.z.size()) throw std::invalid_argument("fs_metric_log: index out of range");
  const double na = std::norm(p.z[a]);
  if (na == 0.0) return kNegInf;
  return std::log(na / total);
}

std::vector<double> alpha_hat(double phi, double eta, std::span<const std::complex<double>> z,
                              const LiftConfig& cfg) {
  if (z.size() != static_cast<std::size_t>(cfg.big_n)) {
    throw std::invalid_argument("alpha_hat: wrong number of coordinates");
  }
  if (!std::isfinite(phi) || !std::isfinite(eta)) {
    throw std::invalid_argument("alpha_hat: potentials must be finite");
  }
  std::vector<double> out(z.size());
  for (std::size_t a = 0; a < z.size(); ++a) {
    if (!std::isfinite(z[a].real()) || !std::isfinite(z[a].imag())) {
      throw std::invalid_argument("alpha_hat: non-finite coordinate");
    }
    const double nz = std::norm(z[a]);
    out[a] = nz == 0.0 ? kNegInf : 0.5 * (cfg.c0 * std::log(nz) + phi - eta);
  }
  return out;
}

double lift_value(double phi, double eta, const FsPoint& p, const LiftConfig& cfg) {
  check_point_size(p, cfg, "lift_value");
  if (!std::isfinite(phi) || !std::isfinite(eta)) {
    throw std::invalid_argument("lift_value: potentials must be finite");
  }
  const double total = norm_sq_sum(p, "lift_value");
  const double n0 = std::norm(p.z[0]);
  if (n0 == 0.0) return kNegInf;

  std::vector<double> ah(p.z.size() - 1);
  for (std::size_t a = 1; a < p.z.size(); ++a) {
    const double na = std::norm(p.z[a]);
    // log|z_a|^2 computed as a single quotient log: the normalization of the
    // homogeneous coordinates cancels.
    ah[a - 1] = na == 0.0 ? kNegInf : 0.5 * (cfg.c0 * std::log(na / n0) + phi - eta);
  }
  const double l0 = std::log(n0 / total);
  return cfg.c0 * l0 + eta - simplex::envelope(ah);
}

double lift_lower_bound(double eta, const FsPoint& p, const LiftConfig& cfg) {
  check_point_size(p, cfg, "lift_lower_bound");
  return eta + cfg.c0 * fs_metric_log(p, 0);
}

double lift_sup_oracle(double phi, double eta, const FsPoint& p, const LiftConfig& cfg,
                       double resolution) {
  check_point_size(p, cfg, "lift_sup_oracle");
  if (cfg.big_n > 2) throw std::invalid_argument("lift_sup_oracle: only N <= 2 is supported");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("lift_sup_oracle: resolution must be positive");
  }
  (void)norm_sq_sum(p, "lift_sup_oracle");

  std::vector<double> l(p.z.size());
  for (std::size_t b = 0; b < p.z.size(); ++b) l[b] = fs_metric_log(p, b);

  // Value of one competitor.  Coordinates sitting on a vanished homogeneous
  // coordinate force alpha_a = 0 (their weight drops out); likewise the
  // l_0 term drops out on the sum face.
  const auto value_at = [&](std::span<const double> alpha) {
    double s = 0.0;
    double q = 0.0;
    double v = 0.0;
    for (std::size_t a = 0; a < alpha.size(); ++a) {
      s += alpha[a];
      q += alpha[a] * alpha[a];
      if (alpha[a] > 0.0) {
        if (l[a + 1] == kNegInf) return kNegInf;
        v += alpha[a] * cfg.c0 * l[a + 1];
      }
    }
    double w0 = 1.0 - s;
    if (w0 <= 1e-12) w0 = 0.0;
    if (w0 > 0.0) {
      if (l[0] == kNegInf) return kNegInf;
      v += w0 * (eta + cfg.c0 * l[0]);
    }
    return v + s * phi - q;
  };

  const long jmax = static_cast<long>(std::floor(1.0 / resolution + 1e-9));
  double best = kNegInf;
  if (cfg.big_n == 1) {
    for (long j = 0; j <= jmax; ++j) {
      const double alpha[1] = {static_cast<double>(j) * resolution};
      best = std::max(best, value_at(alpha));
    }
  } else {
    for (long i = 0; i <= jmax; ++i) {
      for (long j = 0; j + i <= jmax; ++j) {
        const double alpha[2] = {static_cast<double>(i) * resolution,
                                 static_cast<double>(j) * resolution};
        if (alpha[0] + alpha[1] > 1.0 + 1e-12) continue;
        best = std::max(best, value_at(alpha));
      }
    }
  }
  return best;
}

double envelope_shift_diff(std::span<const double> alpha, double t1, double t2) {
  if (!std::isfinite(t1) || !std::isfinite(t2)) {
    throw std::invalid_argument("envelope_shift_diff: shifts must be finite");
  }
  std::vector<double> shifted(alpha.begin(), alpha.end());
  for (double& v : shifted) v += t2;
  const double g2 = simplex::envelope(shifted);
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = alpha[i] + t1;
  const double g1 = simplex::envelope(shifted);
  return g2 - g1;
}

double a_value(double a, double psi1, double psi2, double gamma, double eta,
               std::span<const std::complex<double>> z, const LiftConfig& cfg) {
  if (!(a >= 0.0) || a > 1.0) throw std::invalid_argument("a_value: a must lie in [0, 1]");
  const double b = 1.0 - a;
  const auto ah1 = alpha_hat(a * psi1 + b * gamma, eta, z, cfg);
  const auto ah2 = alpha_hat(a * psi2 + b * gamma, eta, z, cfg);
  return simplex::envelope(ah2) - simplex::envelope(ah1);
}

}  // namespace pshlab::lift
