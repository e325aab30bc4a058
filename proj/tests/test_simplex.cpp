#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pshlab/simplex.hpp"

namespace sx = pshlab::simplex;

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

bool feasible(std::span<const double> v, double tol) {
  double s = 0.0;
  for (double e : v) {
    if (e < -tol) return false;
    s += e;
  }
  return s <= 1.0 + tol;
}

std::vector<double> random_feasible(std::mt19937_64& rng, std::size_t n) {
  // Uniform on the corner simplex via exponential spacings, then a random
  // overall shrink so interior points also show up.
  std::vector<double> v = oracles::random_vec(rng, n, 0.0, 1.0);
  for (double& e : v) e = -std::log(std::max(e, 1e-300));
  double s = std::accumulate(v.begin(), v.end(), 0.0) - std::log(std::max(
                 std::uniform_real_distribution<double>(0.0, 1.0)(rng), 1e-300));
  std::uniform_real_distribution<double> shrink(0.0, 1.0);
  const double c = shrink(rng) / s;
  for (double& e : v) e *= c;
  return v;
}

}  // namespace

TEST_CASE("projection: pinned values") {
  {
    const std::vector<double> x{1.0, 1.0};
    const auto p = sx::project(x);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
  {
    const std::vector<double> x{2.0, 0.0};
    const auto p = sx::project(x);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-14));
  }
  {
    const std::vector<double> x{-3.0, -4.0};
    const auto p = sx::project(x);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 0.0);
  }
}

TEST_CASE("distance and envelope: pinned values") {
  const std::vector<double> x11{1.0, 1.0};
  const std::vector<double> x20{2.0, 0.0};
  CHECK(sx::dist2(x11) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sx::dist2(x20) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sx::envelope(x11) == doctest::Approx(-1.5).epsilon(1e-14));

  const std::vector<double> extended{2.0, sx::kNegInf};
  CHECK(sx::envelope(extended) == doctest::Approx(-3.0).epsilon(1e-14));

  const std::vector<double> only_inf{sx::kNegInf};
  CHECK(sx::envelope(only_inf) == 0.0);
  CHECK(sx::envelope(std::vector<double>{}) == 0.0);
}

TEST_CASE("directional derivative: pinned values") {
  CHECK(sx::dir_deriv(std::vector<double>{-3.0, -4.0}) == 0.0);
  CHECK(sx::dir_deriv(std::vector<double>{0.2, 0.3}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(sx::dir_deriv(std::vector<double>{1.0, 1.0}) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(sx::dir_deriv(std::vector<double>{sx::kNegInf}) == 0.0);
}

TEST_CASE("scalar fast paths agree with the general routines") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double s = dist(rng);
    const std::vector<double> v{s};
    CHECK(sx::project1(s) == doctest::Approx(sx::project(v)[0]).epsilon(1e-15));
    CHECK(sx::envelope1(s) == doctest::Approx(sx::envelope(v)).epsilon(1e-15));
    CHECK(sx::dir_deriv1(s) == doctest::Approx(sx::dir_deriv(v)).epsilon(1e-15));
  }
  CHECK(sx::envelope1(sx::kNegInf) == 0.0);
  CHECK(sx::dir_deriv1(sx::kNegInf) == 0.0);
}

TEST_CASE("projection is feasible, idempotent, non-expansive, and variational") {
  std::mt19937_64 rng(202);
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u}) {
    for (int i = 0; i < 100; ++i) {
      const auto x = oracles::random_vec(rng, n, -2.0, 2.0);
      const auto p = sx::project(x);
      CHECK(feasible(p, 1e-12));

      const auto pp = sx::project(p);
      for (std::size_t a = 0; a < n; ++a) CHECK(pp[a] == doctest::Approx(p[a]).epsilon(1e-12));

      const auto y = oracles::random_vec(rng, n, -2.0, 2.0);
      const auto q = sx::project(y);
      double dxy = 0.0;
      double dpq = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        dxy += (x[a] - y[a]) * (x[a] - y[a]);
        dpq += (p[a] - q[a]) * (p[a] - q[a]);
      }
      CHECK(dpq <= dxy + 1e-12);

      // No feasible point beats the projection, and the projection satisfies
      // the obtuse-angle inequality against feasible points.
      const auto z = random_feasible(rng, n);
      double dxz = 0.0;
      double angle = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        dxz += (x[a] - z[a]) * (x[a] - z[a]);
        angle += (x[a] - p[a]) * (z[a] - p[a]);
      }
      CHECK(sx::dist2(x) <= dxz + 1e-12);
      CHECK(angle <= 1e-10);
    }
  }
}

TEST_CASE("lattice scan brackets the squared distance") {
  std::mt19937_64 rng(303);
  for (std::size_t n : {1u, 2u}) {
    for (int i = 0; i < 120; ++i) {
      const auto x = oracles::random_vec(rng, n, -2.0, 2.0);
      const double f = sx::dist2(x);
      const double res = 1e-3;
      const double upper = sx::brute_force_dist2(x, res);
      const double slack =
          2.0 * std::sqrt(f) * std::sqrt(static_cast<double>(n)) * res +
          static_cast<double>(n) * res * res + 1e-12;
      CHECK(upper >= f - 1e-12);
      CHECK(upper <= f + slack);
    }
  }
  // N = 3 at a coarser grid to keep the scan cheap.
  for (int i = 0; i < 40; ++i) {
    const auto x = oracles::random_vec(rng, 3, -2.0, 2.0);
    const double f = sx::dist2(x);
    const double res = 1e-2;
    const double upper = sx::brute_force_dist2(x, res);
    const double slack = 2.0 * std::sqrt(f) * std::sqrt(3.0) * res + 3.0 * res * res + 1e-12;
    CHECK(upper >= f - 1e-12);
    CHECK(upper <= f + slack);
  }
}

TEST_CASE("envelope: symmetry, monotonicity, Lipschitz bound") {
  std::mt19937_64 rng(404);
  for (std::size_t n : {2u, 3u, 5u}) {
    for (int i = 0; i < 100; ++i) {
      auto x = oracles::random_vec(rng, n, -2.0, 2.0);
      const double g = sx::envelope(x);

      auto perm = x;
      std::shuffle(perm.begin(), perm.end(), rng);
      CHECK(sx::envelope(perm) == doctest::Approx(g).epsilon(1e-12));

      // Raising one coordinate can only lower the envelope.
      auto bumped = x;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::uniform_real_distribution<double> amount(0.0, 1.0);
      bumped[pick(rng)] += amount(rng);
      CHECK(sx::envelope(bumped) <= g + 1e-12);

      // Uniform-norm Lipschitz constant 2.
      const auto y = oracles::random_vec(rng, n, -2.0, 2.0);
      double max_dev = 0.0;
      for (std::size_t a = 0; a < n; ++a) max_dev = std::max(max_dev, std::fabs(x[a] - y[a]));
      CHECK(std::fabs(sx::envelope(x) - sx::envelope(y)) <= 2.0 * max_dev + 1e-12);
    }
  }
}

TEST_CASE("envelope: naive formula agreement and exact -inf extension") {
  std::mt19937_64 rng(505);
  for (std::size_t n : {1u, 2u, 4u}) {
    for (int i = 0; i < 100; ++i) {
      const auto x = oracles::random_vec(rng, n, -2.0, 2.0);
      // The stable form must match dist2 - |x|^2 up to roundoff.
      CHECK(sx::envelope(x) ==
            doctest::Approx(sx::dist2(x) - norm2(x)).epsilon(1e-12).scale(1.0 + norm2(x)));

      // Appending a hugely negative coordinate changes nothing, bit for bit:
      // its projected value is exactly zero, so its term vanishes exactly.
      std::vector<double> padded(x.begin(), x.end());
      padded.push_back(-1000.0);
      CHECK(sx::envelope(padded) == sx::envelope(x));
      padded.back() = sx::kNegInf;
      CHECK(sx::envelope(padded) == sx::envelope(x));
    }
  }
}

TEST_CASE("directional derivative matches finite differences and stays in [-2, 0]") {
  std::mt19937_64 rng(606);
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u}) {
    for (int i = 0; i < 60; ++i) {
      const auto x = oracles::random_vec(rng, n, -2.0, 2.0);
      const double l = sx::dir_deriv(x);
      CHECK(l <= 0.0 + 1e-12);
      CHECK(l >= -2.0 - 1e-12);
      CHECK(l == doctest::Approx(oracles::fd_dir_deriv(x)).epsilon(1e-6).scale(1.0));
    }
  }
  // Mixed finite / -inf input reduces to the finite sub-vector.
  const std::vector<double> mixed{0.2, sx::kNegInf, 0.3};
  CHECK(sx::dir_deriv(mixed) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("first-order expansion along the diagonal has a dimension-bounded remainder") {
  // envelope(x + t e) = envelope(x) + t * dir_deriv(x) + r(t) with
  // |r(t)| <= C_N t^2 and C_N <= N (the envelope gradient is 2-Lipschitz).
  std::mt19937_64 rng(707);
  for (std::size_t n : {2u, 3u, 5u}) {
    std::vector<std::vector<double>> sample;
    for (int i = 0; i < 160; ++i) sample.push_back(oracles::random_vec(rng, n, -2.0, 2.0));

    const std::vector<double> steps{1e-1, 1e-2, 1e-3};
    const auto remainder = [&](const std::vector<double>& x, double t) {
      std::vector<double> y(x);
      for (double& v : y) v += t;
      return std::fabs(sx::envelope(y) - sx::envelope(x) - t * sx::dir_deriv(x));
    };

    // Fit the constant on one half of the sample...
    double fit = 0.0;
    for (std::size_t i = 0; i < sample.size() / 2; ++i) {
      for (double t : steps) fit = std::max(fit, remainder(sample[i], t) / (t * t));
    }
    CHECK(fit <= static_cast<double>(n) + 1e-9);

    // ...and validate it, with headroom, on the other half.
    const double cap = std::max(fit, 1e-6) * 1.25;
    for (std::size_t i = sample.size() / 2; i < sample.size(); ++i) {
      for (double t : steps) CHECK(remainder(sample[i], t) <= cap * t * t + 1e-12);
    }
  }
}

TEST_CASE("active face reproduces the projection affinely") {
  std::mt19937_64 rng(808);
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    for (int i = 0; i < 150; ++i) {
      const auto x = oracles::random_vec(rng, n, -2.0, 2.0);
      const auto p = sx::project(x);
      const auto face = sx::active_face(x);
      const auto q = face.apply(x);
      for (std::size_t a = 0; a < n; ++a) {
        CHECK(q[a] == doctest::Approx(p[a]).epsilon(1e-9).scale(1.0));
      }
      for (std::size_t a : face.zero_set) CHECK(p[a] <= sx::kFaceTol);
    }
  }
}

TEST_CASE("active face: structure at reference points") {
  {
    const auto face = sx::active_face(std::vector<double>{1.0, 1.0});
    CHECK(face.sum_active);
    CHECK(face.zero_set.empty());
    CHECK(face.affine_matrix == std::vector<double>{0.5, -0.5, -0.5, 0.5});
    CHECK(face.affine_offset == std::vector<double>{0.5, 0.5});
  }
  {
    const auto face = sx::active_face(std::vector<double>{-3.0, -4.0});
    CHECK_FALSE(face.sum_active);
    CHECK(face.zero_set == std::vector<std::size_t>{0, 1});
    CHECK(face.affine_matrix == std::vector<double>(4, 0.0));
  }
  {
    const auto face = sx::active_face(std::vector<double>{0.2, 0.3});
    CHECK_FALSE(face.sum_active);
    CHECK(face.zero_set.empty());
    CHECK(face.affine_matrix == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  }
}

TEST_CASE("argument validation") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double pinf = std::numeric_limits<double>::infinity();

  CHECK_THROWS_AS((void)sx::project(std::vector<double>{nan}), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::project(std::vector<double>{sx::kNegInf}), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::dist2(std::vector<double>{pinf}), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::envelope(std::vector<double>{nan}), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::envelope(std::vector<double>{pinf}), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::dir_deriv(std::vector<double>{0.5, nan}), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::envelope1(nan), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::project1(sx::kNegInf), std::invalid_argument);
  CHECK_THROWS_AS((void)sx::brute_force_dist2(std::vector<double>(4, 0.1), 1e-2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sx::brute_force_dist2(std::vector<double>{0.1}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sx::brute_force_dist2(std::vector<double>{0.1}, -1e-3),
                  std::invalid_argument);
}
