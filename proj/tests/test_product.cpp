#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pshlab/grid.hpp"
#include "pshlab/lift.hpp"
#include "pshlab/product.hpp"

namespace gr = pshlab::grid;
namespace lf = pshlab::lift;
namespace pr = pshlab::product;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

gr::GridField sample_base(const gr::TorusGeometry& geom, double eps, int variant) {
  return gr::sample(geom, [eps, variant](std::span<const double> p) {
    if (variant == 0) return eps * std::sin(2 * pi * p[0]);
    return -eps * (1.0 - std::cos(2 * pi * p[0])) + 0.4 * eps * std::sin(2 * pi * p[1]);
  });
}

}  // namespace

TEST_CASE("product geometry: charts, ownership, reference mass") {
  const auto base = gr::make_torus(1, 8, 1.0);
  CHECK_THROWS_AS((void)pr::make_product(gr::make_torus(2, 8, 1.0), 16), std::invalid_argument);
  CHECK_THROWS_AS((void)pr::make_product(base, 15), std::invalid_argument);
  CHECK_THROWS_AS((void)pr::make_product(base, 4), std::invalid_argument);

  const auto g = pr::make_product(base, 32);
  CHECK(g.fiber_points() == 36);
  CHECK(g.fiber_h() == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(g.num_points() == 2u * 36 * 36 * 64);

  // No center on the glue circle or at the chart-1 origin, and the charts
  // own the same number of cells.
  int owned0 = 0;
  int owned1 = 0;
  double min_w2 = 1e30;
  double min_gap = 1e30;
  for (int l = 0; l < g.fiber_points(); ++l) {
    for (int k = 0; k < g.fiber_points(); ++k) {
      const double u = g.fiber_center(k);
      const double v = g.fiber_center(l);
      const double w2 = u * u + v * v;
      min_w2 = std::min(min_w2, w2);
      min_gap = std::min(min_gap, std::fabs(w2 - 1.0));
      owned0 += g.owned(0, k, l) ? 1 : 0;
      owned1 += g.owned(1, k, l) ? 1 : 0;
    }
  }
  CHECK(owned0 == owned1);
  CHECK(min_w2 > 1e-6);
  CHECK(min_gap > 1e-9);
  // Owned cells tile the unit disk: about pi/4 of the K x K square.
  CHECK(owned0 > 0.7 * 32 * 32);
  CHECK(owned0 < 0.85 * 32 * 32);

  // The discrete reference fiber mass is close to one and normalization is
  // exact by construction.
  CHECK(std::fabs(g.fs_norm - 1.0) <= 0.02);
}

TEST_CASE("flat product potential reproduces the background measure") {
  const auto base = gr::make_torus(1, 6, 1.4);
  const auto g = pr::make_product(base, 24);
  const auto cfg = lf::make_lift_config(1, 1.0);
  const pr::ProductField zero{g, std::vector<double>(g.num_points(), 0.0)};
  const auto mu = pr::ma_lift(zero, cfg);

  CHECK(mu.stats.clamped_mass == 0.0);
  CHECK(mu.stats.negative_warning_cells == 0);
  CHECK(mu.stats.excluded_cells == 4);
  CHECK(mu.stats.excluded_area ==
        doctest::Approx(4.0 * g.fiber_h() * g.fiber_h()).epsilon(1e-15));

  // Background total is 2 * theta * c0; the measure misses only the excluded
  // cells, whose ring estimate fills the gap to high accuracy.
  const double want = 2.0 * 1.4 * 1.0;
  CHECK(mu.stats.total_mass <= want + 1e-12);
  CHECK(mu.stats.total_mass + mu.stats.excluded_mass_estimate ==
        doctest::Approx(want).epsilon(1e-3));

  // Pointwise the density is exactly 2 * theta * c0 * fs.
  const int k = g.pad + 3;
  const int l = g.pad + 7;
  REQUIRE(g.owned(0, k, l));
  const double fs = pr::fs_density({g.fiber_center(k), g.fiber_center(l)});
  const double cell = 2.0 * 1.4 * fs * base.cell_volume() * g.fiber_h() * g.fiber_h() / g.fs_norm;
  CHECK(mu.mass[g.index(0, k, l, 5)] == doctest::Approx(cell).epsilon(1e-13));

  CHECK(mu.total() == mu.stats.total_mass);
}

TEST_CASE("materialized lift matches the pointwise lift on both charts") {
  const auto base = gr::make_torus(1, 6, 1.0);
  const auto g = pr::make_product(base, 12);
  const auto cfg = lf::make_lift_config(1, 0.8);
  const auto phi = sample_base(base, 0.15, 0);
  const auto eta = sample_base(base, 0.1, 1);
  const auto lifted = pr::lift_field(g, phi, eta, cfg);

  for (int chart = 0; chart < 2; ++chart) {
    for (int l = 0; l < g.fiber_points(); l += 3) {
      for (int k = 0; k < g.fiber_points(); k += 3) {
        const cplx w{g.fiber_center(k), g.fiber_center(l)};
        const lf::FsPoint p =
            chart == 0 ? lf::FsPoint{{cplx{1, 0}, w}} : lf::FsPoint{{w, cplx{1, 0}}};
        for (std::size_t b : {std::size_t{0}, std::size_t{17}, std::size_t{35}}) {
          const double want = lf::lift_value(phi.v[b], eta.v[b], p, cfg);
          CHECK(lifted.v[g.index(chart, k, l, b)] ==
                doctest::Approx(want).epsilon(1e-12).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("streaming and materialized Monge-Ampere agree bit for bit") {
  const auto base = gr::make_torus(1, 10, 1.0);
  const auto g = pr::make_product(base, 16);
  const auto cfg = lf::make_lift_config(1, 1.0);
  const auto phi = sample_base(base, 0.12, 0);
  const auto eta = sample_base(base, 0.05, 1);

  const auto mu = pr::ma_lift(pr::lift_field(g, phi, eta, cfg), cfg);
  const auto push = pr::pushforward(mu);
  const auto [stream, stats] = pr::ma_lift_pushforward(g, phi, eta, cfg);

  CHECK(push.mass == stream.mass);
  CHECK(mu.stats.total_mass == stats.total_mass);
  CHECK(mu.stats.clamped_mass == stats.clamped_mass);
  CHECK(mu.stats.excluded_mass_estimate == stats.excluded_mass_estimate);
  CHECK(mu.stats.excluded_cells == stats.excluded_cells);
  CHECK(mu.stats.negative_warning_cells == stats.negative_warning_cells);
  // The alpha classification only exists on the streaming path.
  CHECK(mu.stats.off_v_mass == 0.0);
  CHECK(stats.off_v_mass > 0.0);

  // Collapsing the fiber preserves the total bit for bit.
  double push_total = 0.0;
  for (double v : push.mass) push_total += v;
  CHECK(push_total == mu.total());
}

TEST_CASE("flat base potential gives a base-constant pushforward") {
  const auto base = gr::make_torus(1, 8, 1.0);
  const auto g = pr::make_product(base, 32);
  const auto cfg = lf::make_lift_config(1, 1.0);
  const auto zero = gr::make_field(base);
  const auto [push, stats] = pr::ma_lift_pushforward(g, zero, zero, cfg);

  for (double v : push.mass) CHECK(v == push.mass[0]);
  CHECK(stats.total_mass + stats.excluded_mass_estimate == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("pushforward of a lifted pair tracks the base prediction") {
  const double eps = 0.1;
  const auto base = gr::make_torus(1, 12, 1.0);
  const auto g = pr::make_product(base, 48);
  const auto cfg = lf::make_lift_config(1, 1.0);
  const auto phi = sample_base(base, eps, 0);
  const auto eta = gr::make_field(base);
  const auto [push, stats] = pr::ma_lift_pushforward(g, phi, eta, cfg);

  // Expected marginal: twice the background plus the curvature of phi.
  const auto ddphi = gr::mixed_ma(std::array{gr::ddc(phi)});
  const double scale = 2.0 * base.cell_volume();
  for (std::size_t b = 0; b < push.mass.size(); ++b) {
    const double want = 2.0 * base.cell_volume() + ddphi.mass[b];
    CHECK(push.mass[b] == doctest::Approx(want).epsilon(0.1).scale(scale));
  }
  CHECK(stats.total_mass + stats.excluded_mass_estimate == doctest::Approx(2.0).epsilon(0.02));
  CHECK(stats.off_v_mass <= 0.06 * stats.total_mass);
  CHECK(stats.clamped_mass <= 0.02 * stats.total_mass);
}

TEST_CASE("fiber density scan: mass, alpha values") {
  const auto base = gr::make_torus(1, 8, 1.0);
  const auto g = pr::make_product(base, 64);
  const auto cfg = lf::make_lift_config(1, 1.0);
  const auto phi = sample_base(base, 0.1, 0);
  const auto eta = gr::make_field(base);

  const int probe_k = g.fiber_points() / 2;
  const int probe_l = g.fiber_points() / 2 + 3;
  REQUIRE(g.owned(0, probe_k, probe_l));
  std::vector<double> fiber_mass(g.base_cells(), 0.0);
  double alpha_probe = 0.0;
  bool saw_probe = false;
  pr::scan_fiber_density(g, phi, eta, cfg, [&](const pr::FiberCellInfo& c) {
    CHECK(c.t_ff >= 0.0);
    fiber_mass[c.base_index] += c.t_ff;
    if (c.chart == 0 && c.k == probe_k && c.l == probe_l && c.base_index == 3) {
      alpha_probe = c.alpha_center;
      saw_probe = true;
    }
  });

  // Per base point, the fiber carries total curvature-plus-background mass
  // c0 (the lift restricted to a fiber is a bounded potential).
  const double w = g.fiber_h() * g.fiber_h() / g.fs_norm;
  for (double s : fiber_mass) CHECK(s * w == doctest::Approx(1.0).epsilon(0.05));

  REQUIRE(saw_probe);
  const cplx z{g.fiber_center(probe_k), g.fiber_center(probe_l)};
  const auto want = lf::alpha_hat(phi.v[3], eta.v[3], std::vector<cplx>{z}, cfg);
  CHECK(alpha_probe == doctest::Approx(want[0]).epsilon(1e-13));
}

TEST_CASE("branch positivity check") {
  const auto base = gr::make_torus(1, 16, 1.0);
  const auto g = pr::make_product(base, 16);
  const auto cfg = lf::make_lift_config(1, 1.0);
  const auto phi = sample_base(base, 0.05, 0);
  const auto eta = sample_base(base, 0.04, 1);
  CHECK_FALSE(pr::branch_psh_violation(g, phi, eta, cfg, 4, 1e-9).has_value());

  const auto wild = sample_base(base, 40.0, 0);
  const auto bad = pr::branch_psh_violation(g, wild, eta, cfg, 4, 1e-9);
  REQUIRE(bad.has_value());
  CHECK(bad->find("cell") != std::string::npos);
}

TEST_CASE("product validation") {
  const auto base = gr::make_torus(1, 8, 1.0);
  const auto other = gr::make_torus(1, 16, 1.0);
  const auto g = pr::make_product(base, 16);
  const auto cfg1 = lf::make_lift_config(1, 1.0);
  const auto cfg2 = lf::make_lift_config(2, 1.0);
  const auto phi = gr::make_field(base);
  const auto mism = gr::make_field(other);

  CHECK_THROWS_AS((void)pr::lift_field(g, phi, mism, cfg1), std::invalid_argument);
  CHECK_THROWS_AS((void)pr::lift_field(g, phi, phi, cfg2), std::invalid_argument);
  CHECK_THROWS_AS((void)pr::ma_lift_pushforward(g, mism, mism, cfg1), std::invalid_argument);
  const pr::ProductField short_field{g, std::vector<double>(7, 0.0)};
  CHECK_THROWS_AS((void)pr::ma_lift(short_field, cfg1), std::invalid_argument);
  CHECK_THROWS_AS((void)pr::branch_psh_violation(g, phi, phi, cfg1, 0, 1e-9),
                  std::invalid_argument);
}
