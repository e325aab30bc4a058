#include "pshlab/product.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pshlab/simplex.hpp"

namespace pshlab::product {
namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

// Lookup tables over the fiber grid points, indexed by l * P + k.
struct FiberTables {
  std::vector<double> logz2[2];  // log|z|^2 in each chart
  std::vector<double> l0[2];     // log of the normalized 0th homogeneous coordinate
  std::vector<double> fs;        // reference fiber weight
  std::vector<double> w2;        // |w_c|^2
};

FiberTables build_tables(const ProductGeometry& g) {
  const int p = g.fiber_points();
  FiberTables t;
  t.fs.resize(static_cast<std::size_t>(p) * p);
  t.w2.resize(t.fs.size());
  for (auto& v : t.logz2) v.resize(t.fs.size());
  for (auto& v : t.l0) v.resize(t.fs.size());
  for (int l = 0; l < p; ++l) {
    for (int k = 0; k < p; ++k) {
      const double u = g.fiber_center(k);
      const double v = g.fiber_center(l);
      const double w2 = u * u + v * v;
      const std::size_t idx = static_cast<std::size_t>(l) * p + k;
      t.w2[idx] = w2;
      t.fs[idx] = fs_density({u, v});
      const double logw2 = std::log(w2);
      const double log1pw2 = std::log1p(w2);
      t.logz2[0][idx] = logw2;   // chart 0: z = w
      t.l0[0][idx] = -log1pw2;
      t.logz2[1][idx] = -logw2;  // chart 1: z = 1/w
      t.l0[1][idx] = logw2 - log1pw2;
    }
  }
  return t;
}

struct BaseTables {
  std::vector<std::size_t> xp, xn, yp, yn;
};

BaseTables build_base_tables(const grid::TorusGeometry& base) {
  const int m = base.m;
  BaseTables t;
  const std::size_t cells = base.num_cells();
  t.xp.resize(cells);
  t.xn.resize(cells);
  t.yp.resize(cells);
  t.yn.resize(cells);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const std::size_t b = static_cast<std::size_t>(i) * m + j;
      t.xp[b] = static_cast<std::size_t>((i + 1) % m) * m + j;
      t.xn[b] = static_cast<std::size_t>((i + m - 1) % m) * m + j;
      t.yp[b] = static_cast<std::size_t>(i) * m + (j + 1) % m;
      t.yn[b] = static_cast<std::size_t>(i) * m + (j + m - 1) % m;
    }
  }
  return t;
}

void check_lift_inputs(const ProductGeometry& g, const grid::GridField& phi,
                       const grid::GridField& eta, const lift::LiftConfig& cfg, const char* who) {
  if (cfg.big_n != 1) {
    throw std::invalid_argument(std::string(who) + ": only one-dimensional fibers are supported");
  }
  for (const grid::GridField* f : {&phi, &eta}) {
    if (f->geom.n != 1 || f->geom.m != g.base.m || f->v.size() != g.base_cells()) {
      throw std::invalid_argument(std::string(who) + ": potential does not match the base grid");
    }
  }
}

// One fiber row (fixed chart, fixed l) of the lift; k-major, base-minor.
void fill_plane(const ProductGeometry& g, const FiberTables& tab, int chart, int l,
                const grid::GridField& phi, const grid::GridField& eta,
                const lift::LiftConfig& cfg, double* out) {
  const int p = g.fiber_points();
  const std::size_t cells = g.base_cells();
  for (int k = 0; k < p; ++k) {
    const std::size_t t = static_cast<std::size_t>(l) * p + k;
    const double lz = cfg.c0 * tab.logz2[chart][t];
    const double l0 = cfg.c0 * tab.l0[chart][t];
    double* row = out + static_cast<std::size_t>(k) * cells;
    for (std::size_t b = 0; b < cells; ++b) {
      const double ah = 0.5 * (lz + phi.v[b] - eta.v[b]);
      row[b] = l0 + eta.v[b] - simplex::envelope1(ah);
    }
  }
}

struct MaCtx {
  std::size_t cells = 0;  // base cells
  double theta = 0.0;
  double c0 = 0.0;
  double cbb = 0.0;  // 1/(4 pi h_b^2)
  double cff = 0.0;  // 1/(4 pi h_f^2)
  double cbf = 0.0;  // 1/(16 pi h_b h_f)
  const std::size_t* bxp = nullptr;
  const std::size_t* bxn = nullptr;
  const std::size_t* byp = nullptr;
  const std::size_t* byn = nullptr;
};

struct CellVal {
  double density;
  double lam_min;
};

inline CellVal ma_cell(const double* dn, const double* mid, const double* up, int k,
                       std::size_t b, double fs, const MaCtx& c) {
  const double* m0 = mid + static_cast<std::size_t>(k) * c.cells;
  const double* mku = mid + static_cast<std::size_t>(k + 1) * c.cells;
  const double* mkd = mid + static_cast<std::size_t>(k - 1) * c.cells;
  const double* u0 = up + static_cast<std::size_t>(k) * c.cells;
  const double* d0 = dn + static_cast<std::size_t>(k) * c.cells;
  const double f0 = m0[b];
  const std::size_t xp = c.bxp[b];
  const std::size_t xn = c.bxn[b];
  const std::size_t yp = c.byp[b];
  const std::size_t yn = c.byn[b];

  const double t_bb = c.theta + (m0[xp] + m0[xn] + m0[yp] + m0[yn] - 4.0 * f0) * c.cbb;
  const double t_ff = c.c0 * fs + (mku[b] + mkd[b] + u0[b] + d0[b] - 4.0 * f0) * c.cff;
  const double dxu = mku[xp] - mku[xn] - mkd[xp] + mkd[xn];
  const double dyv = u0[yp] - u0[yn] - d0[yp] + d0[yn];
  const double dxv = u0[xp] - u0[xn] - d0[xp] + d0[xn];
  const double dyu = mku[yp] - mku[yn] - mkd[yp] + mkd[yn];
  const double re = (dxu + dyv) * c.cbf;
  const double im = (dxv - dyu) * c.cbf;

  const double density = 2.0 * (t_bb * t_ff - re * re - im * im);
  const double half_tr = 0.5 * (t_bb + t_ff);
  const double half_gap = 0.5 * (t_bb - t_ff);
  const double lam = half_tr - std::sqrt(half_gap * half_gap + re * re + im * im);
  return {density, lam};
}

struct MaAccum {
  LiftMaStats stats;
  std::vector<double> ring_sum;  // clamped ring density per base cell
  long ring_cells = 0;           // fiber cells in the extrapolation ring
  std::vector<double>* cell_mass = nullptr;  // materialized measure, optional
  std::vector<double>* base_mass = nullptr;  // streaming pushforward, optional
  // Present only when the lift structure is known (streaming path).
  const grid::GridField* phi = nullptr;
  const grid::GridField* eta = nullptr;
};

void process_row(const ProductGeometry& g, const lift::LiftConfig& cfg, const FiberTables& tab,
                 const MaCtx& ctx, int chart, int l, const double* dn, const double* mid,
                 const double* up, MaAccum& acc) {
  const int p = g.fiber_points();
  const double h = g.fiber_h();
  const double excl_r2 = 1.1 * h * (1.1 * h);
  const double ring_r2 = 2.5 * h * (2.5 * h);
  const double vol_b = g.base.cell_volume();
  const double wcell = h * h / g.fs_norm;

  for (int k = 0; k < p; ++k) {
    if (!g.owned(chart, k, l)) continue;
    const std::size_t t = static_cast<std::size_t>(l) * p + k;
    const double fs = tab.fs[t];

    if (chart == 1 && tab.w2[t] <= excl_r2) {
      acc.stats.excluded_cells += 1;
      continue;
    }
    const bool ring = chart == 1 && tab.w2[t] <= ring_r2;
    if (ring) acc.ring_cells += 1;

    for (std::size_t b = 0; b < ctx.cells; ++b) {
      const CellVal cv = ma_cell(dn, mid, up, k, b, fs, ctx);
      const double clamped = cv.density < 0.0 ? 0.0 : cv.density;
      if (cv.lam_min < -1e-3) acc.stats.negative_warning_cells += 1;
      if (ring) acc.ring_sum[b] += clamped;

      const double mass = clamped * vol_b * wcell;
      acc.stats.clamped_mass += (clamped - cv.density) * vol_b * wcell;
      if (acc.phi != nullptr) {
        const double ah =
            0.5 * (cfg.c0 * tab.logz2[chart][t] + acc.phi->v[b] - acc.eta->v[b]);
        if (!(ah > 0.0 && ah < 1.0)) acc.stats.off_v_mass += mass;
      }
      if (acc.cell_mass != nullptr) (*acc.cell_mass)[g.index(chart, k, l, b)] = mass;
      if (acc.base_mass != nullptr) (*acc.base_mass)[b] += mass;
    }
  }
}

void finalize_stats(const ProductGeometry& g, MaAccum& acc) {
  const double h = g.fiber_h();
  acc.stats.excluded_area = static_cast<double>(acc.stats.excluded_cells) * h * h;
  if (acc.ring_cells > 0) {
    const double vol_b = g.base.cell_volume();
    double est = 0.0;
    for (double s : acc.ring_sum) {
      est += (s / static_cast<double>(acc.ring_cells)) * acc.stats.excluded_area * vol_b /
             g.fs_norm;
    }
    acc.stats.excluded_mass_estimate = est;
  }
}

}  // namespace

std::size_t ProductGeometry::num_points() const {
  const std::size_t p = static_cast<std::size_t>(fiber_points());
  return 2 * p * p * base_cells();
}

std::size_t ProductGeometry::index(int chart, int k, int l, std::size_t b) const {
  const std::size_t p = static_cast<std::size_t>(fiber_points());
  return ((static_cast<std::size_t>(chart) * p + static_cast<std::size_t>(l)) * p +
          static_cast<std::size_t>(k)) *
             base_cells() +
         b;
}

bool ProductGeometry::owned(int chart, int k, int l) const {
  const double u = fiber_center(k);
  const double v = fiber_center(l);
  const double w2 = u * u + v * v;
  return chart == 0 ? w2 <= 1.0 : w2 < 1.0;
}

ProductGeometry make_product(const grid::TorusGeometry& base, int fiber_cells) {
  if (base.n != 1) throw std::invalid_argument("make_product: base must be one-dimensional");
  if (fiber_cells < 8 || fiber_cells % 2 != 0) {
    throw std::invalid_argument("make_product: fiber_cells must be even and >= 8");
  }
  ProductGeometry g{base, fiber_cells, 2, 0.0};
  const int p = g.fiber_points();
  const double h = g.fiber_h();
  double norm = 0.0;
  for (int chart = 0; chart < 2; ++chart) {
    for (int l = 0; l < p; ++l) {
      for (int k = 0; k < p; ++k) {
        if (!g.owned(chart, k, l)) continue;
        norm += fs_density({g.fiber_center(k), g.fiber_center(l)}) * h * h;
      }
    }
  }
  g.fs_norm = norm;
  return g;
}

double fs_density(std::complex<double> w) {
  const double d = 1.0 + std::norm(w);
  return 1.0 / (std::numbers::pi * d * d);
}

double ProductMeasure::per_base(std::size_t b) const {
  const int p = geom.fiber_points();
  double s = 0.0;
  for (int chart = 0; chart < 2; ++chart) {
    for (int l = 0; l < p; ++l) {
      for (int k = 0; k < p; ++k) s += mass[geom.index(chart, k, l, b)];
    }
  }
  return s;
}

double ProductMeasure::total() const {
  double s = 0.0;
  for (std::size_t b = 0; b < geom.base_cells(); ++b) s += per_base(b);
  return s;
}

ProductField lift_field(const ProductGeometry& geom, const grid::GridField& phi,
                        const grid::GridField& eta, const lift::LiftConfig& cfg) {
  check_lift_inputs(geom, phi, eta, cfg, "lift_field");
  const FiberTables tab = build_tables(geom);
  ProductField out{geom, std::vector<double>(geom.num_points())};
  const int p = geom.fiber_points();
  const std::size_t plane = static_cast<std::size_t>(p) * geom.base_cells();
  for (int chart = 0; chart < 2; ++chart) {
    for (int l = 0; l < p; ++l) {
      double* dst = out.v.data() + (static_cast<std::size_t>(chart) * p + l) * plane;
      fill_plane(geom, tab, chart, l, phi, eta, cfg, dst);
    }
  }
  return out;
}

ProductMeasure ma_lift(const ProductField& pot, const lift::LiftConfig& cfg) {
  const ProductGeometry& g = pot.geom;
  if (cfg.big_n != 1) throw std::invalid_argument("ma_lift: only one-dimensional fibers");
  if (pot.v.size() != g.num_points()) throw std::invalid_argument("ma_lift: field size mismatch");

  const FiberTables tab = build_tables(g);
  const BaseTables bt = build_base_tables(g.base);
  const double hb = 1.0 / g.base.m;
  const double hf = g.fiber_h();
  const MaCtx ctx{g.base_cells(),          g.base.theta_mass,
                  cfg.c0,                  kInv4Pi / (hb * hb),
                  kInv4Pi / (hf * hf),     kInv4Pi / (4.0 * hb * hf),
                  bt.xp.data(),            bt.xn.data(),
                  bt.yp.data(),            bt.yn.data()};

  ProductMeasure mu{g, std::vector<double>(g.num_points(), 0.0), {}};
  MaAccum acc;
  acc.ring_sum.assign(g.base_cells(), 0.0);
  acc.cell_mass = &mu.mass;

  const int p = g.fiber_points();
  const std::size_t plane = static_cast<std::size_t>(p) * g.base_cells();
  for (int chart = 0; chart < 2; ++chart) {
    const double* cb = pot.v.data() + static_cast<std::size_t>(chart) * p * plane;
    for (int l = g.pad; l < g.pad + g.fiber_cells; ++l) {
      process_row(g, cfg, tab, ctx, chart, l, cb + (l - 1) * plane, cb + l * plane,
                  cb + (l + 1) * plane, acc);
    }
  }
  finalize_stats(g, acc);
  mu.stats = acc.stats;
  mu.stats.total_mass = mu.total();
  return mu;
}

grid::MeasureField pushforward(const ProductMeasure& mu) {
  grid::MeasureField out{mu.geom.base, std::vector<double>(mu.geom.base_cells())};
  for (std::size_t b = 0; b < out.mass.size(); ++b) out.mass[b] = mu.per_base(b);
  return out;
}

std::pair<grid::MeasureField, LiftMaStats> ma_lift_pushforward(const ProductGeometry& geom,
                                                               const grid::GridField& phi,
                                                               const grid::GridField& eta,
                                                               const lift::LiftConfig& cfg) {
  check_lift_inputs(geom, phi, eta, cfg, "ma_lift_pushforward");
  const FiberTables tab = build_tables(geom);
  const BaseTables bt = build_base_tables(geom.base);
  const double hb = 1.0 / geom.base.m;
  const double hf = geom.fiber_h();
  const MaCtx ctx{geom.base_cells(),       geom.base.theta_mass,
                  cfg.c0,                  kInv4Pi / (hb * hb),
                  kInv4Pi / (hf * hf),     kInv4Pi / (4.0 * hb * hf),
                  bt.xp.data(),            bt.xn.data(),
                  bt.yp.data(),            bt.yn.data()};

  grid::MeasureField out{geom.base, std::vector<double>(geom.base_cells(), 0.0)};
  MaAccum acc;
  acc.ring_sum.assign(geom.base_cells(), 0.0);
  acc.base_mass = &out.mass;
  acc.phi = &phi;
  acc.eta = &eta;

  const int p = geom.fiber_points();
  const std::size_t plane = static_cast<std::size_t>(p) * geom.base_cells();
  std::vector<double> ring(3 * plane);
  const auto slot = [&](int l) { return ring.data() + static_cast<std::size_t>(l % 3) * plane; };

  for (int chart = 0; chart < 2; ++chart) {
    fill_plane(geom, tab, chart, 1, phi, eta, cfg, slot(1));
    fill_plane(geom, tab, chart, 2, phi, eta, cfg, slot(2));
    for (int l = geom.pad; l < geom.pad + geom.fiber_cells; ++l) {
      fill_plane(geom, tab, chart, l + 1, phi, eta, cfg, slot(l + 1));
      process_row(geom, cfg, tab, ctx, chart, l, slot(l - 1), slot(l), slot(l + 1), acc);
    }
  }
  finalize_stats(geom, acc);
  acc.stats.total_mass = out.total();
  return {std::move(out), acc.stats};
}

void scan_fiber_density(const ProductGeometry& geom, const grid::GridField& phi,
                        const grid::GridField& eta, const lift::LiftConfig& cfg,
                        const std::function<void(const FiberCellInfo&)>& visit) {
  check_lift_inputs(geom, phi, eta, cfg, "scan_fiber_density");
  const FiberTables tab = build_tables(geom);
  const double hf = geom.fiber_h();
  const double cff = kInv4Pi / (hf * hf);
  const std::size_t cells = geom.base_cells();

  const int p = geom.fiber_points();
  const std::size_t plane = static_cast<std::size_t>(p) * cells;
  std::vector<double> ring(3 * plane);
  const auto slot = [&](int l) { return ring.data() + static_cast<std::size_t>(l % 3) * plane; };

  FiberCellInfo info;
  for (int chart = 0; chart < 2; ++chart) {
    info.chart = chart;
    fill_plane(geom, tab, chart, 1, phi, eta, cfg, slot(1));
    fill_plane(geom, tab, chart, 2, phi, eta, cfg, slot(2));
    for (int l = geom.pad; l < geom.pad + geom.fiber_cells; ++l) {
      fill_plane(geom, tab, chart, l + 1, phi, eta, cfg, slot(l + 1));
      const double* dn = slot(l - 1);
      const double* mid = slot(l);
      const double* up = slot(l + 1);
      info.l = l;
      for (int k = 0; k < p; ++k) {
        if (!geom.owned(chart, k, l)) continue;
        info.k = k;
        const std::size_t t = static_cast<std::size_t>(l) * p + k;
        const double fs = cfg.c0 * tab.fs[t];
        const double lz = cfg.c0 * tab.logz2[chart][t];
        const double* m0 = mid + static_cast<std::size_t>(k) * cells;
        const double* mku = mid + static_cast<std::size_t>(k + 1) * cells;
        const double* mkd = mid + static_cast<std::size_t>(k - 1) * cells;
        const double* u0 = up + static_cast<std::size_t>(k) * cells;
        const double* d0 = dn + static_cast<std::size_t>(k) * cells;
        for (std::size_t b = 0; b < cells; ++b) {
          const double t_ff = fs + (mku[b] + mkd[b] + u0[b] + d0[b] - 4.0 * m0[b]) * cff;
          info.base_index = b;
          info.t_ff = t_ff < 0.0 ? 0.0 : t_ff;
          info.alpha_center = 0.5 * (lz + phi.v[b] - eta.v[b]);
          visit(info);
        }
      }
    }
  }
}

std::optional<std::string> branch_psh_violation(const ProductGeometry& geom,
                                                const grid::GridField& phi,
                                                const grid::GridField& eta,
                                                const lift::LiftConfig& cfg, int alpha_steps,
                                                double tol) {
  check_lift_inputs(geom, phi, eta, cfg, "branch_psh_violation");
  if (alpha_steps < 1) throw std::invalid_argument("branch_psh_violation: need alpha_steps >= 1");
  grid::GridField pot = grid::make_field(geom.base);
  for (int s = 0; s <= alpha_steps; ++s) {
    const double t = static_cast<double>(s) / alpha_steps;
    for (std::size_t c = 0; c < pot.v.size(); ++c) {
      pot.v[c] = (1.0 - t) * eta.v[c] + t * phi.v[c];
    }
    const auto form = grid::add(grid::theta_form(geom.base), grid::ddc(pot));
    if (const auto bad = grid::psh_violation(form, tol)) {
      return "branch weight " + std::to_string(t) + ": base form not positive at cell " +
             std::to_string(*bad);
    }
  }
  return std::nullopt;
}

}  // namespace pshlab::product
