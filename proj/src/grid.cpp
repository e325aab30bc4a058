#include "pshlab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pshlab::grid {
namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

void require_same_geom(const TorusGeometry& a, const TorusGeometry& b, const char* who) {
  if (a.n != b.n || a.m != b.m) {
    throw std::invalid_argument(std::string(who) + ": mismatched geometries");
  }
}

}  // namespace

std::size_t TorusGeometry::num_cells() const {
  const std::size_t mm = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  return n == 1 ? mm : mm * mm;
}

double TorusGeometry::cell_volume() const {
  return 1.0 / static_cast<double>(num_cells());
}

double TorusGeometry::theta_coeff() const {
  return n == 1 ? theta_mass : theta_mass / std::sqrt(2.0);
}

TorusGeometry make_torus(int n, int m, double theta_mass) {
  if (n != 1 && n != 2) throw std::invalid_argument("make_torus: n must be 1 or 2");
  if (m < 5) throw std::invalid_argument("make_torus: need at least 5 points per axis");
  if (!(theta_mass > 0.0) || !std::isfinite(theta_mass)) {
    throw std::invalid_argument("make_torus: theta_mass must be positive");
  }
  return TorusGeometry{n, m, theta_mass};
}

GridField make_field(const TorusGeometry& geom) {
  return GridField{geom, std::vector<double>(geom.num_cells(), 0.0)};
}

GridField sample(const TorusGeometry& geom,
                 const std::function<double(std::span<const double>)>& f) {
  GridField out = make_field(geom);
  const int m = geom.m;
  const double h = 1.0 / m;
  if (geom.n == 1) {
    double xy[2];
    std::size_t c = 0;
    for (int i = 0; i < m; ++i) {
      xy[0] = i * h;
      for (int j = 0; j < m; ++j) {
        xy[1] = j * h;
        out.v[c++] = f(std::span<const double>(xy, 2));
      }
    }
  } else {
    double xy[4];
    std::size_t c = 0;
    for (int i = 0; i < m; ++i) {
      xy[0] = i * h;
      for (int j = 0; j < m; ++j) {
        xy[1] = j * h;
        for (int k = 0; k < m; ++k) {
          xy[2] = k * h;
          for (int l = 0; l < m; ++l) {
            xy[3] = l * h;
            out.v[c++] = f(std::span<const double>(xy, 4));
          }
        }
      }
    }
  }
  return out;
}

FormField ddc(const GridField& u) {
  const TorusGeometry& geom = u.geom;
  if (u.v.size() != geom.num_cells()) throw std::invalid_argument("ddc: field size mismatch");
  const int m = geom.m;
  const double h = 1.0 / m;

  FormField out;
  out.geom = geom;
  out.d11.resize(geom.num_cells());

  if (geom.n == 1) {
    const double c = kInv4Pi / (h * h);
    for (int i = 0; i < m; ++i) {
      const int ip = (i + 1) % m;
      const int in = (i + m - 1) % m;
      for (int j = 0; j < m; ++j) {
        const int jp = (j + 1) % m;
        const int jn = (j + m - 1) % m;
        const double lap = u.v[static_cast<std::size_t>(ip) * m + j] +
                           u.v[static_cast<std::size_t>(in) * m + j] +
                           u.v[static_cast<std::size_t>(i) * m + jp] +
                           u.v[static_cast<std::size_t>(i) * m + jn] -
                           4.0 * u.v[static_cast<std::size_t>(i) * m + j];
        out.d11[static_cast<std::size_t>(i) * m + j] = lap * c;
      }
    }
    return out;
  }

  out.d22.resize(geom.num_cells());
  out.re12.resize(geom.num_cells());
  out.im12.resize(geom.num_cells());

  // Every second derivative is a product of centered first differences, so
  // each one spans 2h; the shared denominator is 1/(2h)^2.
  const double c4 = 1.0 / (4.0 * h * h);
  const auto at = [&](int i, int j, int k, int l) {
    const auto w = [m](int t) { return (t + m) % m; };
    return u.v[((static_cast<std::size_t>(w(i)) * m + w(j)) * m + w(k)) * m + w(l)];
  };

  std::size_t c = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l, ++c) {
          const double f0 = u.v[c];
          const double dx1x1 = (at(i + 2, j, k, l) - 2.0 * f0 + at(i - 2, j, k, l)) * c4;
          const double dy1y1 = (at(i, j + 2, k, l) - 2.0 * f0 + at(i, j - 2, k, l)) * c4;
          const double dx2x2 = (at(i, j, k + 2, l) - 2.0 * f0 + at(i, j, k - 2, l)) * c4;
          const double dy2y2 = (at(i, j, k, l + 2) - 2.0 * f0 + at(i, j, k, l - 2)) * c4;
          const double dx1x2 = (at(i + 1, j, k + 1, l) - at(i + 1, j, k - 1, l) -
                                at(i - 1, j, k + 1, l) + at(i - 1, j, k - 1, l)) *
                               c4;
          const double dy1y2 = (at(i, j + 1, k, l + 1) - at(i, j + 1, k, l - 1) -
                                at(i, j - 1, k, l + 1) + at(i, j - 1, k, l - 1)) *
                               c4;
          const double dx1y2 = (at(i + 1, j, k, l + 1) - at(i + 1, j, k, l - 1) -
                                at(i - 1, j, k, l + 1) + at(i - 1, j, k, l - 1)) *
                               c4;
          const double dy1x2 = (at(i, j + 1, k + 1, l) - at(i, j + 1, k - 1, l) -
                                at(i, j - 1, k + 1, l) + at(i, j - 1, k - 1, l)) *
                               c4;
          out.d11[c] = (dx1x1 + dy1y1) * kInv4Pi;
          out.d22[c] = (dx2x2 + dy2y2) * kInv4Pi;
          out.re12[c] = (dx1x2 + dy1y2) * kInv4Pi;
          out.im12[c] = (dx1y2 - dy1x2) * kInv4Pi;
        }
      }
    }
  }
  return out;
}

FormField theta_form(const TorusGeometry& geom, double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("theta_form: mass must be positive");
  }
  const double coeff = geom.n == 1 ? mass : mass / std::sqrt(2.0);
  FormField out;
  out.geom = geom;
  out.d11.assign(geom.num_cells(), coeff);
  if (geom.n == 2) {
    out.d22.assign(geom.num_cells(), coeff);
    out.re12.assign(geom.num_cells(), 0.0);
    out.im12.assign(geom.num_cells(), 0.0);
  }
  return out;
}

FormField theta_form(const TorusGeometry& geom) { return theta_form(geom, geom.theta_mass); }

FormField add(const FormField& a, const FormField& b) {
  require_same_geom(a.geom, b.geom, "add");
  FormField out = a;
  for (std::size_t c = 0; c < out.d11.size(); ++c) out.d11[c] += b.d11[c];
  for (std::size_t c = 0; c < out.d22.size(); ++c) out.d22[c] += b.d22[c];
  for (std::size_t c = 0; c < out.re12.size(); ++c) out.re12[c] += b.re12[c];
  for (std::size_t c = 0; c < out.im12.size(); ++c) out.im12[c] += b.im12[c];
  return out;
}

MeasureField mixed_ma(std::span<const FormField> forms) {
  if (forms.empty()) throw std::invalid_argument("mixed_ma: no forms given");
  const TorusGeometry& geom = forms[0].geom;
  if (forms.size() != static_cast<std::size_t>(geom.n)) {
    throw std::invalid_argument("mixed_ma: need exactly n forms");
  }
  for (const FormField& f : forms) require_same_geom(geom, f.geom, "mixed_ma");

  MeasureField out;
  out.geom = geom;
  out.mass.resize(geom.num_cells());
  const double vol = geom.cell_volume();

  if (geom.n == 1) {
    for (std::size_t c = 0; c < out.mass.size(); ++c) out.mass[c] = forms[0].d11[c] * vol;
    return out;
  }

  const FormField& g = forms[0];
  const FormField& h = forms[1];
  for (std::size_t c = 0; c < out.mass.size(); ++c) {
    const double density = g.d11[c] * h.d22[c] + g.d22[c] * h.d11[c] -
                           2.0 * (g.re12[c] * h.re12[c] + g.im12[c] * h.im12[c]);
    out.mass[c] = density * vol;
  }
  return out;
}

double MeasureField::total() const {
  double s = 0.0;
  for (double v : mass) s += v;
  return s;
}

double integrate(const GridField& f, const MeasureField& mu) {
  require_same_geom(f.geom, mu.geom, "integrate");
  double s = 0.0;
  for (std::size_t c = 0; c < f.v.size(); ++c) s += f.v[c] * mu.mass[c];
  return s;
}

double tv_distance(const MeasureField& a, const MeasureField& b) {
  require_same_geom(a.geom, b.geom, "tv_distance");
  double s = 0.0;
  for (std::size_t c = 0; c < a.mass.size(); ++c) s += std::fabs(a.mass[c] - b.mass[c]);
  return 0.5 * s;
}

std::optional<std::size_t> psh_violation(const FormField& form, double tol) {
  if (form.geom.n == 1) {
    for (std::size_t c = 0; c < form.d11.size(); ++c) {
      if (form.d11[c] < -tol) return c;
    }
    return std::nullopt;
  }
  for (std::size_t c = 0; c < form.d11.size(); ++c) {
    const double half_tr = 0.5 * (form.d11[c] + form.d22[c]);
    const double half_gap = 0.5 * (form.d11[c] - form.d22[c]);
    const double rad =
        std::sqrt(half_gap * half_gap + form.re12[c] * form.re12[c] + form.im12[c] * form.im12[c]);
    if (half_tr - rad < -tol) return c;
  }
  return std::nullopt;
}

double dini_right(const std::function<double(double)>& h, double a0) {
  if (!(a0 > 0.0) || !std::isfinite(a0)) {
    throw std::invalid_argument("dini_right: a0 must be positive");
  }
  // Cache the three samples: the halving quotient D(a) = (h(a)-h(a/2))/(a/2)
  // is extrapolated once, which kills the linear error term.
  const double h0 = h(a0);
  const double h1 = h(a0 / 2);
  const double h2 = h(a0 / 4);
  const double d_a0 = (h0 - h1) / (a0 / 2);
  const double d_half = (h1 - h2) / (a0 / 4);
  return 2.0 * d_half - d_a0;
}

void write_csv(const std::filesystem::path& path, const GridField& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  const int m = f.geom.m;
  char buf[64];
  if (f.geom.n == 1) {
    out << "i,j,value\n";
    std::size_t c = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j, ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", f.v[c]);
        out << i << ',' << j << ',' << buf << '\n';
      }
    }
  } else {
    out << "i,j,k,l,value\n";
    std::size_t c = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          for (int l = 0; l < m; ++l, ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", f.v[c]);
            out << i << ',' << j << ',' << k << ',' << l << ',' << buf << '\n';
          }
        }
      }
    }
  }
}

}  // namespace pshlab::grid
