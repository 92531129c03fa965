#pragma once

// Concrete Beltrami 1-forms and Maxwell field sets with exact jets.

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bmk/bessel.hpp"
#include "bmk/chart.hpp"
#include "bmk/errors.hpp"
#include "bmk/forms.hpp"

namespace bmk {

struct Constants {
  double eps0 = 1.0;
  double mu0 = 1.0;
  std::string preset = "nondimensional";

  double c0() const { return 1.0 / std::sqrt(eps0 * mu0); }

  static Constants nondimensional() { return {}; }
  /// CODATA 2018 vacuum permittivity and permeability.
  static Constants si() { return {8.8541878128e-12, 1.25663706212e-6, "SI"}; }
  static Constants custom(double eps0, double mu0) {
    if (!(eps0 > 0.0) || !(mu0 > 0.0)) throw ConfigError("eps0 and mu0 must be positive");
    return {eps0, mu0, "custom"};
  }
  static Constants from_name(const std::string& name) {
    if (name == "nondimensional") return nondimensional();
    if (name == "SI" || name == "si") return si();
    throw ConfigError("unknown constants preset '" + name + "' (use nondimensional or SI)");
  }
};

/// Spatial 1-form v with *3 dv = k_expected v.
struct BeltramiForm {
  DifferentialForm form;
  double k_expected = 0.0;
  Chart chart;
  MetricField metric;
  std::string name;
  std::string identity;
  bool singular = false;     // v vanishes somewhere on the construction sample grid
  double min_norm_sq = 0.0;  // over that grid
};

/// Spacetime fields (e, h, B, D) on chart4, each without dx0 components.
struct MaxwellFieldSet {
  DifferentialForm e, h, B, D;
  Constants constants;
  Chart chart4;
  MetricField g3;
  MetricField g4;
  std::string name;
  std::string identity;
  double e0 = 0.0;
  double k = 0.0;
  /// Present for fields of the form e = f_e(x0) v, h = f_h(x0) v.
  std::optional<BeltramiForm> beltrami;
  std::function<double(double)> f_e, f_h;

  double c0() const { return constants.c0(); }

  /// F0 = -c0 B - e ^ dx0.
  DifferentialForm F0() const {
    const auto dx0 = DifferentialForm::basis(chart4, {0});
    return sub(scale(-c0(), B), wedge(e, dx0));
  }
  /// F1 = D - c0^{-1} h ^ dx0.
  DifferentialForm F1() const {
    const auto dx0 = DifferentialForm::basis(chart4, {0});
    return sub(D, scale(1.0 / c0(), wedge(h, dx0)));
  }
};

/// Scalar profile f(xi) with derivatives up to third order.
struct Profile {
  std::string name;
  std::function<double(int, double)> deriv;  // deriv(n, xi) = f^{(n)}(xi), n <= 4
  bool periodic = false;                     // 2*pi periodic

  double operator()(double x) const { return deriv(0, x); }

  /// f^{(n)} of a scalar or jet argument.
  template <class S>
  S eval(int n, const S& xi) const {
    if constexpr (std::is_same_v<S, Jet>)
      return chain(xi, deriv(n, xi.v), deriv(n + 1, xi.v), deriv(n + 2, xi.v));
    else
      return deriv(n, xi);
  }

  static Profile sine() {
    return {"sin", [](int n, double x) {
              switch (((n % 4) + 4) % 4) {
                case 0: return std::sin(x);
                case 1: return std::cos(x);
                case 2: return -std::sin(x);
                default: return -std::cos(x);
              }
            },
            true};
  }
  static Profile cosine() {
    return {"cos", [](int n, double x) {
              switch (((n % 4) + 4) % 4) {
                case 0: return std::cos(x);
                case 1: return -std::sin(x);
                case 2: return -std::cos(x);
                default: return std::sin(x);
              }
            },
            true};
  }
  /// exp(-xi^2).
  static Profile gaussian() {
    return {"gaussian", [](int n, double x) {
              const double g = std::exp(-x * x);
              switch (n) {
                case 0: return g;
                case 1: return -2.0 * x * g;
                case 2: return (4.0 * x * x - 2.0) * g;
                case 3: return (-8.0 * x * x * x + 12.0 * x) * g;
                case 4: return (16.0 * x * x * x * x - 48.0 * x * x + 12.0) * g;
                default: throw ConfigError("gaussian profile derivatives are tabulated up to order 4");
              }
            },
            false};
  }
  static Profile from_name(const std::string& name) {
    if (name == "sin") return sine();
    if (name == "cos") return cosine();
    if (name == "gaussian") return gaussian();
    throw ConfigError("unknown profile '" + name + "' (use sin, cos or gaussian)");
  }
};

namespace detail {

inline void scan_norm(BeltramiForm& b, int n_per_axis = 16) {
  const Chart& c = b.chart;
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_per_axis; ++i)
    for (int j = 0; j < n_per_axis; ++j)
      for (int l = 0; l < n_per_axis; ++l) {
        Point p{};
        const int idx[3] = {i, j, l};
        for (int a = 0; a < 3; ++a) {
          const auto& ax = c.axis(a);
          const double t = static_cast<double>(idx[a]);
          if (ax.is_periodic())
            p[a] = ax.lo + ax.period() * t / n_per_axis;
          else
            p[a] = ax.lo + (ax.hi - ax.lo) * t / (n_per_axis - 1);
        }
        mn = std::min(mn, one_form_norm_sq(b.metric, b.form, p));
      }
  b.min_norm_sq = mn;
  b.singular = !(mn > 1e-12);
}

/// Amplitude factor as a spacetime 0-form depending on x0 only.
inline DifferentialForm time_factor(const Chart& chart4, double amp, double k, bool use_sin) {
  return DifferentialForm::analytic(chart4, 0, [amp, k, use_sin](auto s, const Point& p) {
    using S = decltype(s);
    Coeffs<S> c = zero_coeffs<S>();
    const S arg = k * coord<S>(p, 0);
    c[0] = amp * (use_sin ? bmk::sin(arg) : bmk::cos(arg));
    return c;
  });
}

inline void finish_maxwell(MaxwellFieldSet& m) {
  m.g4 = MetricField::lorentzian(m.g3);
  m.chart4 = m.g4.chart();
}

}  // namespace detail

/// v_n = c (cos(n x3) dx1 + sin(n x3) dx2) on T3, *3 dv_n = -n v_n.
inline BeltramiForm t3_mode(int n, double c) {
  if (n < 1) throw ConfigError("t3_mode: n must be >= 1");
  if (!(c > 0.0)) throw ConfigError("t3_mode: c must be > 0");
  BeltramiForm b;
  b.chart = Chart::torus3();
  b.metric = MetricField::euclidean(b.chart);
  const double nn = n;
  b.form = DifferentialForm::analytic(b.chart, 1, [nn, c](auto s, const Point& p) {
    using S = decltype(s);
    Coeffs<S> r = zero_coeffs<S>();
    const S a = nn * coord<S>(p, 2);
    r[0b001] = c * bmk::cos(a);
    r[0b010] = c * bmk::sin(a);
    return r;
  });
  b.k_expected = -nn;
  b.name = "t3_mode";
  b.identity = "*3 dv = -n v";
  detail::scan_norm(b);
  return b;
}

/// ABC flow 1-form on T3, *3 dv = v.
inline BeltramiForm abc_flow(double A, double B, double C) {
  if (A == 0.0 && B == 0.0 && C == 0.0) throw ConfigError("abc_flow: (A,B,C) must not all vanish");
  BeltramiForm b;
  b.chart = Chart::torus3();
  b.metric = MetricField::euclidean(b.chart);
  b.form = DifferentialForm::analytic(b.chart, 1, [A, B, C](auto s, const Point& p) {
    using S = decltype(s);
    const S x1 = coord<S>(p, 0), x2 = coord<S>(p, 1), x3 = coord<S>(p, 2);
    Coeffs<S> r = zero_coeffs<S>();
    r[0b001] = A * bmk::sin(x3) + C * bmk::cos(x2);
    r[0b010] = B * bmk::sin(x1) + A * bmk::cos(x3);
    r[0b100] = C * bmk::sin(x2) + B * bmk::cos(x1);
    return r;
  });
  b.k_expected = 1.0;
  b.name = "abc_flow";
  b.identity = "*3 dv = v";
  detail::scan_norm(b);
  return b;
}

enum class ModeSign { minus, plus };

/// Bessel mode on the solid torus (r, phi, x3), *3 dv = -+k v with k = sqrt(beta^2 + kc^2).
/// The r dphi component is stored on dphi, i.e. multiplied by r.
inline BeltramiForm solid_torus_mode(double kc, double beta, ModeSign sign, double a, double r_min = -1.0) {
  if (!(kc > 0.0)) throw ConfigError("solid_torus_mode: k_c must be > 0");
  if (!(a > 0.0)) throw ConfigError("solid_torus_mode: a must be > 0");
  if (r_min < 0.0) r_min = 1e-3 * a;
  if (!(r_min > 0.0 && r_min < a)) throw ConfigError("solid_torus_mode: need 0 < r_min < a");
  if (kc * a > 50.0) throw ConfigError("solid_torus_mode: k_c * a exceeds the Bessel evaluator range");
  BeltramiForm b;
  b.chart = Chart::solid_torus(a, r_min);
  b.metric = MetricField::solid_torus(b.chart);
  const double k = std::sqrt(beta * beta + kc * kc);
  const double sg = sign == ModeSign::minus ? -1.0 : 1.0;
  b.form = DifferentialForm::analytic(b.chart, 1, [kc, beta, k, sg](auto s, const Point& p) {
    using S = decltype(s);
    const S r = coord<S>(p, 0), x3 = coord<S>(p, 2);
    const S z = kc * r;
    const S j0 = bessel_j0(z), j1 = bessel_j1(z);
    const S bz = beta * x3;
    Coeffs<S> c = zero_coeffs<S>();
    c[0b001] = (beta / kc) * j1 * bmk::sin(bz);
    c[0b010] = sg * (k / kc) * j1 * bmk::cos(bz) * r;
    c[0b100] = j0 * bmk::cos(bz);
    return c;
  });
  b.k_expected = sg * k;
  b.name = "solid_torus_mode";
  b.identity = sign == ModeSign::minus ? "*3 dv = -k v, k^2 = beta^2 + kc^2" : "*3 dv = +k v, k^2 = beta^2 + kc^2";
  detail::scan_norm(b);
  return b;
}

/// e = e0 cos(k x0) v, h = e0/(c0 mu0) sin(k x0) v with *3 dv = -k v; D, B by the constitutive relations.
inline MaxwellFieldSet beltrami_maxwell(const BeltramiForm& v, double e0, const Constants& cst = {}) {
  const double k = -v.k_expected;
  if (k == 0.0) throw ConfigError("beltrami_maxwell: the Beltrami constant must be nonzero");
  if (v.singular) throw ConfigError("beltrami_maxwell: the Beltrami form vanishes on its sample grid");
  if (!(e0 > 0.0)) throw ConfigError("beltrami_maxwell: e0 must be > 0");
  MaxwellFieldSet m;
  m.constants = cst;
  m.g3 = v.metric;
  detail::finish_maxwell(m);
  const double c0 = cst.c0();
  const double amp_h = e0 / (c0 * cst.mu0);
  const DifferentialForm V = lift(v.form);
  m.e = multiply(detail::time_factor(m.chart4, e0, k, false), V);
  m.h = multiply(detail::time_factor(m.chart4, amp_h, k, true), V);
  m.D = scale(cst.eps0, spatial_hodge(m.g3, m.e));
  m.B = scale(cst.mu0, spatial_hodge(m.g3, m.h));
  m.e0 = e0;
  m.k = k;
  m.beltrami = v;
  m.f_e = [e0, k](double x0) { return e0 * std::cos(k * x0); };
  m.f_h = [amp_h, k](double x0) { return amp_h * std::sin(k * x0); };
  m.name = "beltrami_maxwell";
  m.identity = "e = e0 cos(k x0) v, h = e0/(c0 mu0) sin(k x0) v, *3 dv = -k v";
  return m;
}

/// Plane wave along x3: e = f(x3 - x0) dx1, h = f dx2 / (c0 mu0).
inline MaxwellFieldSet traveling_wave(const Profile& f, const Constants& cst = {}) {
  MaxwellFieldSet m;
  m.constants = cst;
  const Chart c3 = f.periodic ? Chart::torus3() : Chart::euclidean3();
  m.g3 = MetricField::euclidean(c3);
  detail::finish_maxwell(m);
  const double c0 = cst.c0(), eps0 = cst.eps0, mu0 = cst.mu0;
  auto form = [&](double scale_, Mask mask) {
    return DifferentialForm::analytic(m.chart4, mask_degree(mask), [f, scale_, mask](auto s, const Point& p) {
      using S = decltype(s);
      Coeffs<S> c = zero_coeffs<S>();
      c[mask] = scale_ * f.eval(0, coord<S>(p, 3) - coord<S>(p, 0));
      return c;
    });
  };
  m.e = form(1.0, 0b0010);
  m.h = form(1.0 / (c0 * mu0), 0b0100);
  m.D = form(eps0, 0b1100);
  m.B = form(-1.0 / c0, 0b1010);  // c0^{-1} f dx3^dx1
  m.e0 = 1.0;
  m.name = "traveling_wave";
  m.identity = "e = f(x3-x0) dx1, h = f(x3-x0) dx2/(c0 mu0)";
  return m;
}

/// Uniform fields e = e0 dx1, h = h0 dx1 on R3 or T3.
inline MaxwellFieldSet constant_field(double e0, double h0, bool periodic = false, const Constants& cst = {}) {
  if (!(e0 > 0.0) || !(h0 > 0.0)) throw ConfigError("constant_field: e0 and h0 must be > 0");
  MaxwellFieldSet m;
  m.constants = cst;
  const Chart c3 = periodic ? Chart::torus3() : Chart::euclidean3();
  m.g3 = MetricField::euclidean(c3);
  detail::finish_maxwell(m);
  m.e = DifferentialForm::basis(m.chart4, {1}, e0);
  m.h = DifferentialForm::basis(m.chart4, {1}, h0);
  m.B = DifferentialForm::basis(m.chart4, {2, 3}, cst.mu0 * h0);
  m.D = DifferentialForm::basis(m.chart4, {2, 3}, cst.eps0 * e0);
  m.e0 = e0;
  m.name = "constant_field";
  m.identity = "e = e0 dx1, h = h0 dx1";
  return m;
}

/// e = e0 f3(x3) w, h = (eps0 c0 / k) e0 f3'(x3) w, w = cos(k x0) dx1 - sin(k x0) dx2,
/// with f3 = sin(k x3) or cos(k x3).
inline MaxwellFieldSet parallel_nonbeltrami(double e0, double k, const std::string& f3, const Constants& cst = {}) {
  if (k == 0.0) throw ConfigError("parallel_nonbeltrami: k must be nonzero");
  if (f3 != "sin" && f3 != "cos") throw ConfigError("parallel_nonbeltrami: f3 must be sin or cos");
  MaxwellFieldSet m;
  m.constants = cst;
  m.g3 = MetricField::euclidean(Chart::euclidean3());
  detail::finish_maxwell(m);
  const Profile prof = Profile::from_name(f3);
  const double c0 = cst.c0();
  auto field = [&](double amp, int deriv) {
    return DifferentialForm::analytic(m.chart4, 1, [prof, amp, deriv, k](auto s, const Point& p) {
      using S = decltype(s);
      const S x0 = coord<S>(p, 0), x3 = coord<S>(p, 3);
      // d^n/dx3^n f3(k x3) = k^n f^{(n)}(k x3)
      const S f = (deriv == 0 ? 1.0 : k) * prof.eval(deriv, S(k * x3));
      Coeffs<S> c = zero_coeffs<S>();
      c[0b0010] = amp * f * bmk::cos(k * x0);
      c[0b0100] = -amp * f * bmk::sin(k * x0);
      return c;
    });
  };
  m.e = field(e0, 0);
  m.h = field(cst.eps0 * c0 / k * e0, 1);
  m.D = scale(cst.eps0, spatial_hodge(m.g3, m.e));
  m.B = scale(cst.mu0, spatial_hodge(m.g3, m.h));
  m.e0 = e0;
  m.k = k;
  m.name = "parallel_nonbeltrami";
  m.identity = "e = e0 f3(x3) w, h = (eps0 c0/k) e0 f3'(x3) w, w = cos(k x0) dx1 - sin(k x0) dx2";
  return m;
}

/// e = f dx1 + f' dx2 and h = (-f' dx1 + f dx2)/(c0 mu0), both functions of x3 - x0 and both
/// satisfying *3 d(.) = +(.). The electric and magnetic forms are not proportional.
inline MaxwellFieldSet beltrami_nonparallel(const Profile& f, const Constants& cst = {}) {
  if (f.name != "sin" && f.name != "cos") throw ConfigError("beltrami_nonparallel: profile must be sin or cos");
  MaxwellFieldSet m;
  m.constants = cst;
  m.g3 = MetricField::euclidean(Chart::torus3());
  detail::finish_maxwell(m);
  const double ch = 1.0 / (cst.c0() * cst.mu0);
  m.e = DifferentialForm::analytic(m.chart4, 1, [f](auto s, const Point& p) {
    using S = decltype(s);
    const S xi = coord<S>(p, 3) - coord<S>(p, 0);
    Coeffs<S> c = zero_coeffs<S>();
    c[0b0010] = f.eval(0, xi);
    c[0b0100] = f.eval(1, xi);
    return c;
  });
  m.h = DifferentialForm::analytic(m.chart4, 1, [f, ch](auto s, const Point& p) {
    using S = decltype(s);
    const S xi = coord<S>(p, 3) - coord<S>(p, 0);
    Coeffs<S> c = zero_coeffs<S>();
    c[0b0010] = -ch * f.eval(1, xi);
    c[0b0100] = ch * f.eval(0, xi);
    return c;
  });
  m.D = scale(cst.eps0, spatial_hodge(m.g3, m.e));
  m.B = scale(cst.mu0, spatial_hodge(m.g3, m.h));
  m.e0 = 1.0;
  m.name = "beltrami_nonparallel";
  m.identity = "e = f dx1 + f' dx2, h = (-f' dx1 + f dx2)/(c0 mu0), f'' = -f";
  return m;
}

struct AmplitudePair {
  double f_e = 0.0;
  double f_h = 0.0;
  double x0 = 0.0;
};

struct AmplitudeSolution {
  std::vector<AmplitudePair> rk4;
  std::vector<AmplitudePair> closed_form;
};

/// Amplitudes of e = f_e(x0) v, h = f_h(x0) v for a Beltrami form with *3 dv = k v:
/// df_e/dx0 = k/(c0 eps0) f_h, df_h/dx0 = -k/(c0 mu0) f_e from (f_e0, f_h0) at x0_grid[0].
inline AmplitudeSolution amplitude_ode(double k, double eps0, double mu0, double f_e0, double f_h0,
                                       const std::vector<double>& x0_grid) {
  if (k == 0.0) throw ConfigError("amplitude_ode: k must be nonzero");
  if (x0_grid.empty()) throw ConfigError("amplitude_ode: empty x0 grid");
  if (!(eps0 > 0.0) || !(mu0 > 0.0)) throw ConfigError("amplitude_ode: eps0 and mu0 must be positive");
  const double c0 = 1.0 / std::sqrt(eps0 * mu0);
  const double a = k / (c0 * eps0), b = -k / (c0 * mu0);
  AmplitudeSolution out;
  const double start = x0_grid.front();
  double fe = f_e0, fh = f_h0, x = start;
  const double hmax = 2.0 * std::numbers::pi / std::fabs(k) / 4000.0;
  for (double target : x0_grid) {
    const double span = target - x;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(span) / hmax)));
    const double h = span / steps;
    for (int i = 0; i < steps && span != 0.0; ++i) {
      const double k1e = a * fh, k1h = b * fe;
      const double k2e = a * (fh + 0.5 * h * k1h), k2h = b * (fe + 0.5 * h * k1e);
      const double k3e = a * (fh + 0.5 * h * k2h), k3h = b * (fe + 0.5 * h * k2e);
      const double k4e = a * (fh + h * k3h), k4h = b * (fe + h * k3e);
      fe += h / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e);
      fh += h / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h);
    }
    x = target;
    out.rk4.push_back({fe, fh, target});
    const double t = k * (target - start);
    out.closed_form.push_back({f_e0 * std::cos(t) + std::sqrt(mu0 / eps0) * f_h0 * std::sin(t),
                               f_h0 * std::cos(t) - std::sqrt(eps0 / mu0) * f_e0 * std::sin(t), target});
  }
  return out;
}

}  // namespace bmk
