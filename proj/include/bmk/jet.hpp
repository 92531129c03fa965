#pragma once

// Second-order forward-mode Taylor jets in (up to) four variables.
//
// A Jet carries a value, its gradient and its Hessian with respect to the
// chart coordinates. Coefficient functions of catalog fields are written once
// as generic lambdas and instantiated both for `double` (plain evaluation) and
// for `Jet` (evaluation with exact first and second partials).

#include <array>
#include <cmath>

namespace bmk {

inline constexpr int kMaxDim = 4;

struct Jet {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
  std::array<std::array<double, kMaxDim>, kMaxDim> h{};

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: implicit by design of generic code

  /// Independent variable `slot` with the given value.
  static Jet variable(double value, int slot) {
    Jet j(value);
    j.g[slot] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < kMaxDim; ++i) {
      g[i] += o.g[i];
      for (int k = 0; k < kMaxDim; ++k) h[i][k] += o.h[i][k];
    }
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < kMaxDim; ++i) {
      g[i] -= o.g[i];
      for (int k = 0; k < kMaxDim; ++k) h[i][k] -= o.h[i][k];
    }
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    for (int i = 0; i < kMaxDim; ++i) {
      g[i] *= s;
      for (int k = 0; k < kMaxDim; ++k) h[i][k] *= s;
    }
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    Jet r(v * o.v);
    for (int i = 0; i < kMaxDim; ++i) {
      r.g[i] = g[i] * o.v + v * o.g[i];
      for (int k = 0; k < kMaxDim; ++k)
        r.h[i][k] = h[i][k] * o.v + g[i] * o.g[k] + o.g[i] * g[k] + v * o.h[i][k];
    }
    *this = r;
    return *this;
  }
  Jet& operator/=(const Jet& o);
};

/// Chain rule: f(a) given f(a.v), f'(a.v), f''(a.v).
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r(f0);
  for (int i = 0; i < kMaxDim; ++i) {
    r.g[i] = f1 * a.g[i];
    for (int k = 0; k < kMaxDim; ++k) r.h[i][k] = f1 * a.h[i][k] + f2 * a.g[i] * a.g[k];
  }
  return r;
}

inline Jet operator-(Jet a) {
  a *= -1.0;
  return a;
}
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) {
  a.v += s;
  return a;
}
inline Jet operator+(double s, Jet a) { return a + s; }
inline Jet operator-(Jet a, double s) {
  a.v -= s;
  return a;
}
inline Jet operator-(double s, const Jet& a) { return -a + s; }

inline Jet reciprocal(const Jet& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}
inline Jet& Jet::operator/=(const Jet& o) { return *this *= reciprocal(o); }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
inline Jet operator/(double s, const Jet& a) { return s * reciprocal(a); }

inline Jet sin(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, s, c, -s);
}
inline Jet cos(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, c, -s, -c);
}
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet sqrt(const Jet& a) {
  const double r = std::sqrt(a.v);
  return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}
inline Jet tan(const Jet& a) {
  const double t = std::tan(a.v);
  const double sec2 = 1.0 + t * t;
  return chain(a, t, sec2, 2.0 * t * sec2);
}
/// |a|, differentiated on the branch selected by the sign of the value.
inline Jet abs(const Jet& a) { return a.v < 0.0 ? -a : a; }

// Plain-double counterparts so generic coefficient code can call sin(x)
// unqualified for both scalar types.
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double tan(double x) { return std::tan(x); }
inline double abs(double x) { return std::fabs(x); }

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

/// Moves derivative slots: slot i of `a` becomes slot map[i] (or is dropped when map[i] < 0).
inline Jet remap_slots(const Jet& a, const std::array<int, kMaxDim>& map) {
  Jet r(a.v);
  for (int i = 0; i < kMaxDim; ++i) {
    if (map[i] < 0) continue;
    r.g[map[i]] = a.g[i];
    for (int k = 0; k < kMaxDim; ++k)
      if (map[k] >= 0) r.h[map[i]][map[k]] = a.h[i][k];
  }
  return r;
}
inline double remap_slots(double a, const std::array<int, kMaxDim>&) { return a; }

/// Partial derivative along `slot` as a jet that is one order lower.
/// The Hessian of the result is left zero; callers track the lost order.
inline Jet partial(const Jet& a, int slot) {
  Jet r(a.g[slot]);
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = a.h[slot][k];
  return r;
}

}  // namespace bmk
