#pragma once

// Differential forms, vector fields and metrics on a chart, with the
// operations of exterior calculus built on top of the pointwise algebra.
//
// Every field carries an `order`: the number of derivative levels its jet
// evaluation provides exactly (0, 1 or 2). Taking d lowers the order by one;
// at order 0 the exterior derivative falls back to finite differences.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bmk/algebra.hpp"
#include "bmk/chart.hpp"
#include "bmk/errors.hpp"
#include "bmk/jet.hpp"

namespace bmk {

/// Coordinate i as a scalar of type S; for jets it is the independent variable of slot i.
template <class S>
S coord(const Point& p, int i) {
  if constexpr (std::is_same_v<S, Jet>)
    return Jet::variable(p[static_cast<std::size_t>(i)], i);
  else
    return p[static_cast<std::size_t>(i)];
}

struct FdConfig {
  double step = 1e-4;  // scaled by period/(2*pi) on periodic axes
};

namespace detail {

/// 4th-order finite-difference derivative of an array-valued function along `axis`.
/// One-sided 5-point stencils are used within 2h of a finite interval endpoint.
template <class F>
auto fd_partial(const F& f, const Chart& chart, const Point& p, int axis, const FdConfig& fd) {
  const auto& ax = chart.axis(axis);
  const double h = ax.is_periodic() ? fd.step * ax.period() / (2.0 * std::numbers::pi) : fd.step;
  auto at = [&](double off) {
    Point q = p;
    q[axis] += off;
    return f(q);
  };
  using R = decltype(f(p));
  R out{};
  const double x = p[axis];
  const bool lo_ok = ax.is_periodic() || x - 2.0 * h >= ax.lo;
  const bool hi_ok = ax.is_periodic() || x + 2.0 * h <= ax.hi;
  if (lo_ok && hi_ok) {
    const R m2 = at(-2 * h), m1 = at(-h), p1 = at(h), p2 = at(2 * h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
    return out;
  }
  double s = 0.0;
  if (lo_ok && x - 4.0 * h >= ax.lo) s = -h;
  else if (hi_ok && x + 4.0 * h <= ax.hi) s = h;
  else if (!lo_ok && x + 4.0 * h <= ax.hi) s = h;
  else if (!hi_ok && x - 4.0 * h >= ax.lo) s = -h;
  else throw DomainError("finite-difference stencil leaves axis '" + ax.label + "'");
  const R f0 = at(0), f1 = at(s), f2 = at(2 * s), f3 = at(3 * s), f4 = at(4 * s);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (-25.0 * f0[i] + 48.0 * f1[i] - 36.0 * f2[i] + 16.0 * f3[i] - 3.0 * f4[i]) / (12.0 * s);
  return out;
}

inline const std::array<int, kMaxDim> kLiftSlots{1, 2, 3, -1};
inline const std::array<int, kMaxDim> kSliceSlots{-1, 0, 1, 2};

template <class S, std::size_t N>
std::array<S, N> remap_all(const std::array<S, N>& a, const std::array<int, kMaxDim>& map) {
  std::array<S, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = remap_slots(a[i], map);
  return r;
}

}  // namespace detail

/// Degree-k form given by per-mask coefficient functions.
class DifferentialForm {
 public:
  using ValueFn = std::function<Coeffs<double>(const Point&)>;
  using JetFn = std::function<Coeffs<Jet>(const Point&)>;

  DifferentialForm() = default;
  DifferentialForm(Chart chart, int degree, int order, ValueFn values, JetFn jets)
      : impl_(std::make_shared<Impl>(Impl{std::move(chart), degree, order, std::move(values), std::move(jets)})) {
    if (degree < 0 || degree > impl_->chart.dim()) throw DegreeError("form degree exceeds chart dimension");
    if (order > 0 && !impl_->jets) throw ConfigError("form declares derivative order without a jet evaluator");
  }

  /// From a generic callable `g(S{}, p) -> Coeffs<S>` instantiated for double and Jet.
  template <class G>
  static DifferentialForm analytic(Chart chart, int degree, G g, int order = 2) {
    return DifferentialForm(
        std::move(chart), degree, order, [g](const Point& p) { return g(0.0, p); },
        order > 0 ? JetFn([g](const Point& p) { return g(Jet{}, p); }) : JetFn{});
  }
  /// Values only; derivatives by finite differences.
  static DifferentialForm numeric(Chart chart, int degree, ValueFn values) {
    return DifferentialForm(std::move(chart), degree, 0, std::move(values), {});
  }
  static DifferentialForm constant(Chart chart, int degree, const Coeffs<double>& c) {
    return analytic(std::move(chart), degree, [c](auto s, const Point&) {
      using S = decltype(s);
      Coeffs<S> r;
      for (int i = 0; i < kMasks; ++i) r[i] = S(c[i]);
      return r;
    });
  }
  static DifferentialForm zero(Chart chart, int degree) { return constant(std::move(chart), degree, Coeffs<double>{}); }
  /// Constant basis form dx^{i1}^...^dx^{ik}.
  static DifferentialForm basis(Chart chart, const std::vector<int>& idx, double scale = 1.0) {
    Coeffs<double> c{};
    c[mask_of(idx, chart.dim())] = scale;
    return constant(std::move(chart), static_cast<int>(idx.size()), c);
  }

  bool valid() const { return static_cast<bool>(impl_); }
  const Chart& chart() const { return impl().chart; }
  int dim() const { return impl().chart.dim(); }
  int degree() const { return impl().degree; }
  int order() const { return impl().order; }

  Coeffs<double> values(const Point& p) const {
    impl().chart.require_contains(p);
    return impl().values(p);
  }
  Coeffs<Jet> jets(const Point& p) const {
    if (impl().order == 0) throw ConfigError("form has no analytic derivative data");
    impl().chart.require_contains(p);
    return impl().jets(p);
  }
  template <class S>
  Coeffs<S> eval(const Point& p) const {
    if constexpr (std::is_same_v<S, Jet>)
      return jets(p);
    else
      return values(p);
  }

  /// Coefficient on a strictly increasing multi-index.
  double coeff(const std::vector<int>& idx, const Point& p) const {
    if (static_cast<int>(idx.size()) != degree()) throw DegreeError("multi-index length differs from form degree");
    return values(p)[mask_of(idx, dim())];
  }
  /// Partial derivative of a coefficient along an axis: exact when jets are available.
  double partial(const std::vector<int>& idx, const Point& p, int axis, const FdConfig& fd = {}) const {
    if (static_cast<int>(idx.size()) != degree()) throw DegreeError("multi-index length differs from form degree");
    const Mask m = mask_of(idx, dim());
    if (order() > 0) return jets(p)[m].g[axis];
    return detail::fd_partial([this](const Point& q) { return values(q); }, chart(), p, axis, fd)[m];
  }

 private:
  struct Impl {
    Chart chart;
    int degree;
    int order;
    ValueFn values;
    JetFn jets;
  };
  const Impl& impl() const {
    if (!impl_) throw ConfigError("use of an empty form");
    return *impl_;
  }
  std::shared_ptr<const Impl> impl_;
};

class VectorField {
 public:
  using ValueFn = std::function<Vec<double>(const Point&)>;
  using JetFn = std::function<Vec<Jet>(const Point&)>;

  VectorField() = default;
  VectorField(Chart chart, int order, ValueFn values, JetFn jets)
      : impl_(std::make_shared<Impl>(Impl{std::move(chart), order, std::move(values), std::move(jets)})) {
    if (order > 0 && !impl_->jets) throw ConfigError("vector field declares derivative order without a jet evaluator");
  }

  template <class G>
  static VectorField analytic(Chart chart, G g, int order = 2) {
    return VectorField(
        std::move(chart), order, [g](const Point& p) { return g(0.0, p); },
        order > 0 ? JetFn([g](const Point& p) { return g(Jet{}, p); }) : JetFn{});
  }
  static VectorField constant(Chart chart, const Vec<double>& c) {
    return analytic(std::move(chart), [c](auto s, const Point&) {
      using S = decltype(s);
      Vec<S> r;
      for (int i = 0; i < kMaxDim; ++i) r[i] = S(c[i]);
      return r;
    });
  }
  static VectorField zero(Chart chart) { return constant(std::move(chart), Vec<double>{}); }
  static VectorField numeric(Chart chart, ValueFn values) { return VectorField(std::move(chart), 0, std::move(values), {}); }

  bool valid() const { return static_cast<bool>(impl_); }
  const Chart& chart() const { return impl().chart; }
  int dim() const { return impl().chart.dim(); }
  int order() const { return impl().order; }

  Vec<double> values(const Point& p) const {
    impl().chart.require_contains(p);
    return impl().values(p);
  }
  Vec<Jet> jets(const Point& p) const {
    if (impl().order == 0) throw ConfigError("vector field has no analytic derivative data");
    impl().chart.require_contains(p);
    return impl().jets(p);
  }
  template <class S>
  Vec<S> eval(const Point& p) const {
    if constexpr (std::is_same_v<S, Jet>)
      return jets(p);
    else
      return values(p);
  }
  double component(int axis, const Point& p) const { return values(p).at(static_cast<std::size_t>(axis)); }

  /// Jacobian d X^i / d x^j, exact for order >= 1, otherwise by finite differences.
  Mat<double> jacobian(const Point& p, const FdConfig& fd = {}) const {
    Mat<double> m{};
    const int n = dim();
    if (order() > 0) {
      const auto j = jets(p);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) m[i][k] = j[i].g[k];
      return m;
    }
    for (int k = 0; k < n; ++k) {
      const auto col = detail::fd_partial([this](const Point& q) { return values(q); }, chart(), p, k, fd);
      for (int i = 0; i < n; ++i) m[i][k] = col[i];
    }
    return m;
  }

 private:
  struct Impl {
    Chart chart;
    int order;
    ValueFn values;
    JetFn jets;
  };
  const Impl& impl() const {
    if (!impl_) throw ConfigError("use of an empty vector field");
    return *impl_;
  }
  std::shared_ptr<const Impl> impl_;
};

enum class Signature { riemannian, lorentzian };

class MetricField {
 public:
  using ValueFn = std::function<Mat<double>(const Point&)>;
  using JetFn = std::function<Mat<Jet>(const Point&)>;

  MetricField() = default;
  MetricField(Chart chart, Signature sig, ValueFn values, JetFn jets, std::string name = "metric")
      : impl_(std::make_shared<Impl>(Impl{std::move(chart), sig, std::move(values), std::move(jets), std::move(name)})) {
    if (sig == Signature::lorentzian && impl_->chart.dim() != 4)
      throw ConfigError("Lorentzian metric needs a 4-dimensional chart");
    if (sig == Signature::riemannian && impl_->chart.dim() != 3)
      throw ConfigError("Riemannian metric needs a 3-dimensional chart");
  }

  template <class G>
  static MetricField analytic(Chart chart, Signature sig, G g, std::string name = "metric") {
    return MetricField(
        std::move(chart), sig, [g](const Point& p) { return g(0.0, p); },
        [g](const Point& p) { return g(Jet{}, p); }, std::move(name));
  }

  /// Identity metric on a 3D chart.
  static MetricField euclidean(Chart chart) {
    return analytic(
        std::move(chart), Signature::riemannian,
        [](auto s, const Point&) {
          using S = decltype(s);
          Mat<S> m;
          for (auto& row : m) row.fill(S(0.0));
          for (int i = 0; i < 3; ++i) m[i][i] = S(1.0);
          return m;
        },
        "euclidean");
  }
  /// diag(1, r^2, 1) in (r, phi, x3).
  static MetricField solid_torus(Chart chart) {
    return analytic(
        std::move(chart), Signature::riemannian,
        [](auto s, const Point& p) {
          using S = decltype(s);
          Mat<S> m;
          for (auto& row : m) row.fill(S(0.0));
          const S r = coord<S>(p, 0);
          m[0][0] = S(1.0);
          m[1][1] = r * r;
          m[2][2] = S(1.0);
          return m;
        },
        "solid_torus");
  }
  /// -dx0 (x) dx0 + g3 on spacetime(g3.chart()).
  static MetricField lorentzian(const MetricField& g3) {
    if (g3.signature() != Signature::riemannian) throw ConfigError("lorentzian() needs a Riemannian spatial metric");
    auto block = [g3](auto s, const Point& p) {
      using S = decltype(s);
      const Mat<S> m3 = g3.template eval<S>(spatial_point(p));
      Mat<S> m;
      for (auto& row : m) row.fill(S(0.0));
      m[0][0] = S(-1.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i + 1][j + 1] = remap_slots(m3[i][j], detail::kLiftSlots);
      return m;
    };
    return MetricField(
        Chart::spacetime(g3.chart()), Signature::lorentzian, [block](const Point& p) { return block(0.0, p); },
        [block](const Point& p) { return block(Jet{}, p); }, "lorentzian(" + g3.name() + ")");
  }

  const Chart& chart() const { return impl().chart; }
  int dim() const { return impl().chart.dim(); }
  Signature signature() const { return impl().sig; }
  const std::string& name() const { return impl().name; }

  Mat<double> values(const Point& p) const {
    impl().chart.require_contains(p);
    return impl().values(p);
  }
  Mat<Jet> jets(const Point& p) const {
    impl().chart.require_contains(p);
    return impl().jets(p);
  }
  template <class S>
  Mat<S> eval(const Point& p) const {
    if constexpr (std::is_same_v<S, Jet>)
      return jets(p);
    else
      return values(p);
  }
  Mat<double> matrix_at(const Point& p) const { return values(p); }

  /// Checks symmetry and the signature: Cholesky on the Riemannian block, and for
  /// Lorentzian metrics the block structure diag(-1, g3) with g3 independent of x0.
  void validate_at(const Point& p) const {
    const Mat<double> m = values(p);
    const int n = dim();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::fabs(m[i][j] - m[j][i]) > 1e-12 * (1.0 + std::fabs(m[i][j])))
          throw SingularMetric("metric matrix is not symmetric at " + Chart::format(p, n));
    int off = 0;
    if (signature() == Signature::lorentzian) {
      if (m[0][0] != -1.0) throw SingularMetric("Lorentzian metric must have g_00 = -1");
      for (int i = 1; i < n; ++i)
        if (m[0][i] != 0.0) throw SingularMetric("Lorentzian metric must not mix x0 with space");
      const auto j = jets(p);
      for (int a = 1; a < n; ++a)
        for (int b = 1; b < n; ++b)
          if (j[a][b].g[0] != 0.0) throw SingularMetric("spatial metric depends on x0");
      off = 1;
    }
    // Cholesky of the positive block.
    std::array<std::array<double, kMaxDim>, kMaxDim> l{};
    for (int i = off; i < n; ++i) {
      for (int j = off; j <= i; ++j) {
        double s = m[i][j];
        for (int k = off; k < j; ++k) s -= l[i][k] * l[j][k];
        if (i == j) {
          if (!(s > 0.0)) throw SingularMetric("metric is not positive definite at " + Chart::format(p, n));
          l[i][i] = std::sqrt(s);
        } else {
          l[i][j] = s / l[j][j];
        }
      }
    }
  }

 private:
  struct Impl {
    Chart chart;
    Signature sig;
    ValueFn values;
    JetFn jets;
    std::string name;
  };
  const Impl& impl() const {
    if (!impl_) throw ConfigError("use of an empty metric");
    return *impl_;
  }
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Construction helpers for derived fields.

namespace detail {

template <class G>
DifferentialForm derived_form(const Chart& chart, int degree, int order, G g) {
  return DifferentialForm::analytic(chart, degree, std::move(g), order);
}

template <class G>
VectorField derived_field(const Chart& chart, int order, G g) {
  return VectorField::analytic(chart, std::move(g), order);
}

inline int min_order(int a, int b) { return a < b ? a : b; }

/// Metric evaluated for a spacetime point when the metric lives on the spatial chart.
template <class S>
Mat<S> spatial_metric_at(const MetricField& g3, const Point& p4) {
  Mat<S> m = g3.template eval<S>(spatial_point(p4));
  if constexpr (std::is_same_v<S, Jet>)
    for (auto& row : m)
      for (auto& x : row) x = remap_slots(x, kLiftSlots);
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear structure.

inline DifferentialForm add(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "add");
  if (a.degree() != b.degree()) throw DegreeError("add: degree mismatch");
  return detail::derived_form(a.chart(), a.degree(), detail::min_order(a.order(), b.order()),
                              [a, b](auto s, const Point& p) {
                                using S = decltype(s);
                                auto x = a.template eval<S>(p);
                                const auto y = b.template eval<S>(p);
                                for (int i = 0; i < kMasks; ++i) x[i] += y[i];
                                return x;
                              });
}

inline DifferentialForm scale(double c, const DifferentialForm& a) {
  return detail::derived_form(a.chart(), a.degree(), a.order(), [a, c](auto s, const Point& p) {
    using S = decltype(s);
    auto x = a.template eval<S>(p);
    for (auto& v : x) v *= c;
    return x;
  });
}

inline DifferentialForm sub(const DifferentialForm& a, const DifferentialForm& b) { return add(a, scale(-1.0, b)); }

/// f * a for a 0-form f.
inline DifferentialForm multiply(const DifferentialForm& f, const DifferentialForm& a) {
  require_same_chart(f.chart(), a.chart(), "multiply");
  if (f.degree() != 0) throw DegreeError("multiply: first factor must be a 0-form");
  return detail::derived_form(a.chart(), a.degree(), detail::min_order(f.order(), a.order()),
                              [f, a](auto s, const Point& p) {
                                using S = decltype(s);
                                const S k = f.template eval<S>(p)[0];
                                auto x = a.template eval<S>(p);
                                for (auto& v : x) v *= k;
                                return x;
                              });
}

/// The same form with its jet data dropped, so every derivative is taken by finite differences.
inline DifferentialForm numeric_only(const DifferentialForm& a) {
  return DifferentialForm::numeric(a.chart(), a.degree(), [a](const Point& p) { return a.values(p); });
}
inline VectorField numeric_only(const VectorField& x) {
  return VectorField::numeric(x.chart(), [x](const Point& p) { return x.values(p); });
}

// ---------------------------------------------------------------------------
// Exterior algebra.

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  const int n = a.dim();
  const int da = a.degree(), db = b.degree();
  if (da + db > n) throw DegreeError("wedge: degree " + std::to_string(da + db) + " exceeds chart dimension");
  return detail::derived_form(a.chart(), da + db, detail::min_order(a.order(), b.order()),
                              [a, b, da, db, n](auto s, const Point& p) {
                                using S = decltype(s);
                                return wedge_values(a.template eval<S>(p), da, b.template eval<S>(p), db, n);
                              });
}

inline DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(x.chart(), a.chart(), "interior_product");
  if (a.degree() == 0) throw DegreeError("interior_product: degree-0 input");
  const int n = a.dim(), k = a.degree();
  return detail::derived_form(a.chart(), k - 1, detail::min_order(x.order(), a.order()),
                              [x, a, n, k](auto s, const Point& p) {
                                using S = decltype(s);
                                return interior_values(x.template eval<S>(p), a.template eval<S>(p), k, n);
                              });
}

namespace detail {

/// d restricted to the axes in `axes` (a mask), so the full d uses all axes and the
/// spatial d of a spacetime form skips axis 0.
inline DifferentialForm partial_exterior_derivative(const DifferentialForm& a, Mask axes, const FdConfig& fd) {
  const int n = a.dim(), k = a.degree();
  if (k >= n) throw DegreeError("exterior_derivative: degree must be below chart dimension");
  const Chart chart = a.chart();
  auto assemble = [n, k, axes](const auto& grad_of_mask) {
    using S = std::decay_t<decltype(grad_of_mask(0u, 0))>;
    Coeffs<S> r = zero_coeffs<S>();
    for (Mask m = 0; m < (Mask{1} << n); ++m) {
      if (mask_degree(m) != k) continue;
      for (int i = 0; i < n; ++i) {
        const Mask bit = Mask{1} << i;
        if ((m & bit) || !(axes & bit)) continue;
        r[m | bit] += front_sign(i, m) * grad_of_mask(m, i);
      }
    }
    return r;
  };
  if (a.order() == 0) {
    return DifferentialForm::numeric(chart, k + 1, [a, chart, n, axes, fd, assemble](const Point& p) {
      std::array<Coeffs<double>, kMaxDim> grads{};
      for (int i = 0; i < n; ++i)
        if (axes & (Mask{1} << i))
          grads[i] = fd_partial([&a](const Point& q) { return a.values(q); }, chart, p, i, fd);
      return assemble([&grads](Mask m, int i) { return grads[i][m]; });
    });
  }
  const int order = a.order() - 1;
  DifferentialForm::ValueFn vf = [a, assemble](const Point& p) {
    const auto j = a.jets(p);
    return assemble([&j](Mask m, int i) { return j[m].g[i]; });
  };
  DifferentialForm::JetFn jf;
  if (order > 0)
    jf = [a, assemble](const Point& p) {
      const auto j = a.jets(p);
      return assemble([&j](Mask m, int i) { return bmk::partial(j[m], i); });
    };
  return DifferentialForm(chart, k + 1, order, std::move(vf), std::move(jf));
}

}  // namespace detail

inline DifferentialForm exterior_derivative(const DifferentialForm& a, const FdConfig& fd = {}) {
  return detail::partial_exterior_derivative(a, full_mask(a.dim()), fd);
}

/// Spatial exterior derivative of a spacetime form (x0 held fixed).
inline DifferentialForm spatial_derivative(const DifferentialForm& a, const FdConfig& fd = {}) {
  if (a.dim() != 4) throw ChartMismatch("spatial_derivative needs a spacetime chart");
  return detail::partial_exterior_derivative(a, full_mask(4) & ~Mask{1}, fd);
}

/// Componentwise partial derivative along one axis; on spacetime charts axis 0 gives
/// the Lie derivative along d/dx0.
inline DifferentialForm axis_derivative(const DifferentialForm& a, int axis, const FdConfig& fd = {}) {
  const Chart chart = a.chart();
  if (a.order() == 0)
    return DifferentialForm::numeric(chart, a.degree(), [a, chart, axis, fd](const Point& p) {
      return detail::fd_partial([&a](const Point& q) { return a.values(q); }, chart, p, axis, fd);
    });
  const int order = a.order() - 1;
  DifferentialForm::ValueFn vf = [a, axis](const Point& p) {
    const auto j = a.jets(p);
    Coeffs<double> r{};
    for (int m = 0; m < kMasks; ++m) r[m] = j[m].g[axis];
    return r;
  };
  DifferentialForm::JetFn jf;
  if (order > 0)
    jf = [a, axis](const Point& p) {
      const auto j = a.jets(p);
      Coeffs<Jet> r;
      for (int m = 0; m < kMasks; ++m) r[m] = bmk::partial(j[m], axis);
      return r;
    };
  return DifferentialForm(chart, a.degree(), order, std::move(vf), std::move(jf));
}

inline DifferentialForm time_derivative(const DifferentialForm& a, const FdConfig& fd = {}) {
  if (a.dim() != 4) throw ChartMismatch("time_derivative needs a spacetime chart");
  return axis_derivative(a, 0, fd);
}

/// Cartan formula d(iota_X a) + iota_X(da).
inline DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a, const FdConfig& fd = {}) {
  require_same_chart(x.chart(), a.chart(), "lie_derivative");
  if (a.degree() == a.dim()) return exterior_derivative(interior_product(x, a), fd);
  const DifferentialForm second = interior_product(x, exterior_derivative(a, fd));
  if (a.degree() == 0) return second;
  return add(exterior_derivative(interior_product(x, a), fd), second);
}

// ---------------------------------------------------------------------------
// Metric operations.

/// Hodge dual: 3D Riemannian or 4D Lorentzian, volume sqrt|det g| dx^0^...^dx^{n-1}.
inline DifferentialForm hodge_star(const MetricField& g, const DifferentialForm& a) {
  require_same_chart(g.chart(), a.chart(), "hodge_star");
  const int n = a.dim(), k = a.degree();
  return detail::derived_form(a.chart(), n - k, a.order(), [g, a, n, k](auto s, const Point& p) {
    using S = decltype(s);
    return hodge_values(a.template eval<S>(p), k, g.template eval<S>(p), n);
  });
}

/// Spatial Hodge dual of a spacetime form with no dx0 components, using the spatial metric g3.
inline DifferentialForm spatial_hodge(const MetricField& g3, const DifferentialForm& a) {
  if (a.dim() != 4) throw ChartMismatch("spatial_hodge needs a spacetime form");
  require_same_chart(g3.chart(), a.chart().spatial(), "spatial_hodge");
  const int k = a.degree();
  if (k > 3) throw DegreeError("spatial_hodge: degree exceeds spatial dimension");
  return detail::derived_form(a.chart(), 3 - k, a.order(), [g3, a, k](auto s, const Point& p) {
    using S = decltype(s);
    const Mat<S> m3 = detail::spatial_metric_at<S>(g3, p);
    return hodge_values(a.template eval<S>(p), k, m3, 3, 1);
  });
}

inline VectorField metric_sharp(const MetricField& g, const DifferentialForm& a) {
  require_same_chart(g.chart(), a.chart(), "metric_sharp");
  if (a.degree() != 1) throw DegreeError("metric_sharp needs a 1-form");
  const int n = a.dim();
  return detail::derived_field(a.chart(), a.order(), [g, a, n](auto s, const Point& p) {
    using S = decltype(s);
    return sharp_values(a.template eval<S>(p), g.template eval<S>(p), n);
  });
}

/// Spatial metric dual of a spatial 1-form on a spacetime chart; the x0 component is zero.
inline VectorField spatial_sharp(const MetricField& g3, const DifferentialForm& a) {
  if (a.dim() != 4 || a.degree() != 1) throw DegreeError("spatial_sharp needs a spacetime 1-form");
  return detail::derived_field(a.chart(), a.order(), [g3, a](auto s, const Point& p) {
    using S = decltype(s);
    const Mat<S> m3 = detail::spatial_metric_at<S>(g3, p);
    const auto c = a.template eval<S>(p);
    Coeffs<S> c3 = zero_coeffs<S>();
    for (int i = 0; i < 3; ++i) c3[Mask{1} << i] = c[Mask{1} << (i + 1)];
    const Vec<S> x3 = sharp_values(c3, m3, 3);
    Vec<S> x;
    x.fill(S(0.0));
    for (int i = 0; i < 3; ++i) x[i + 1] = x3[i];
    return x;
  });
}

inline double one_form_norm_sq(const MetricField& g, const DifferentialForm& a, const Point& p) {
  require_same_chart(g.chart(), a.chart(), "one_form_norm_sq");
  if (a.degree() != 1) throw DegreeError("one_form_norm_sq needs a 1-form");
  return norm_sq_values(a.values(p), g.values(p), a.dim());
}

/// g^{-1}(a, a) as a 0-form.
inline DifferentialForm norm_sq_form(const MetricField& g, const DifferentialForm& a) {
  require_same_chart(g.chart(), a.chart(), "norm_sq_form");
  if (a.degree() != 1) throw DegreeError("norm_sq_form needs a 1-form");
  const int n = a.dim();
  return detail::derived_form(a.chart(), 0, a.order(), [g, a, n](auto s, const Point& p) {
    using S = decltype(s);
    Coeffs<S> r = zero_coeffs<S>();
    r[0] = norm_sq_values(a.template eval<S>(p), g.template eval<S>(p), n);
    return r;
  });
}

/// Volume form sqrt|det g| dx^0^...^dx^{n-1}.
inline DifferentialForm volume_form(const MetricField& g) {
  const int n = g.dim();
  return detail::derived_form(g.chart(), n, 2, [g, n](auto s, const Point& p) {
    using S = decltype(s);
    const S det = determinant(g.template eval<S>(p), n);
    Coeffs<S> r = zero_coeffs<S>();
    r[full_mask(n)] = sqrt(value_of(det) < 0.0 ? -det : det);
    return r;
  });
}

// ---------------------------------------------------------------------------
// Vector-field algebra.

inline VectorField scale(double c, const VectorField& x) {
  return detail::derived_field(x.chart(), x.order(), [x, c](auto s, const Point& p) {
    using S = decltype(s);
    auto v = x.template eval<S>(p);
    for (auto& e : v) e *= c;
    return v;
  });
}

/// X / f for a 0-form f.
inline VectorField divide(const VectorField& x, const DifferentialForm& f) {
  require_same_chart(x.chart(), f.chart(), "divide");
  if (f.degree() != 0) throw DegreeError("divide needs a 0-form denominator");
  return detail::derived_field(x.chart(), detail::min_order(x.order(), f.order()), [x, f](auto s, const Point& p) {
    using S = decltype(s);
    auto v = x.template eval<S>(p);
    const S d = f.template eval<S>(p)[0];
    for (auto& e : v) e = e / d;
    return v;
  });
}

// ---------------------------------------------------------------------------
// Moving between a spatial chart and its spacetime product.

/// x0-independent spacetime form with the same spatial components.
inline DifferentialForm lift(const DifferentialForm& a3) {
  if (a3.dim() != 3) throw ChartMismatch("lift needs a 3D form");
  return detail::derived_form(Chart::spacetime(a3.chart()), a3.degree(), a3.order(), [a3](auto s, const Point& p) {
    using S = decltype(s);
    const auto c = a3.template eval<S>(spatial_point(p));
    Coeffs<S> r = zero_coeffs<S>();
    for (Mask m = 0; m < 8; ++m) r[m << 1] = remap_slots(c[m], detail::kLiftSlots);
    return r;
  });
}

/// Restriction of a spacetime form to the slice x0 = const; dx0 components are dropped.
inline DifferentialForm slice(const DifferentialForm& a4, double x0) {
  if (a4.dim() != 4) throw ChartMismatch("slice needs a spacetime form");
  const int k = a4.degree();
  if (k > 3) throw DegreeError("slice of a 4-form is zero on a 3D chart");
  return detail::derived_form(a4.chart().spatial(), k, a4.order(), [a4, x0](auto s, const Point& p) {
    using S = decltype(s);
    const auto c = a4.template eval<S>(spacetime_point(x0, p));
    Coeffs<S> r = zero_coeffs<S>();
    for (Mask m = 0; m < 8; ++m) r[m] = remap_slots(c[m << 1], detail::kSliceSlots);
    return r;
  });
}

inline VectorField slice(const VectorField& x4, double x0) {
  if (x4.dim() != 4) throw ChartMismatch("slice needs a spacetime vector field");
  return detail::derived_field(x4.chart().spatial(), x4.order(), [x4, x0](auto s, const Point& p) {
    using S = decltype(s);
    const auto c = x4.template eval<S>(spacetime_point(x0, p));
    Vec<S> r;
    for (int i = 0; i < 3; ++i) r[i] = remap_slots(c[i + 1], detail::kSliceSlots);
    r[3] = S(0.0);
    return r;
  });
}

// ---------------------------------------------------------------------------
// Flow-pullback Lie derivative, used to cross-check the Cartan formula.

namespace detail {

/// One RK4 step of x' = X(x), M' = DX(x) M.
inline void variational_step(const VectorField& x, Point& p, Mat<double>& m, double h, int n) {
  auto rhs = [&](const Point& q, const Mat<double>& mq, Point& dq, Mat<double>& dm) {
    const auto v = x.values(q);
    const auto jac = x.jacobian(q);
    dq = {};
    dm = {};
    for (int i = 0; i < n; ++i) {
      dq[i] = v[i];
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) dm[i][j] += jac[i][l] * mq[l][j];
    }
  };
  auto axpy = [n](const Point& q, const Point& d, double s) {
    Point r = q;
    for (int i = 0; i < n; ++i) r[i] += s * d[i];
    return r;
  };
  auto maxpy = [n](const Mat<double>& q, const Mat<double>& d, double s) {
    Mat<double> r = q;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i][j] += s * d[i][j];
    return r;
  };
  Point k1, k2, k3, k4;
  Mat<double> m1, m2, m3, m4;
  rhs(p, m, k1, m1);
  rhs(axpy(p, k1, h / 2), maxpy(m, m1, h / 2), k2, m2);
  rhs(axpy(p, k2, h / 2), maxpy(m, m2, h / 2), k3, m3);
  rhs(axpy(p, k3, h), maxpy(m, m3, h), k4, m4);
  for (int i = 0; i < n; ++i) {
    p[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    for (int j = 0; j < n; ++j) m[i][j] += h / 6 * (m1[i][j] + 2 * m2[i][j] + 2 * m3[i][j] + m4[i][j]);
  }
}

}  // namespace detail

/// (Phi_tau^* a - Phi_{-tau}^* a) / (2 tau) at p, with Phi the flow of X and its
/// Jacobian from the variational equation.
inline Coeffs<double> lie_derivative_by_flow(const VectorField& x, const DifferentialForm& a, const Point& p,
                                             double tau = 1e-4, int substeps = 4) {
  require_same_chart(x.chart(), a.chart(), "lie_derivative_by_flow");
  const int n = a.dim();
  auto pulled = [&](double t) {
    Point q = p;
    Mat<double> m{};
    for (int i = 0; i < n; ++i) m[i][i] = 1.0;
    for (int s = 0; s < substeps; ++s) detail::variational_step(x, q, m, t / substeps, n);
    return pullback_values(a.values(q), a.degree(), m, n);
  };
  const auto fwd = pulled(tau), bwd = pulled(-tau);
  Coeffs<double> r{};
  for (int i = 0; i < kMasks; ++i) r[i] = (fwd[i] - bwd[i]) / (2.0 * tau);
  return r;
}

}  // namespace bmk
