#pragma once

// Reeb and Reeb-like vector fields of contact forms and stable Hamiltonian structures.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "bmk/catalog.hpp"
#include "bmk/forms.hpp"
#include "bmk/grid.hpp"
#include "bmk/verify.hpp"

namespace bmk {

/// Closed 2-form Omega and 1-form lambda on a 3D chart.
struct SHSPair {
  DifferentialForm omega;
  DifferentialForm lambda;
  const Chart& chart() const { return lambda.chart(); }
};

/// Components (Omega_1, Omega_2, Omega_3) on dx2^dx3, dx3^dx1, dx1^dx2.
template <class S>
Vec<S> omega_vector(const Coeffs<S>& om) {
  Vec<S> v;
  v[0] = om[0b110];
  v[1] = -om[0b101];
  v[2] = om[0b011];
  v[3] = S(0.0);
  return v;
}

inline constexpr double kReebDegenerate = 1e-10;
inline constexpr double kReebVanishing = 1e-12;

/// Y = Omega_vec / (lambda . Omega_vec). Throws DegeneratePoint when the normalized
/// denominator is below 1e-10 or either form vanishes at the point.
template <class S>
Vec<S> reeb_values(const Coeffs<S>& om, const Coeffs<S>& la, const Point& x) {
  const Vec<S> w = omega_vector(om);
  S dot(0.0);
  for (int i = 0; i < 3; ++i) dot += la[Mask{1} << i] * w[i];
  double so = 0.0, sl = 0.0;
  for (int i = 0; i < 3; ++i) {
    so = std::max(so, std::fabs(value_of(w[i])));
    sl = std::max(sl, std::fabs(value_of(la[Mask{1} << i])));
  }
  if (so < kReebVanishing || sl < kReebVanishing || std::fabs(value_of(dot)) < kReebDegenerate * so * sl)
    throw DegeneratePoint("lambda . Omega vanishes at " + Chart::format(x, 3));
  Vec<S> y;
  for (int i = 0; i < 3; ++i) y[i] = w[i] / dot;
  y[3] = S(0.0);
  return y;
}

inline Vec<double> reeb_from_shs(const SHSPair& p, const Point& x) {
  return reeb_values(p.omega.values(x), p.lambda.values(x), x);
}

/// Reeb field of the pair as a vector field (jets propagate through the formula).
inline VectorField reeb_field(const SHSPair& p) {
  require_same_chart(p.omega.chart(), p.lambda.chart(), "reeb_field");
  if (p.lambda.dim() != 3 || p.omega.degree() != 2 || p.lambda.degree() != 1)
    throw DegreeError("reeb_field needs a 3D 2-form and 1-form");
  const auto om = p.omega, la = p.lambda;
  return detail::derived_field(la.chart(), std::min(om.order(), la.order()), [om, la](auto s, const Point& x) {
    using S = decltype(s);
    return reeb_values(om.template eval<S>(x), la.template eval<S>(x), x);
  });
}

enum class ReebSource { contact, shs };

struct ReebField {
  VectorField Y;
  ReebSource source = ReebSource::shs;
  SHSPair pair;
  double max_iota_omega = 0.0;
  double max_iota_lambda_minus_1 = 0.0;
  std::string name;
};

/// max |iota_Y Omega| and max |iota_Y lambda - 1| over a grid.
inline CheckReport reeb_contracts(const VectorField& y, const SHSPair& p, const SampleGrid& grid,
                                  double tol = 1e-8) {
  const auto io = interior_product(y, p.omega);
  const auto il = interior_product(y, p.lambda);
  const auto a = detail::map_grid<double>(grid, [&](const Point& x) { return max_abs(io.values(x)); });
  const auto b = detail::map_grid<double>(grid, [&](const Point& x) { return std::fabs(il.values(x)[0] - 1.0); });
  auto r = detail::new_report("reeb_contracts", "", grid);
  r.tol_residual = tol;
  const auto ea = detail::arg_max(a), eb = detail::arg_max(b);
  r.values["max_iota_omega"] = ea.value;
  r.values["max_iota_lambda_minus_1"] = eb.value;
  r.max_residual = std::max(ea.value, eb.value);
  r.witnesses.push_back(detail::witness(grid, ea.value >= eb.value ? ea : eb, "worst Reeb contract"));
  r.decide();
  return r;
}

inline ReebField make_reeb(const SHSPair& p, const SampleGrid* grid, std::string name) {
  ReebField f;
  f.pair = p;
  f.Y = reeb_field(p);
  f.name = std::move(name);
  if (grid) {
    const auto r = reeb_contracts(f.Y, p, *grid);
    f.max_iota_omega = r.values.at("max_iota_omega");
    f.max_iota_lambda_minus_1 = r.values.at("max_iota_lambda_minus_1");
  }
  return f;
}

/// Reeb field of a contact form: the SHS pair (d lambda, lambda).
inline ReebField reeb_for_contact(const DifferentialForm& lambda, const SampleGrid* grid = nullptr) {
  auto f = make_reeb({exterior_derivative(lambda), lambda}, grid, "contact");
  f.source = ReebSource::contact;
  return f;
}

enum class ReebVariant { normalized, unnormalized };

/// Closed forms for a Beltrami form v: normalized Y = v#/g(v,v) for (*3 v, v), unnormalized
/// Z = v# for (*3 v, v/g(v,v)).
inline ReebField reeb_closed_form_beltrami(const BeltramiForm& v, ReebVariant variant) {
  if (v.singular) throw DegeneratePoint("reeb_closed_form_beltrami: the form vanishes on its sample grid");
  const auto sharp = metric_sharp(v.metric, v.form);
  const auto n2 = norm_sq_form(v.metric, v.form);
  ReebField f;
  f.source = ReebSource::shs;
  if (variant == ReebVariant::normalized) {
    f.Y = divide(sharp, n2);
    f.pair = {hodge_star(v.metric, v.form), v.form};
    f.name = "Y";
  } else {
    f.Y = sharp;
    const auto inv = detail::derived_form(v.chart, 0, n2.order(), [n2](auto s, const Point& p) {
      using S = decltype(s);
      Coeffs<S> c = zero_coeffs<S>();
      c[0] = S(1.0) / n2.template eval<S>(p)[0];
      return c;
    });
    f.pair = {hodge_star(v.metric, v.form), multiply(inv, v.form)};
    f.name = "Z";
  }
  return f;
}

enum class WhichReeb { Y0, Y1 };

/// Reeb fields of (B, e) and (D, h) at an instant: Y0 = e#/g(e,e), Y1 = h#/g(h,h).
struct MaxwellReeb {
  ReebField field;
  double x0 = 0.0;
  /// f^e/f^h at x0 when the field set has a shared Beltrami form (Y1 = ratio * Y0).
  std::optional<double> fe_over_fh;
};

inline void require_nondegenerate_instant(const MaxwellFieldSet& m, WhichReeb which, double x0) {
  if (m.f_e && m.f_h) {
    const double f = which == WhichReeb::Y0 ? m.f_e(x0) : m.f_h(x0);
    const double ref = which == WhichReeb::Y0 ? m.e0 : m.e0 / (m.c0() * m.constants.mu0);
    if (std::fabs(f) < kReebVanishing * std::max(1.0, ref))
      throw DegeneratePoint(std::string("degenerate instant for ") + (which == WhichReeb::Y0 ? "Y0" : "Y1") +
                            ": the amplitude vanishes at x0 = " + std::to_string(x0));
  }
}

inline MaxwellReeb reeb_for_maxwell(const MaxwellFieldSet& m, WhichReeb which, double x0) {
  require_nondegenerate_instant(m, which, x0);
  const auto lam = slice(which == WhichReeb::Y0 ? m.e : m.h, x0);
  const auto om = slice(which == WhichReeb::Y0 ? m.B : m.D, x0);
  const auto g3 = m.g3;
  MaxwellReeb out;
  out.x0 = x0;
  out.field.pair = {om, lam};
  out.field.Y = divide(metric_sharp(g3, lam), norm_sq_form(g3, lam));
  out.field.source = ReebSource::shs;
  out.field.name = which == WhichReeb::Y0 ? "Y0" : "Y1";
  if (m.f_e && m.f_h && m.f_h(x0) != 0.0) out.fe_over_fh = m.f_e(x0) / m.f_h(x0);
  return out;
}

/// max |iota_Z d lambda| and min iota_Z lambda; Reeb-like when the first vanishes and the second is positive.
inline CheckReport verify_reeb_like(const VectorField& z, const DifferentialForm& lambda, const SampleGrid& grid,
                                    const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid, lambda.chart(), "verify_reeb_like");
  const auto a = interior_product(z, exterior_derivative(lambda));
  const auto b = interior_product(z, lambda);
  const auto va = detail::map_grid<double>(grid, [&](const Point& p) { return max_abs(a.values(p)); });
  const auto vb = detail::map_grid<double>(grid, [&](const Point& p) { return b.values(p)[0]; });
  auto r = detail::new_report("reeb_like", "", grid);
  const bool analytic = std::min(z.order(), lambda.order()) > 0;
  r.mode = analytic ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(analytic);
  r.tol_margin = tol.margin;
  const auto ea = detail::arg_max(va), eb = detail::arg_min(vb);
  r.max_residual = ea.value;
  r.min_margin = eb.value;
  const double s = detail::grid_scale(lambda, grid);
  r.normalized_margin = s > 0.0 ? eb.value / s : eb.value;
  r.values["max_iota_z_dlambda"] = ea.value;
  r.values["min_iota_z_lambda"] = eb.value;
  r.witnesses.push_back(detail::witness(grid, ea, "max |iota_Z d lambda|"));
  r.witnesses.push_back(detail::witness(grid, eb, "min iota_Z lambda"));
  r.decide();
  return r;
}

/// Sampled component table: coordinates then components, one row per grid point.
inline void write_vector_csv(std::ostream& os, const VectorField& y, const SampleGrid& grid) {
  const int n = y.dim();
  const auto& ch = y.chart();
  for (int i = 0; i < n; ++i) os << ch.axis(i).label << ',';
  for (int i = 0; i < n; ++i) os << 'Y' << ch.axis(i).label << (i + 1 < n ? "," : "\n");
  const auto rows = detail::map_grid<Vec<double>>(grid, [&](const Point& p) { return y.values(p); });
  os.precision(17);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int i = 0; i < n; ++i) os << grid.points[k][static_cast<std::size_t>(i)] << ',';
    for (int i = 0; i < n; ++i) os << rows[k][static_cast<std::size_t>(i)] << (i + 1 < n ? "," : "\n");
  }
}

}  // namespace bmk
