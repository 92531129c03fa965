#pragma once

// Grid-sampled verifiers for Beltrami, Maxwell, constitutive, contact, stable
// Hamiltonian, symplectic, parallel and conservation conditions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bmk/catalog.hpp"
#include "bmk/forms.hpp"
#include "bmk/grid.hpp"
#include "bmk/parallel.hpp"

namespace bmk {

struct Tolerances {
  double analytic = 1e-10;         // residuals with exact jets
  double finite_difference = 1e-6; // residuals with finite-difference derivatives
  double margin = 1e-9;            // margins after normalizing forms to unit max coefficient
  double vanishing = 1e-12;        // a form whose max coefficient is below this counts as zero
  double ill_conditioned = 1e-8;   // relative |Omega| below which f^Omega is not estimated
  double agreement = 1e-8;         // decomposed vs 4D Maxwell residuals

  double residual(bool analytic_mode) const { return analytic_mode ? analytic : finite_difference; }
};

struct Witness {
  std::string what;
  Point point{};
  int dim = 3;
  double value = 0.0;
};

struct CheckReport {
  std::string check;
  std::string subject;
  bool pass = false;
  double max_residual = 0.0;
  std::optional<double> min_margin;         // raw margin
  std::optional<double> normalized_margin;  // margin of the unit-normalized forms
  double tol_residual = 0.0;
  std::optional<double> tol_margin;
  std::string mode = "analytic";
  std::vector<Witness> witnesses;
  std::map<std::string, double> values;
  std::vector<std::string> notes;
  bool forced_fail = false;  // vanishing inputs, ill-posed estimates
  std::string grid_chart;
  std::string grid_kind;
  std::vector<int> grid_counts;
  std::size_t grid_size = 0;
  std::uint64_t grid_seed = 0;

  void set_grid(const SampleGrid& g) {
    grid_chart = g.chart.name();
    grid_kind = g.kind;
    grid_counts = g.counts;
    grid_size = g.size();
    grid_seed = g.seed;
  }

  /// pass <=> residual within tolerance and (when applicable) margin above threshold.
  void decide() {
    pass = !forced_fail && max_residual <= tol_residual;
    if (tol_margin) pass = pass && normalized_margin && *normalized_margin >= *tol_margin;
  }

  nlohmann::json to_json() const {
    auto num = [](std::optional<double> x) -> nlohmann::json {
      if (!x || !std::isfinite(*x)) return nullptr;
      return *x;
    };
    nlohmann::json j;
    j["check"] = check;
    if (!subject.empty()) j["subject"] = subject;
    j["pass"] = pass;
    j["max_residual"] = num(max_residual);
    j["min_margin"] = num(min_margin);
    j["normalized_margin"] = num(normalized_margin);
    j["tolerance"] = {{"residual", tol_residual}, {"margin", num(tol_margin)}};
    j["mode"] = mode;
    nlohmann::json w = nlohmann::json::array();
    nlohmann::json wd = nlohmann::json::array();
    for (const auto& x : witnesses) {
      nlohmann::json c = nlohmann::json::array();
      for (int i = 0; i < x.dim; ++i) c.push_back(x.point[static_cast<std::size_t>(i)]);
      w.push_back(c);
      wd.push_back({{"what", x.what}, {"value", num(x.value)}});
    }
    j["witness"] = w;
    j["witness_info"] = wd;
    nlohmann::json vals = nlohmann::json::object();
    for (const auto& [k, v] : values) vals[k] = num(v);
    j["values"] = vals;
    j["notes"] = notes;
    j["grid"] = {{"chart", grid_chart}, {"kind", grid_kind}, {"counts", grid_counts}, {"points", grid_size}};
    if (grid_kind == "random") j["grid"]["seed"] = grid_seed;
    return j;
  }
};

namespace detail {

/// Per-point evaluation in parallel, results in grid order.
template <class R, class F>
std::vector<R> map_grid(const SampleGrid& g, F&& f) {
  std::vector<R> out(g.size());
  parallel_for(g.size(), [&](std::size_t i) { out[i] = f(g.points[i]); });
  return out;
}

struct Extremum {
  double value;
  std::size_t index = 0;
  bool set = false;
};

/// First maximum in grid order.
inline Extremum arg_max(const std::vector<double>& v) {
  Extremum e{-std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!e.set || v[i] > e.value) e = {v[i], i, true};
  if (!e.set) e.value = 0.0;
  return e;
}
inline Extremum arg_min(const std::vector<double>& v) {
  Extremum e{std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!e.set || v[i] < e.value) e = {v[i], i, true};
  if (!e.set) e.value = 0.0;
  return e;
}

inline Witness witness(const SampleGrid& g, const Extremum& e, std::string what) {
  Witness w;
  w.what = std::move(what);
  w.dim = g.chart.dim();
  if (e.set) w.point = g.points[e.index];
  w.value = e.value;
  return w;
}

inline double grid_scale(const DifferentialForm& a, const SampleGrid& g) {
  const auto v = map_grid<double>(g, [&](const Point& p) { return max_abs(a.values(p)); });
  return arg_max(v).value;
}

inline CheckReport new_report(std::string check, std::string subject, const SampleGrid& g) {
  CheckReport r;
  r.check = std::move(check);
  r.subject = std::move(subject);
  r.set_grid(g);
  return r;
}

inline void require_grid_chart(const SampleGrid& g, const Chart& c, const char* what) {
  require_same_chart(g.chart, c, what);
}

}  // namespace detail

inline const Tolerances& default_tolerances() {
  static const Tolerances t;
  return t;
}

// ---------------------------------------------------------------------------

/// max |*3 dv - k v| over the grid, plus the divergence residual |*3 d *3 v|.
inline CheckReport beltrami_residual(const DifferentialForm& v, double k, const MetricField& g, const SampleGrid& grid,
                                     const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid, v.chart(), "beltrami_residual");
  if (v.dim() != 3 || v.degree() != 1) throw DegreeError("beltrami_residual needs a 3D 1-form");
  const auto res = sub(hodge_star(g, exterior_derivative(v)), scale(k, v));
  const auto div = hodge_star(g, exterior_derivative(hodge_star(g, v)));
  auto r = detail::new_report("beltrami_residual", "", grid);
  r.mode = v.order() > 0 ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(v.order() > 0);
  const auto rv = detail::map_grid<double>(grid, [&](const Point& p) { return max_abs(res.values(p)); });
  const auto dv = detail::map_grid<double>(grid, [&](const Point& p) { return max_abs(div.values(p)); });
  const auto mr = detail::arg_max(rv), md = detail::arg_max(dv);
  r.max_residual = mr.value;
  r.values["k"] = k;
  r.values["divergence_residual"] = md.value;
  r.witnesses.push_back(detail::witness(grid, mr, "max |*3 dv - k v|"));
  r.decide();
  return r;
}

inline CheckReport beltrami_residual(const BeltramiForm& b, const SampleGrid& grid,
                                     const Tolerances& tol = default_tolerances()) {
  auto r = beltrami_residual(b.form, b.k_expected, b.metric, grid, tol);
  r.subject = b.name;
  return r;
}

/// Pointwise Maxwell residual forms.
struct MaxwellResidualForms {
  DifferentialForm faraday, gauss_b, gauss_d, ampere, dF0, dF1;
};

inline MaxwellResidualForms maxwell_residual_forms(const MaxwellFieldSet& m, const FdConfig& fd = {}) {
  const double c0 = m.c0();
  return {add(spatial_derivative(m.e, fd), scale(c0, time_derivative(m.B, fd))), spatial_derivative(m.B, fd),
          spatial_derivative(m.D, fd), sub(spatial_derivative(m.h, fd), scale(c0, time_derivative(m.D, fd))),
          exterior_derivative(m.F0(), fd), exterior_derivative(m.F1(), fd)};
}

/// Decomposed equations de + c0 dB/dx0 = 0, dB = 0, dD = 0, dh - c0 dD/dx0 = 0, and dF0 = dF1 = 0.
inline CheckReport maxwell_residuals(const MaxwellFieldSet& m, const SampleGrid& grid4,
                                     const Tolerances& tol = default_tolerances(), const FdConfig& fd = {}) {
  if (grid4.chart.dim() != 4) throw ChartMismatch("maxwell_residuals needs a spacetime grid with an x0 axis");
  detail::require_grid_chart(grid4, m.chart4, "maxwell_residuals");
  const auto f = maxwell_residual_forms(m, fd);
  const double c0 = m.c0();
  struct Row {
    double far, gb, gd, amp, f0, f1, agree0, agree1;
  };
  const auto rows = detail::map_grid<Row>(grid4, [&](const Point& p) {
    Row r{};
    r.far = max_abs(f.faraday.values(p));
    r.gb = max_abs(f.gauss_b.values(p));
    r.gd = max_abs(f.gauss_d.values(p));
    r.amp = max_abs(f.ampere.values(p));
    r.f0 = max_abs(f.dF0.values(p));
    r.f1 = max_abs(f.dF1.values(p));
    r.agree0 = std::fabs(r.f0 - std::max(c0 * r.gb, r.far));
    r.agree1 = std::fabs(r.f1 - std::max(r.gd, r.amp / c0));
    return r;
  });
  auto col = [&](double Row::*mem) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.*mem);
    return detail::arg_max(v);
  };
  auto r = detail::new_report("maxwell_residuals", m.name, grid4);
  const bool analytic = std::min({m.e.order(), m.h.order(), m.B.order(), m.D.order()}) > 0;
  r.mode = analytic ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(analytic);
  const std::pair<const char*, double Row::*> cols[] = {
      {"faraday", &Row::far}, {"gauss_magnetic", &Row::gb}, {"gauss_electric", &Row::gd}, {"ampere", &Row::amp},
      {"dF0", &Row::f0},      {"dF1", &Row::f1}};
  double worst = 0.0;
  for (const auto& [name, mem] : cols) {
    const auto e = col(mem);
    r.values[name] = e.value;
    if (e.value > worst || r.witnesses.empty()) {
      worst = std::max(worst, e.value);
      r.witnesses.clear();
      r.witnesses.push_back(detail::witness(grid4, e, std::string("max ") + name));
    }
  }
  const auto a0 = col(&Row::agree0), a1 = col(&Row::agree1);
  r.values["agreement_F0"] = a0.value;
  r.values["agreement_F1"] = a1.value;
  r.max_residual = worst;
  r.decide();
  if (std::max(a0.value, a1.value) > tol.agreement) {
    r.pass = false;
    r.notes.push_back("decomposed and 4D residuals disagree");
  }
  return r;
}

/// |D - eps0 *3 e|, |B - mu0 *3 h| and the 4D relation |F1 + eps0 * F0|.
inline CheckReport constitutive_residuals(const MaxwellFieldSet& m, const SampleGrid& grid4,
                                          const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid4, m.chart4, "constitutive_residuals");
  const auto& c = m.constants;
  const auto rd = sub(m.D, scale(c.eps0, spatial_hodge(m.g3, m.e)));
  const auto rb = sub(m.B, scale(c.mu0, spatial_hodge(m.g3, m.h)));
  const auto r4 = add(m.F1(), scale(c.eps0, hodge_star(m.g4, m.F0())));
  const auto vd = detail::map_grid<double>(grid4, [&](const Point& p) { return max_abs(rd.values(p)); });
  const auto vb = detail::map_grid<double>(grid4, [&](const Point& p) { return max_abs(rb.values(p)); });
  const auto v4 = detail::map_grid<double>(grid4, [&](const Point& p) { return max_abs(r4.values(p)); });
  auto r = detail::new_report("constitutive_residuals", m.name, grid4);
  r.tol_residual = tol.analytic;
  const auto ed = detail::arg_max(vd), eb = detail::arg_max(vb), e4 = detail::arg_max(v4);
  r.values["D_minus_eps0_star_e"] = ed.value;
  r.values["B_minus_mu0_star_h"] = eb.value;
  r.values["F1_plus_eps0_star_F0"] = e4.value;
  r.max_residual = std::max({ed.value, eb.value, e4.value});
  const auto& worst = r.max_residual == ed.value ? ed : (r.max_residual == eb.value ? eb : e4);
  r.witnesses.push_back(detail::witness(grid4, worst, "max constitutive residual"));
  r.decide();
  return r;
}

/// min |lambda ^ d lambda| on the volume index.
inline CheckReport contact_margin(const DifferentialForm& lambda, const SampleGrid& grid,
                                  const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid, lambda.chart(), "contact_margin");
  if (lambda.dim() != 3 || lambda.degree() != 1) throw DegreeError("contact_margin needs a 3D 1-form");
  const auto w = wedge(lambda, exterior_derivative(lambda));
  const auto vals = detail::map_grid<double>(grid, [&](const Point& p) { return std::fabs(w.values(p)[0b111]); });
  auto r = detail::new_report("contact_margin", "", grid);
  r.mode = lambda.order() > 0 ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(lambda.order() > 0);
  r.tol_margin = tol.margin;
  const double s = detail::grid_scale(lambda, grid);
  const auto mn = detail::arg_min(vals);
  r.values["scale"] = s;
  if (s < tol.vanishing) {
    r.min_margin = 0.0;
    r.normalized_margin = 0.0;
    r.forced_fail = true;
    r.notes.push_back("form vanishes on the grid (max coefficient below the vanishing floor); margin flushed to 0");
  } else {
    r.min_margin = mn.value;
    r.normalized_margin = mn.value / (s * s);
  }
  r.witnesses.push_back(detail::witness(grid, mn, "min |lambda ^ d lambda|"));
  r.decide();
  return r;
}

/// Stable Hamiltonian structure test for (Omega, lambda): d Omega = 0, lambda ^ Omega != 0
/// and d lambda = f Omega with f estimated on the largest component of Omega.
inline CheckReport shs_check(const DifferentialForm& omega, const DifferentialForm& lambda, const SampleGrid& grid,
                             const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid, lambda.chart(), "shs_check");
  require_same_chart(omega.chart(), lambda.chart(), "shs_check");
  if (omega.dim() != 3 || omega.degree() != 2 || lambda.degree() != 1)
    throw DegreeError("shs_check needs a 3D 2-form and 1-form");
  const auto d_omega = exterior_derivative(omega);
  const auto d_lambda = exterior_derivative(lambda);
  const double s_om = detail::grid_scale(omega, grid);
  const double s_la = detail::grid_scale(lambda, grid);
  struct Row {
    double d_om = 0, wedge = 0, f = 0, f_res = 0, om_rel = 0;
  };
  const auto rows = detail::map_grid<Row>(grid, [&](const Point& p) {
    Row r;
    const auto om = omega.values(p), la = lambda.values(p), dl = d_lambda.values(p);
    r.d_om = max_abs(d_omega.values(p));
    r.wedge = std::fabs(wedge_values(la, 1, om, 2, 3)[0b111]);
    Mask best = 0b011;
    for (Mask m : {Mask{0b011}, Mask{0b101}, Mask{0b110}})
      if (std::fabs(om[m]) > std::fabs(om[best])) best = m;
    r.om_rel = s_om > 0.0 ? std::fabs(om[best]) / s_om : 0.0;
    if (om[best] != 0.0) {
      r.f = dl[best] / om[best];
      double res = 0.0;
      for (Mask m : {Mask{0b011}, Mask{0b101}, Mask{0b110}}) res = std::max(res, std::fabs(dl[m] - r.f * om[m]));
      r.f_res = res;
    }
    return r;
  });
  auto r = detail::new_report("shs_check", "", grid);
  const bool analytic = std::min(omega.order(), lambda.order()) > 0;
  r.mode = analytic ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(analytic);
  r.tol_margin = tol.margin;
  std::vector<double> d_om, wedge_v, f_res, om_rel, fs;
  for (const auto& x : rows) {
    d_om.push_back(x.d_om);
    wedge_v.push_back(x.wedge);
    f_res.push_back(x.f_res);
    om_rel.push_back(x.om_rel);
  }
  const auto e_dom = detail::arg_max(d_om), e_w = detail::arg_min(wedge_v), e_fr = detail::arg_max(f_res),
             e_om = detail::arg_min(om_rel);
  r.values["scale_omega"] = s_om;
  r.values["scale_lambda"] = s_la;
  const bool vanishing = s_om < tol.vanishing || s_la < tol.vanishing;
  const bool ill = vanishing || e_om.value < tol.ill_conditioned;
  double f_lo = std::numeric_limits<double>::infinity(), f_hi = -f_lo, f_sum = 0.0;
  std::size_t nf = 0;
  for (const auto& x : rows)
    if (!vanishing && x.om_rel >= tol.ill_conditioned) {
      f_lo = std::min(f_lo, x.f);
      f_hi = std::max(f_hi, x.f);
      f_sum += x.f;
      ++nf;
    }
  if (nf > 0) {
    r.values["f_omega_mean"] = f_sum / static_cast<double>(nf);
    r.values["f_omega_min"] = f_lo;
    r.values["f_omega_max"] = f_hi;
    r.values["f_omega_spread"] = f_hi - f_lo;
  }
  const double d_om_n = s_om > 0.0 ? e_dom.value / s_om : 0.0;
  const double f_res_n = s_la > 0.0 ? e_fr.value / s_la : 0.0;
  r.values["max_d_omega"] = e_dom.value;
  r.values["max_dlambda_minus_f_omega"] = e_fr.value;
  r.max_residual = std::max(d_om_n, f_res_n);
  if (vanishing) {
    r.min_margin = 0.0;
    r.normalized_margin = 0.0;
    r.notes.push_back("a form vanishes on the grid (max coefficient below the vanishing floor); margin flushed to 0");
  } else {
    r.min_margin = e_w.value;
    r.normalized_margin = e_w.value / (s_om * s_la);
  }
  if (ill) {
    r.forced_fail = true;
    r.notes.push_back("Omega nearly vanishes at a grid point; f^Omega is ill-conditioned there");
    r.witnesses.push_back(detail::witness(grid, e_om, "min |Omega| (relative)"));
  }
  r.witnesses.push_back(detail::witness(grid, e_w, "min |lambda ^ Omega|"));
  r.witnesses.push_back(detail::witness(grid, e_fr, "max |d lambda - f Omega|"));
  r.decide();
  return r;
}

/// Pointwise f with d lambda = f Omega, from the largest component of Omega.
inline double shs_f_estimate(const DifferentialForm& omega, const DifferentialForm& lambda, const Point& p) {
  const auto om = omega.values(p);
  const auto dl = exterior_derivative(lambda).values(p);
  Mask best = 0b011;
  for (Mask m : {Mask{0b011}, Mask{0b101}, Mask{0b110}})
    if (std::fabs(om[m]) > std::fabs(om[best])) best = m;
  if (om[best] == 0.0) throw DegeneratePoint("Omega vanishes at " + Chart::format(p, 3));
  return dl[best] / om[best];
}

/// min |F ^ F| and max |dF| for a spacetime 2-form.
inline CheckReport symplectic_margin(const DifferentialForm& F, const SampleGrid& grid4,
                                     const Tolerances& tol = default_tolerances()) {
  if (F.dim() != 4 || F.degree() != 2) throw DegreeError("symplectic_margin needs a spacetime 2-form");
  detail::require_grid_chart(grid4, F.chart(), "symplectic_margin");
  const auto ff = wedge(F, F);
  const auto dF = exterior_derivative(F);
  const auto mv = detail::map_grid<double>(grid4, [&](const Point& p) { return std::fabs(ff.values(p)[0b1111]); });
  const auto dv = detail::map_grid<double>(grid4, [&](const Point& p) { return max_abs(dF.values(p)); });
  auto r = detail::new_report("symplectic_margin", "", grid4);
  r.mode = F.order() > 0 ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(F.order() > 0);
  r.tol_margin = tol.margin;
  const double s = detail::grid_scale(F, grid4);
  const auto mn = detail::arg_min(mv), md = detail::arg_max(dv);
  r.values["scale"] = s;
  r.values["max_dF"] = md.value;
  r.max_residual = md.value;
  if (s < tol.vanishing) {
    r.min_margin = 0.0;
    r.normalized_margin = 0.0;
    r.forced_fail = true;
    r.notes.push_back("form vanishes on the grid; margin flushed to 0");
  } else {
    r.min_margin = mn.value;
    r.normalized_margin = mn.value / (s * s);
  }
  r.witnesses.push_back(detail::witness(grid4, mn, "min |F ^ F|"));
  r.decide();
  return r;
}

enum class WhichF { F0, F1 };

/// symplectic_margin for F0 or F1 of a field set, with the spatial 3-form margins |B ^ e| and |D ^ h|.
inline CheckReport symplectic_margin(const MaxwellFieldSet& m, WhichF which, const SampleGrid& grid4,
                                     const Tolerances& tol = default_tolerances()) {
  auto r = symplectic_margin(which == WhichF::F0 ? m.F0() : m.F1(), grid4, tol);
  r.subject = which == WhichF::F0 ? "F0" : "F1";
  auto margin3 = [&](const DifferentialForm& a, const DifferentialForm& b) {
    const auto w = wedge(a, b);
    const auto v = detail::map_grid<double>(grid4, [&](const Point& p) { return std::fabs(w.values(p)[0b1110]); });
    const double s = detail::grid_scale(a, grid4) * detail::grid_scale(b, grid4);
    const double mn = detail::arg_min(v).value;
    return std::pair{mn, s > 0.0 ? mn / s : 0.0};
  };
  const auto be = margin3(m.B, m.e);
  const auto dh = margin3(m.D, m.h);
  r.values["min_B_wedge_e"] = be.first;
  r.values["min_B_wedge_e_normalized"] = be.second;
  r.values["min_D_wedge_h"] = dh.first;
  r.values["min_D_wedge_h_normalized"] = dh.second;
  return r;
}

inline DifferentialForm poynting_form(const MaxwellFieldSet& m) { return wedge(m.e, m.h); }

/// max |e ^ h|: passes when the fields are parallel.
inline CheckReport parallel_check(const MaxwellFieldSet& m, const SampleGrid& grid4,
                                  const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid4, m.chart4, "parallel_check");
  const auto s = poynting_form(m);
  const auto v = detail::map_grid<double>(grid4, [&](const Point& p) { return max_abs(s.values(p)); });
  auto r = detail::new_report("parallel_check", m.name, grid4);
  r.tol_residual = tol.analytic;
  const auto e = detail::arg_max(v);
  r.max_residual = e.value;
  r.values["max_poynting"] = e.value;
  r.witnesses.push_back(detail::witness(grid4, e, "max |e ^ h|"));
  r.decide();
  return r;
}

struct EnergyForms {
  DifferentialForm electric, magnetic;              // (eps0/2) e ^ *3 e, (mu0/2) h ^ *3 h
  DifferentialForm electric_kappa, magnetic_kappa;  // (1/2) e ^ D, (1/2) h ^ B
};

inline EnergyForms energy_forms(const MaxwellFieldSet& m) {
  const auto& c = m.constants;
  return {scale(0.5 * c.eps0, wedge(m.e, spatial_hodge(m.g3, m.e))),
          scale(0.5 * c.mu0, wedge(m.h, spatial_hodge(m.g3, m.h))), scale(0.5, wedge(m.e, m.D)),
          scale(0.5, wedge(m.h, m.B))};
}

/// Agreement of the two energy-density expressions in vacuum.
inline CheckReport energy_check(const MaxwellFieldSet& m, const SampleGrid& grid4,
                                const Tolerances& tol = default_tolerances()) {
  detail::require_grid_chart(grid4, m.chart4, "energy_check");
  const auto en = energy_forms(m);
  const auto de = sub(en.electric, en.electric_kappa), dh = sub(en.magnetic, en.magnetic_kappa);
  const auto v = detail::map_grid<double>(
      grid4, [&](const Point& p) { return std::max(max_abs(de.values(p)), max_abs(dh.values(p))); });
  const auto ee = detail::map_grid<double>(grid4, [&](const Point& p) { return en.electric.values(p)[0b1110]; });
  const auto eh = detail::map_grid<double>(grid4, [&](const Point& p) { return en.magnetic.values(p)[0b1110]; });
  auto r = detail::new_report("energy_forms", m.name, grid4);
  r.tol_residual = tol.analytic;
  const auto e = detail::arg_max(v);
  r.max_residual = e.value;
  r.values["max_electric_density"] = detail::arg_max(ee).value;
  r.values["max_magnetic_density"] = detail::arg_max(eh).value;
  r.witnesses.push_back(detail::witness(grid4, e, "max |E - E_kappa|"));
  r.decide();
  return r;
}

/// max |L_Y form| over the grid for each named form (Cartan formula), and the largest
/// difference to the flow-pullback estimate as a cross-check.
inline CheckReport conservation_along(const VectorField& y, const std::vector<std::pair<std::string, DifferentialForm>>& forms,
                                      const SampleGrid& grid, const Tolerances& tol = default_tolerances(),
                                      bool flow_cross_check = true) {
  detail::require_grid_chart(grid, y.chart(), "conservation_along");
  auto r = detail::new_report("conservation_along", "", grid);
  bool analytic = y.order() > 0;
  for (const auto& [name, f] : forms) analytic = analytic && f.order() > 0;
  r.mode = analytic ? "analytic" : "finite-difference";
  r.tol_residual = tol.residual(analytic);
  double worst = 0.0;
  for (const auto& [name, f] : forms) {
    require_same_chart(f.chart(), y.chart(), "conservation_along");
    const auto lie = lie_derivative(y, f);
    const auto v = detail::map_grid<double>(grid, [&](const Point& p) { return max_abs(lie.values(p)); });
    const auto e = detail::arg_max(v);
    r.values["lie_" + name] = e.value;
    if (e.value >= worst) {
      worst = e.value;
      r.witnesses.assign(1, detail::witness(grid, e, "max |L_Y " + name + "|"));
    }
    if (flow_cross_check) {
      const auto dv = detail::map_grid<double>(grid, [&](const Point& p) {
        const auto a = lie.values(p);
        const auto b = lie_derivative_by_flow(y, f, p);
        double d = 0.0;
        for (int i = 0; i < kMasks; ++i) d = std::max(d, std::fabs(a[i] - b[i]));
        return d;
      });
      r.values["flow_minus_cartan_" + name] = detail::arg_max(dv).value;
    }
  }
  r.max_residual = worst;
  r.decide();
  return r;
}

/// min over constant f of max_grid |*3 dv - f v|; positive values witness a non-Beltrami form.
struct BeltramiDefect {
  double best_f = 0.0;
  double defect = 0.0;
};

inline BeltramiDefect best_constant_beltrami_defect(const DifferentialForm& v, const MetricField& g,
                                                    const SampleGrid& grid) {
  const auto sdv = hodge_star(g, exterior_derivative(v));
  const auto a = detail::map_grid<Coeffs<double>>(grid, [&](const Point& p) { return sdv.values(p); });
  const auto b = detail::map_grid<Coeffs<double>>(grid, [&](const Point& p) { return v.values(p); });
  auto cost = [&](double f) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int j = 0; j < kMasks; ++j) m = std::max(m, std::fabs(a[i][j] - f * b[i][j]));
    return m;
  };
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa = std::max(sa, max_abs(a[i]));
    sb = std::max(sb, max_abs(b[i]));
  }
  if (sb == 0.0) return {0.0, sa};
  double lo = -10.0 * (sa / sb + 1.0), hi = -lo;
  // The cost is convex in f (a maximum of absolute values of affine functions).
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (cost(m1) <= cost(m2)) hi = m2;
    else lo = m1;
  }
  const double f = 0.5 * (lo + hi);
  return {f, cost(f)};
}

}  // namespace bmk
