// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bmk/bmk.hpp"

using namespace bmk;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed requirement; the first few are kept for the summary.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << " failed:";
    pass = false;
    if (++failures <= 4) detail << " [" << what << "]";
  }
  int failures = 0;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_diff3(const Vec<double>& a, const Vec<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < 3; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Vec<double> scaled(const Vec<double>& v, double s) { return {s * v[0], s * v[1], s * v[2], 0.0}; }

// Smooth k-form with a different trigonometric coefficient per component.
DifferentialForm trig_form(const Chart& c, int k, double phase) {
  return DifferentialForm::analytic(c, k, [k, phase, n = c.dim()](auto s, const Point& p) {
    using S = decltype(s);
    Coeffs<S> r = zero_coeffs<S>();
    int j = 1;
    for (Mask m : masks_of_degree(n, k)) {
      S acc(phase * j);
      for (int a = 0; a < n; ++a) acc = acc + static_cast<double>((a + j) % 3 + (a == 0 ? 0 : 1)) * coord<S>(p, a);
      r[m] = bmk::sin(acc) + 0.5 * bmk::cos(2.0 * coord<S>(p, (j + 1) % n));
      ++j;
    }
    return r;
  });
}

double max_over(const DifferentialForm& a, const DifferentialForm& b, const SampleGrid& g) {
  double m = 0.0;
  for (const auto& p : g.points) {
    const auto x = a.values(p), y = b.values(p);
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::fabs(x[i] - y[i]));
  }
  return m;
}

SampleGrid seed_list(const Chart& c, std::vector<Point> pts) {
  SampleGrid g;
  g.chart = c;
  g.kind = "list";
  g.counts = {static_cast<int>(pts.size())};
  g.points = std::move(pts);
  return g;
}

VectorField circular() {
  return VectorField::analytic(Chart::euclidean3(), [](auto s, const Point& p) {
    using S = decltype(s);
    Vec<S> r{};
    r[0] = -coord<S>(p, 1);
    r[1] = coord<S>(p, 0);
    return r;
  });
}

// ---------------------------------------------------------------------------

void hodge_identities(Outcome& out) {
  const auto t3 = Chart::torus3();
  const auto st = Chart::solid_torus(1.0, 1e-3);
  const std::vector<std::pair<std::string, MetricField>> metrics{{"euclidean", MetricField::euclidean(t3)},
                                                                 {"solid_torus", MetricField::solid_torus(st)}};
  double worst3 = 0.0;
  for (const auto& [name, g] : metrics) {
    const auto pts = SampleGrid::random(g.chart(), 1000, 101);
    for (int k = 0; k <= 3; ++k) {
      const auto a = trig_form(g.chart(), k, 0.3 + k);
      const double d = max_over(hodge_star(g, hodge_star(g, a)), a, pts);
      worst3 = std::max(worst3, d);
      out.require(d < 1e-12, name + " degree " + std::to_string(k) + " " + fmt(d));
    }
  }
  const auto g3 = MetricField::euclidean(t3);
  const auto g4 = MetricField::lorentzian(g3);
  const auto pts4 = SampleGrid::random(g4.chart(), 1000, 102);
  double worst4 = 0.0;
  for (int k = 0; k <= 4; ++k) {
    const auto a = trig_form(g4.chart(), k, 0.9 + k);
    const double sign = (k + 1) % 2 ? -1.0 : 1.0;
    const double d = max_over(hodge_star(g4, hodge_star(g4, a)), scale(sign, a), pts4);
    worst4 = std::max(worst4, d);
    out.require(d < 1e-12, "lorentzian degree " + std::to_string(k) + " " + fmt(d));
  }
  const auto e = lift(trig_form(t3, 1, 0.5));
  const auto dx0 = DifferentialForm::basis(g4.chart(), {0});
  const double de = max_over(hodge_star(g4, wedge(e, dx0)), spatial_hodge(g3, e), pts4);
  out.require(de < 1e-12, "*(e^dx0) vs *3 e " + fmt(de));
  out.detail << " **3=" << fmt(worst3) << " **4=" << fmt(worst4) << " *(e^dx0)=" << fmt(de);
}

void beltrami_identities(Outcome& out) {
  const auto g = SampleGrid::regular(Chart::torus3(), {16, 16, 16});
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    const auto v = t3_mode(n, 1.0);
    out.require(v.k_expected == -n, "t3_mode k");
    const auto r = beltrami_residual(v, g);
    worst = std::max(worst, r.max_residual);
    out.require(r.pass, v.name + " " + fmt(r.max_residual));
  }
  for (auto [a, b, c] : {std::tuple{1.0, 1.0, 1.0}, std::tuple{1.0, 0.6, 0.3}, std::tuple{0.5, 1.0, 2.0}}) {
    const auto v = abc_flow(a, b, c);
    out.require(v.k_expected == 1.0, "abc k");
    const auto r = beltrami_residual(v, g);
    worst = std::max(worst, r.max_residual);
    out.require(r.pass, v.name + " " + fmt(r.max_residual));
  }
  double worst_st = 0.0;
  Tolerances bessel;
  bessel.analytic = 1e-7;
  for (auto [kc, beta] : {std::pair{2.0, 1.0}, std::pair{3.5, 0.5}}) {
    for (auto sg : {ModeSign::minus, ModeSign::plus}) {
      const auto v = solid_torus_mode(kc, beta, sg, 1.0);
      const double k = std::sqrt(beta * beta + kc * kc);
      out.require(std::fabs(v.k_expected - (sg == ModeSign::minus ? -k : k)) < 1e-15, "solid torus k");
      const auto r = beltrami_residual(v, SampleGrid::regular(v.chart, {20, 20, 20}), bessel);
      worst_st = std::max(worst_st, r.max_residual);
      out.require(r.pass, v.name + " " + fmt(r.max_residual));
    }
  }
  out.detail << " t3/abc=" << fmt(worst) << " solid_torus=" << fmt(worst_st);
}

void maxwell_suite(Outcome& out) {
  const std::vector<MaxwellFieldSet> sets{beltrami_maxwell(t3_mode(1, 1.0), 1.0),
                                          traveling_wave(Profile::sine()),
                                          constant_field(1.0, 0.5),
                                          parallel_nonbeltrami(1.0, 1.0, "sin"),
                                          beltrami_nonparallel(Profile::cosine())};
  std::vector<double> x0s;
  for (int i = 0; i < 10; ++i) x0s.push_back(0.37 * i);
  double worst = 0.0, agree = 0.0;
  for (const auto& m : sets) {
    const auto g4 = SampleGrid::spacetime(SampleGrid::regular(m.chart4.spatial(), {10, 10, 10}), x0s);
    out.require(g4.size() == 10000, "grid size");
    const auto r = maxwell_residuals(m, g4);
    out.require(r.pass, m.name + " " + fmt(r.max_residual));
    for (const char* k : {"faraday", "gauss_magnetic", "gauss_electric", "ampere", "dF0", "dF1"}) {
      worst = std::max(worst, r.values.at(k));
      out.require(r.values.at(k) < 1e-8, m.name + " " + k);
    }
    for (const char* k : {"agreement_F0", "agreement_F1"}) {
      agree = std::max(agree, r.values.at(k));
      out.require(r.values.at(k) < 1e-8, m.name + " " + k);
    }
  }
  out.detail << " residual=" << fmt(worst) << " agreement=" << fmt(agree);
}

void structure_table(Outcome& out) {
  const auto g = SampleGrid::regular(Chart::torus3(), {8, 8, 8});
  for (const auto& cst : {Constants{}, Constants::custom(0.25, 1.0)}) {
    const auto m = beltrami_maxwell(t3_mode(1, 1.0), 1.0, cst);
    const double k = m.k, c0 = cst.c0();
    auto row = [&](double x0) {
      const auto g4 = SampleGrid::spacetime(g, {x0});
      const auto be = shs_check(slice(m.B, x0), slice(m.e, x0), g);
      const auto dh = shs_check(slice(m.D, x0), slice(m.h, x0), g);
      return std::tuple{std::array<bool, 6>{contact_margin(slice(m.e, x0), g).pass,
                                            contact_margin(slice(m.h, x0), g).pass, be.pass, dh.pass,
                                            symplectic_margin(m, WhichF::F0, g4).pass,
                                            symplectic_margin(m, WhichF::F1, g4).pass},
                        be, dh};
    };
    const double xq = kPi / (4.0 * k);
    const auto [quarter, be, dh] = row(xq);
    out.require(quarter == std::array<bool, 6>{true, true, true, true, true, true}, "table at pi/4 " + cst.preset);
    const double fb = -c0 * k / std::tan(k * xq), fd = -c0 * k * std::tan(k * xq);
    if (be.pass && dh.pass) {
      out.require(std::fabs(be.values.at("f_omega_mean") - fb) < 1e-6, "f^B");
      out.require(std::fabs(dh.values.at("f_omega_mean") - fd) < 1e-6, "f^D");
      out.detail << " f^B=" << fmt(be.values.at("f_omega_mean")) << " f^D=" << fmt(dh.values.at("f_omega_mean"));
    }
    // cos(kx0) = 0 kills e and B, sin(kx0) = 0 kills h and D
    out.require(std::get<0>(row(0.0)) == std::array<bool, 6>{true, false, false, false, false, false},
                "table at 0 " + cst.preset);
    out.require(std::get<0>(row(kPi / (2.0 * k))) == std::array<bool, 6>{false, true, false, false, false, false},
                "table at pi/2 " + cst.preset);
  }
}

void reeb_oracles(Outcome& out) {
  double worst = 0.0, contracts = 0.0;
  auto track = [&](const std::string& name, double d, const CheckReport& rc) {
    worst = std::max(worst, d);
    contracts = std::max(contracts, rc.max_residual);
    out.require(d < 1e-8, name + " " + fmt(d));
    out.require(rc.pass, name + " contracts " + fmt(rc.max_residual));
  };
  const auto gt = SampleGrid::random(Chart::torus3(), 1000, 201);
  for (int n : {1, 2, 3}) {
    const double c = 0.5 + n;
    const auto v = t3_mode(n, c);
    for (auto variant : {ReebVariant::normalized, ReebVariant::unnormalized}) {
      const auto R = reeb_closed_form_beltrami(v, variant);
      const double s = variant == ReebVariant::normalized ? 1.0 / (c * c) : 1.0;
      double d = 0.0;
      for (const auto& p : gt.points) {
        const Vec<double> w{c * std::cos(n * p[2]), c * std::sin(n * p[2]), 0.0, 0.0};
        d = std::max(d, max_diff3(reeb_from_shs(R.pair, p), scaled(w, s)));
      }
      track(v.name, d, reeb_contracts(R.Y, R.pair, gt));
    }
  }
  for (auto [A, B, C] : {std::tuple{1.0, 0.6, 0.3}, std::tuple{0.3, 1.0, 0.5}}) {
    const auto v = abc_flow(A, B, C);
    const auto R = reeb_closed_form_beltrami(v, ReebVariant::normalized);
    double d = 0.0;
    for (const auto& p : gt.points) {
      const Vec<double> w{A * std::sin(p[2]) + C * std::cos(p[1]), B * std::sin(p[0]) + A * std::cos(p[2]),
                          C * std::sin(p[1]) + B * std::cos(p[0]), 0.0};
      d = std::max(d, max_diff3(reeb_from_shs(R.pair, p), scaled(w, 1.0 / (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]))));
    }
    track(v.name, d, reeb_contracts(R.Y, R.pair, gt));
  }
  for (auto sg : {ModeSign::minus, ModeSign::plus}) {
    const double kc = 2.0, beta = 1.0, k = std::sqrt(beta * beta + kc * kc), s = sg == ModeSign::minus ? -1.0 : 1.0;
    const auto v = solid_torus_mode(kc, beta, sg, 1.0, 0.05);
    const auto R = reeb_closed_form_beltrami(v, ReebVariant::unnormalized);
    const auto g = SampleGrid::random(v.chart, 1000, 202);
    double d = 0.0;
    for (const auto& p : g.points) {
      const double r = p[0], j0 = std::cyl_bessel_j(0.0, kc * r), j1 = std::cyl_bessel_j(1.0, kc * r);
      const Vec<double> w{(beta / kc) * j1 * std::sin(beta * p[2]), s * (k / kc) * j1 * std::cos(beta * p[2]) / r,
                          j0 * std::cos(beta * p[2]), 0.0};
      d = std::max(d, max_diff3(reeb_from_shs(R.pair, p), w));
    }
    track(v.name, d, reeb_contracts(R.Y, R.pair, g));
  }
  const auto cst = Constants::custom(0.25, 1.0);
  const double c = 1.2, e0 = 0.8, x0 = 0.6;
  const auto m = beltrami_maxwell(t3_mode(1, c), e0, cst);
  const auto R0 = reeb_for_maxwell(m, WhichReeb::Y0, x0);
  const auto R1 = reeb_for_maxwell(m, WhichReeb::Y1, x0);
  const double fe = e0 * std::cos(m.k * x0), fh = e0 / (cst.c0() * cst.mu0) * std::sin(m.k * x0);
  double d0 = 0.0, d1 = 0.0, dr = 0.0;
  out.require(R1.fe_over_fh.has_value(), "f^e/f^h available");
  const double ratio = R1.fe_over_fh.value_or(0.0);
  for (const auto& p : gt.points) {
    const Vec<double> w{c * std::cos(p[2]), c * std::sin(p[2]), 0.0, 0.0};
    const auto y0 = reeb_from_shs(R0.field.pair, p), y1 = reeb_from_shs(R1.field.pair, p);
    d0 = std::max(d0, max_diff3(y0, scaled(w, 1.0 / (fe * c * c))));
    d1 = std::max(d1, max_diff3(y1, scaled(w, 1.0 / (fh * c * c))));
    dr = std::max(dr, max_diff3(y1, scaled(y0, ratio)));
  }
  track("Y0", d0, reeb_contracts(R0.field.Y, R0.field.pair, gt));
  track("Y1", d1, reeb_contracts(R1.field.Y, R1.field.pair, gt));
  out.require(dr < 1e-8, "Y1 = (f^e/f^h) Y0 " + fmt(dr));
  out.detail << " closed_form=" << fmt(worst) << " contracts=" << fmt(contracts) << " ratio=" << fmt(dr);
}

void conservation(Outcome& out) {
  const auto m = beltrami_maxwell(t3_mode(1, 1.0), 1.0);
  const double x0 = kPi / (4.0 * m.k);
  const auto en = energy_forms(m);
  const auto g = SampleGrid::random(Chart::torus3(), 200, 301);
  auto numeric = [&](std::initializer_list<std::pair<const char*, const DifferentialForm*>> fs) {
    std::vector<std::pair<std::string, DifferentialForm>> v;
    for (const auto& [name, f] : fs) v.emplace_back(name, numeric_only(slice(*f, x0)));
    return v;
  };
  const auto y0 = numeric_only(reeb_for_maxwell(m, WhichReeb::Y0, x0).field.Y);
  const auto y1 = numeric_only(reeb_for_maxwell(m, WhichReeb::Y1, x0).field.Y);
  const auto r0 = conservation_along(
      y0, numeric({{"e", &m.e}, {"B", &m.B}, {"energy_e", &en.electric}, {"energy_h", &en.magnetic}}), g);
  const auto r1 = conservation_along(
      y1, numeric({{"h", &m.h}, {"D", &m.D}, {"energy_e", &en.electric}, {"energy_h", &en.magnetic}}), g);
  for (const auto* r : {&r0, &r1}) {
    out.require(r->mode == "finite-difference", "mode");
    out.require(r->pass && r->max_residual < 1e-6, "residual " + fmt(r->max_residual));
  }
  out.detail << " Y0=" << fmt(r0.max_residual) << " Y1=" << fmt(r1.max_residual);
}

void closed_field_lines(Outcome& out) {
  const auto m = beltrami_maxwell(t3_mode(1, 1.0), 1.0);
  const auto ye = metric_sharp(m.g3, slice(m.e, 0.0));
  const double slope_half = std::atan(0.5), irrational = std::atan(std::sqrt(2.0));
  const auto seeds =
      SampleGrid::regular(Chart::torus3(), {5, 5, 5}, {}, {{}, {}, {0.0, kPi / 2.0, kPi, slope_half, irrational}});
  const auto sv = closed_orbit_survey(ye, seeds, 1e-2, 60.0, 1e-5);
  int axis = 0, half = 0, irr_open = 0;
  for (const auto& s : sv.seeds) {
    const double x3 = s.seed[2];
    const auto& c = s.closure;
    if (x3 == irrational) {
      irr_open += !c.closed;
      out.require(!c.closed, "irrational seed closed");
    } else if (x3 == slope_half) {
      const bool ok = c.closed && std::fabs(c.period_estimate - 2.0 * kPi * std::sqrt(5.0)) < 1e-4 &&
                      c.winding[0] == 2 && c.winding[1] == 1 && c.winding[2] == 0;
      half += ok;
      out.require(ok, "slope 1/2 seed " + Chart::format(s.seed, 3));
    } else {
      const bool ok = c.closed && std::fabs(c.period_estimate - 2.0 * kPi) < 1e-4;
      axis += ok;
      out.require(ok, "axis-aligned seed " + Chart::format(s.seed, 3));
    }
  }
  std::vector<Point> irr_pts;
  for (const auto& p : seeds.points)
    if (p[2] == irrational) irr_pts.push_back(p);
  const auto si = closed_orbit_survey(ye, seed_list(Chart::torus3(), irr_pts), 1e-2, 60.0, 1e-5);
  out.require(si.status() == "none found within budget", "irrational status '" + si.status() + "'");
  out.detail << " axis-aligned " << axis << "/75 slope-1/2 " << half << "/25 irrational open " << irr_open
             << "/25 status '" << si.status() << "'";
}

void integrator_order(Outcome& out) {
  auto end_error = [](double h, double S) {
    const auto tr = integrate(circular(), {1.0, 0.0, 0.0, 0}, h, std::lround(S / h));
    const auto& x = tr.samples.back().x;
    return std::hypot(x[0] - std::cos(S), x[1] - std::sin(S));
  };
  const double ratio = end_error(0.1, 4.0) / end_error(0.05, 4.0);
  out.require(ratio >= 12.0 && ratio <= 20.0, "ratio " + fmt(ratio));
  const Point seed{0.3, -0.8, 0.1, 0};
  const long n = 5000;
  const auto fw = integrate(circular(), seed, 1e-3, n);
  const auto bw = integrate(scale(-1.0, circular()), fw.samples.back().x, 1e-3, n);
  const double rev = Chart::euclidean3().distance(bw.samples.back().x, seed);
  out.require(rev < 1e-8, "reversibility " + fmt(rev));
  out.detail << " ratio=" << fmt(ratio) << " reversibility=" << fmt(rev);
}

void negative_controls(Outcome& out) {
  const auto g = SampleGrid::regular(Chart::torus3(), {8, 8, 8});
  const auto tw = traveling_wave(Profile::sine());
  const auto g4 = SampleGrid::spacetime(g, {0.0, 0.7});
  for (auto w : {WhichF::F0, WhichF::F1}) {
    const auto r = symplectic_margin(tw, w, g4);
    out.require(!r.pass && r.min_margin == 0.0, "traveling_wave " + r.subject);
  }
  const auto cf = constant_field(1.0, 0.5);
  const auto ge = SampleGrid::regular(cf.chart4.spatial(), {8, 8, 8});
  for (const auto* f : {&cf.e, &cf.h}) {
    const auto r = contact_margin(slice(*f, 0.3), ge);
    out.require(!r.pass && r.min_margin == 0.0, "constant_field contact");
  }
  const auto v = t3_mode(1, 1.0);
  const auto r = beltrami_residual(v.form, -v.k_expected, v.metric, g);
  out.require(!r.pass, "wrong-sign t3_mode passed");
  out.detail << " traveling_wave margin=0 constant_field margin=0 wrong-sign residual=" << fmt(r.max_residual);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> all{{1, "hodge identities", 5, hodge_identities},
                                   {2, "beltrami identities", 30, beltrami_identities},
                                   {3, "maxwell suite", 60, maxwell_suite},
                                   {4, "structure table", 30, structure_table},
                                   {5, "reeb oracle equivalence", 30, reeb_oracles},
                                   {6, "conservation along reeb fields", 30, conservation},
                                   {7, "closed field-line witnesses", 120, closed_field_lines},
                                   {8, "integrator order", 10, integrator_order},
                                   {9, "negative controls", 10, negative_controls}};
  int failed = 0;
  for (const auto& c : all) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(dt < c.budget_s, "over budget");
    failed += !out.pass;
    std::printf("%s %d %s:%s (%.2f s of %.0f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.str().c_str(),
                dt, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
