#pragma once

// Field-line integration with chart-aware wrapping, closure detection, seed surveys
// and Poincare sections.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bmk/chart.hpp"
#include "bmk/forms.hpp"
#include "bmk/grid.hpp"
#include "bmk/parallel.hpp"

namespace bmk {

struct OrbitSample {
  double s = 0.0;
  Point x{};       // lifted coordinates (periodic axes not reduced)
  Vec<double> v{};  // field at the sample, for Hermite interpolation
};

enum class TraceStatus { complete, left_domain, evaluation_failed };

inline const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::complete: return "complete";
    case TraceStatus::left_domain: return "left_domain";
    default: return "evaluation_failed";
  }
}

struct OrbitTrace {
  Chart chart;
  Point seed{};
  double step = 0.0;
  long n_steps = 0;
  int integrator_order = 4;
  std::vector<OrbitSample> samples;
  std::array<int, kMaxDim> winding{};
  double speed_min = 0.0, speed_max = 0.0;
  TraceStatus status = TraceStatus::complete;
  std::string reason;

  Point wrapped(std::size_t i) const { return chart.wrap(samples.at(i).x); }

  /// Cubic Hermite position on segment [i, i+1] at parameter s.
  Point hermite(std::size_t i, double s) const {
    const auto& a = samples.at(i);
    const auto& b = samples.at(i + 1);
    const double h = b.s - a.s;
    const double t = (s - a.s) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    Point p{};
    for (int k = 0; k < chart.dim(); ++k)
      p[k] = h00 * a.x[k] + h10 * h * a.v[k] + h01 * b.x[k] + h11 * h * b.v[k];
    return p;
  }

  /// Lifted position at parameter s by Hermite interpolation.
  Point position_at(double s) const {
    if (samples.size() < 2) return samples.empty() ? Point{} : samples.front().x;
    const double s0 = samples.front().s;
    std::size_t i = static_cast<std::size_t>(std::floor((s - s0) / step));
    i = std::min(i, samples.size() - 2);
    return hermite(i, s);
  }
};

namespace detail {

inline double speed(const Vec<double>& v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

inline bool inside_intervals(const Chart& c, const Point& p) {
  for (int i = 0; i < c.dim(); ++i) {
    const auto& ax = c.axis(i);
    if (!ax.is_periodic() && (p[i] < ax.lo || p[i] > ax.hi || !std::isfinite(p[i]))) return false;
  }
  return true;
}

/// Golden-section minimization of f on [a, b].
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int iters = 80) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-15 * (1.0 + std::fabs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace detail

/// Classical fixed-step RK4 in lifted coordinates; the field is evaluated at wrapped points.
/// Leaving an interval axis or a failed field evaluation truncates the trace with a reason.
inline OrbitTrace integrate(const VectorField& y, const Point& seed, double step, long n_steps) {
  if (!(step > 0.0)) throw ConfigError("integrate: step must be > 0");
  if (n_steps < 1) throw ConfigError("integrate: n_steps must be >= 1");
  const Chart& c = y.chart();
  c.require_contains(seed);
  const int n = c.dim();
  OrbitTrace tr;
  tr.chart = c;
  tr.seed = c.wrap(seed);
  tr.step = step;
  tr.n_steps = n_steps;
  tr.samples.reserve(static_cast<std::size_t>(n_steps) + 1);
  auto field = [&](const Point& p) {
    if (!detail::inside_intervals(c, p)) throw DomainError("trajectory left the chart at " + Chart::format(p, n));
    return y.values(c.wrap(p));
  };
  auto axpy = [n](const Point& p, const Vec<double>& v, double s) {
    Point q = p;
    for (int i = 0; i < n; ++i) q[i] += s * v[i];
    return q;
  };
  Point x = tr.seed;
  Vec<double> v;
  try {
    v = field(x);
  } catch (const Error& e) {
    tr.status = TraceStatus::evaluation_failed;
    tr.reason = e.what();
    return tr;
  }
  tr.samples.push_back({0.0, x, v});
  tr.speed_min = tr.speed_max = detail::speed(v, n);
  for (long i = 1; i <= n_steps; ++i) {
    try {
      const auto k1 = v;
      const auto k2 = field(axpy(x, k1, step / 2));
      const auto k3 = field(axpy(x, k2, step / 2));
      const auto k4 = field(axpy(x, k3, step));
      Point nx = x;
      for (int a = 0; a < n; ++a) nx[a] += step / 6.0 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
      const auto nv = field(nx);
      x = nx;
      v = nv;
    } catch (const DomainError& e) {
      tr.status = TraceStatus::left_domain;
      tr.reason = e.what();
      break;
    } catch (const Error& e) {
      tr.status = TraceStatus::evaluation_failed;
      tr.reason = e.what();
      break;
    }
    tr.samples.push_back({static_cast<double>(i) * step, x, v});
    const double sp = detail::speed(v, n);
    tr.speed_min = std::min(tr.speed_min, sp);
    tr.speed_max = std::max(tr.speed_max, sp);
  }
  tr.winding = c.winding(tr.seed, tr.samples.back().x);
  return tr;
}

struct ClosureResult {
  bool closed = false;
  double period_estimate = std::numeric_limits<double>::quiet_NaN();
  double return_distance = std::numeric_limits<double>::infinity();  // best found when not closed
  std::array<int, kMaxDim> winding{};
  std::string method = "recurrence";
  double tol = 0.0;

  nlohmann::json to_json(int dim) const {
    nlohmann::json j;
    j["closed"] = closed;
    j["period_estimate"] = std::isfinite(period_estimate) ? nlohmann::json(period_estimate) : nlohmann::json(nullptr);
    j["return_distance"] = std::isfinite(return_distance) ? nlohmann::json(return_distance) : nlohmann::json(nullptr);
    j["winding"] = std::vector<int>(winding.begin(), winding.begin() + dim);
    j["method"] = method;
    j["tol"] = tol;
    return j;
  }
};

/// First return to the seed (modulo full windings) after s > 10 step, refined on the
/// Hermite interpolant by golden-section minimization of the chart distance.
inline ClosureResult detect_closure(const OrbitTrace& tr, double tol = 1e-5) {
  if (tr.samples.size() < 100) throw ConfigError("detect_closure needs a trace with at least 100 samples");
  ClosureResult res;
  res.tol = tol;
  const Chart& c = tr.chart;
  const std::size_t N = tr.samples.size();
  std::vector<double> d(N);
  for (std::size_t i = 0; i < N; ++i) d[i] = c.distance(tr.seed, tr.samples[i].x);
  // Any return within tol must show up as a sampled local minimum below this radius.
  double kappa = 1.0;
  for (int i = 0; i < c.dim(); ++i)
    if (c.axis(i).is_periodic()) kappa = std::max(kappa, 2.0 * std::numbers::pi / c.axis(i).period());
  const double capture = tol + kappa * tr.step * std::max(tr.speed_max, 1e-300);
  const double s_min = 10.0 * tr.step;
  // A return only counts once the orbit has left the capture ball; stagnation points never do.
  double reach = 0.0;
  for (std::size_t i = 1; i + 1 < N; ++i) {
    reach = std::max(reach, d[i]);
    if (tr.samples[i].s <= s_min || reach <= 2.0 * capture) continue;
    if (!(d[i] <= d[i - 1] && d[i] <= d[i + 1]) || d[i] > capture) continue;
    const auto [s_star, dist] = detail::golden_min(
        [&](double s) {
          const std::size_t seg = s < tr.samples[i].s ? i - 1 : i;
          return c.distance(tr.seed, tr.hermite(seg, s));
        },
        tr.samples[i - 1].s, tr.samples[i + 1].s);
    res.return_distance = std::min(res.return_distance, dist);
    if (dist < tol && s_star > s_min) {
      res.closed = true;
      res.period_estimate = s_star;
      res.return_distance = dist;
      const std::size_t seg = s_star < tr.samples[i].s ? i - 1 : i;
      const Point end = tr.hermite(seg, s_star);
      for (int a = 0; a < c.dim(); ++a) {
        const auto& ax = c.axis(a);
        if (ax.is_periodic()) res.winding[a] = static_cast<int>(std::lround((end[a] - tr.seed[a]) / ax.period()));
      }
      return res;
    }
  }
  for (std::size_t i = 1; i < N; ++i)
    if (tr.samples[i].s > s_min) res.return_distance = std::min(res.return_distance, d[i]);
  if (std::max(reach, d[N - 1]) <= 2.0 * capture) res.method = "stationary";
  return res;
}

namespace detail {

/// Distance from point p to the sampled curve of a closed trace over [0, period].
inline double point_to_curve(const OrbitTrace& a, std::size_t n_seg, const Point& p) {
  const Chart& c = a.chart;
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n_seg && i < a.samples.size(); ++i) {
    const double dd = c.distance(p, a.samples[i].x);
    if (dd < bd) {
      bd = dd;
      best = i;
    }
  }
  for (std::size_t seg : {best > 0 ? best - 1 : best, best}) {
    if (seg + 1 >= a.samples.size()) continue;
    const auto r = golden_min([&](double s) { return c.distance(p, a.hermite(seg, s)); }, a.samples[seg].s,
                              a.samples[seg + 1].s, 60);
    bd = std::min(bd, r.second);
  }
  return bd;
}

inline std::size_t period_segments(const OrbitTrace& t, double period) {
  return std::min(t.samples.size() - 1, static_cast<std::size_t>(std::ceil(period / t.step)) + 1);
}

/// Symmetric point-to-curve Hausdorff distance between two closed orbits (subsampled).
inline double orbit_hausdorff(const OrbitTrace& a, double pa, const OrbitTrace& b, double pb, double early_exit) {
  const std::size_t na = period_segments(a, pa), nb = period_segments(b, pb);
  double h = 0.0;
  auto one_way = [&](const OrbitTrace& from, std::size_t nf, const OrbitTrace& to, std::size_t nt) {
    const std::size_t stride = std::max<std::size_t>(1, nf / 128);
    for (std::size_t i = 0; i <= nf; i += stride) {
      h = std::max(h, point_to_curve(to, nt, from.samples[i].x));
      if (h > early_exit) return;
    }
  };
  one_way(b, nb, a, na);
  if (h <= early_exit) one_way(a, na, b, nb);
  return h;
}

}  // namespace detail

struct SeedResult {
  Point seed{};
  ClosureResult closure;
  TraceStatus status = TraceStatus::complete;
  std::string error;
  int orbit_id = -1;  // index into unique closed orbits, -1 when not closed
  double speed_min = 0.0, speed_max = 0.0;
};

struct SurveyResult {
  Chart chart;
  std::vector<SeedResult> seeds;
  int closed_count = 0;
  int unique_closed = 0;
  std::vector<double> periods;  // one per unique closed orbit
  double step = 0.0, s_max = 0.0, tol = 0.0;

  /// Surveys never claim that no closed orbit exists.
  std::string status() const { return closed_count > 0 ? "closed orbits found" : "none found within budget"; }

  std::map<std::string, int> period_histogram(double bin = 0.5) const {
    std::map<std::string, int> h;
    for (double p : periods) {
      const double lo = std::floor(p / bin) * bin;
      char buf[64];
      std::snprintf(buf, sizeof buf, "[%.6g,%.6g)", lo, lo + bin);
      ++h[buf];
    }
    return h;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    const int n = chart.dim();
    j["seeds"] = seeds.size();
    j["closed_count"] = closed_count;
    j["unique_closed"] = unique_closed;
    j["fraction_closed"] = seeds.empty() ? 0.0 : static_cast<double>(closed_count) / static_cast<double>(seeds.size());
    j["periods"] = periods;
    j["period_histogram"] = period_histogram();
    j["status"] = status();
    j["step"] = step;
    j["s_max"] = s_max;
    j["tol"] = tol;
    nlohmann::json w = nlohmann::json::array();
    for (const auto& s : seeds) {
      nlohmann::json e = s.closure.to_json(n);
      e["seed"] = std::vector<double>(s.seed.begin(), s.seed.begin() + n);
      e["trace_status"] = to_string(s.status);
      e["orbit_id"] = s.orbit_id;
      if (!s.error.empty()) e["error"] = s.error;
      w.push_back(e);
    }
    j["witnesses"] = w;
    return j;
  }
};

/// integrate + detect_closure per seed, then merge closed orbits whose curves lie within 2 tol.
inline SurveyResult closed_orbit_survey(const VectorField& y, const SampleGrid& seeds, double step, double s_max,
                                        double tol = 1e-5) {
  if (!(s_max > 0.0)) throw ConfigError("closed_orbit_survey: s_max must be > 0");
  const long n_steps = std::max<long>(100, static_cast<long>(std::ceil(s_max / step)));
  SurveyResult out;
  out.chart = y.chart();
  out.step = step;
  out.s_max = s_max;
  out.tol = tol;
  const std::size_t n = seeds.size();
  out.seeds.resize(n);
  std::vector<OrbitTrace> traces(n);
  parallel_for(n, [&](std::size_t i) {
    auto& r = out.seeds[i];
    r.seed = seeds.points[i];
    try {
      OrbitTrace t = integrate(y, seeds.points[i], step, n_steps);
      r.status = t.status;
      r.speed_min = t.speed_min;
      r.speed_max = t.speed_max;
      if (t.status != TraceStatus::complete) r.error = t.reason;
      if (t.samples.size() >= 100) r.closure = detect_closure(t, tol);
      if (r.closure.closed) {
        t.samples.resize(detail::period_segments(t, r.closure.period_estimate) + 1);
        traces[i] = std::move(t);
      }
    } catch (const Error& e) {
      r.status = TraceStatus::evaluation_failed;
      r.error = e.what();
    }
  });
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out.seeds[i];
    if (!r.closure.closed) continue;
    ++out.closed_count;
    for (std::size_t k = 0; k < reps.size() && r.orbit_id < 0; ++k) {
      const std::size_t j = reps[k];
      const auto& a = traces[j];
      const auto& b = traces[i];
      // cheap pretest: the seed of b must lie near the curve of a
      if (detail::point_to_curve(a, a.samples.size() - 1, b.seed) >= 2.0 * tol) continue;
      if (detail::orbit_hausdorff(a, out.seeds[j].closure.period_estimate, b, r.closure.period_estimate, 2.0 * tol) <
          2.0 * tol)
        r.orbit_id = static_cast<int>(k);
    }
    if (r.orbit_id < 0) {
      r.orbit_id = static_cast<int>(reps.size());
      reps.push_back(i);
      out.periods.push_back(r.closure.period_estimate);
    }
  }
  out.unique_closed = static_cast<int>(reps.size());
  return out;
}

struct Crossing {
  double s = 0.0;
  Point point{};     // wrapped
  int direction = 0; // sign of the normal velocity component
  double normal_speed = 0.0;
  bool tangential = false;
};

struct CrossingSequence {
  Point seed{};
  std::vector<Crossing> crossings;
  std::vector<std::string> warnings;
};

/// Crossings of the section {x_axis = value} (modulo the period on periodic axes),
/// located by linear interpolation and one secant step on the Hermite interpolant.
inline std::vector<CrossingSequence> poincare_section(const VectorField& y, int axis, double value,
                                                      const std::vector<Point>& seeds, double s_max,
                                                      double step = 1e-2) {
  const Chart& c = y.chart();
  if (axis < 0 || axis >= c.dim()) throw ConfigError("poincare_section: axis out of range");
  const long n_steps = std::max<long>(1, static_cast<long>(std::ceil(s_max / step)));
  const auto& ax = c.axis(axis);
  std::vector<CrossingSequence> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    auto& seq = out[k];
    seq.seed = seeds[k];
    const OrbitTrace tr = integrate(y, seeds[k], step, n_steps);
    if (tr.status != TraceStatus::complete) seq.warnings.push_back(tr.reason);
    auto phase = [&](double x) { return ax.is_periodic() ? (x - value) / ax.period() : x - value; };
    for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
      const double a = phase(tr.samples[i].x[axis]), b = phase(tr.samples[i + 1].x[axis]);
      double level;
      if (ax.is_periodic()) {
        const double fa = std::floor(a), fb = std::floor(b);
        if (fa == fb) continue;
        level = std::max(fa, fb);
      } else {
        if ((a < 0.0) == (b < 0.0)) continue;
        level = 0.0;
      }
      auto g = [&](double s) { return phase(tr.hermite(i, s)[axis]) - level; };
      const double s0 = tr.samples[i].s, s1 = tr.samples[i + 1].s;
      const double ga = a - level, gb = b - level;
      double sc = s0 + (s1 - s0) * ga / (ga - gb);
      const double gc = g(sc);
      // one secant step, from the bracket end on the other side of the root
      const double so = (gc < 0.0) == (ga < 0.0) ? s1 : s0;
      const double go = (gc < 0.0) == (ga < 0.0) ? gb : ga;
      if (go != gc) sc = sc - gc * (sc - so) / (gc - go);
      Crossing cr;
      cr.s = sc;
      cr.point = c.wrap(tr.hermite(i, sc));
      if (ax.is_periodic()) cr.point[axis] = value;
      const auto v = y.values(cr.point);
      cr.normal_speed = v[axis];
      cr.direction = v[axis] > 0.0 ? 1 : (v[axis] < 0.0 ? -1 : 0);
      cr.tangential = std::fabs(v[axis]) <= 1e-8;
      if (cr.tangential) seq.warnings.push_back("tangential crossing at s = " + std::to_string(sc));
      seq.crossings.push_back(cr);
    }
  });
  return out;
}

/// Orbit CSV: s, wrapped coordinates and per-axis winding counts relative to the seed.
inline void write_orbit_csv(std::ostream& os, const OrbitTrace& tr) {
  const Chart& c = tr.chart;
  const int n = c.dim();
  os << 's';
  for (int i = 0; i < n; ++i) os << ',' << c.axis(i).label;
  for (int i = 0; i < n; ++i) os << ",w_" << c.axis(i).label;
  os << '\n';
  os.precision(17);
  for (const auto& smp : tr.samples) {
    const Point w = c.wrap(smp.x);
    const auto wind = c.winding(tr.seed, smp.x);
    os << smp.s;
    for (int i = 0; i < n; ++i) os << ',' << w[i];
    for (int i = 0; i < n; ++i) os << ',' << wind[i];
    os << '\n';
  }
}

/// Crossing table: seed index, s, wrapped point, direction, normal speed, tangential flag.
inline void write_crossings_csv(std::ostream& os, const Chart& c, const std::vector<CrossingSequence>& seqs) {
  const int n = c.dim();
  os << "seed,s";
  for (int i = 0; i < n; ++i) os << ',' << c.axis(i).label;
  os << ",direction,normal_speed,tangential\n";
  os.precision(17);
  for (std::size_t k = 0; k < seqs.size(); ++k)
    for (const auto& cr : seqs[k].crossings) {
      os << k << ',' << cr.s;
      for (int i = 0; i < n; ++i) os << ',' << cr.point[i];
      os << ',' << cr.direction << ',' << cr.normal_speed << ',' << (cr.tangential ? 1 : 0) << '\n';
    }
}

}  // namespace bmk
