#pragma once

// Run configuration, check suites over catalog fields and the versioned JSON report.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bmk/catalog.hpp"
#include "bmk/field_spec.hpp"
#include "bmk/grid.hpp"
#include "bmk/orbit.hpp"
#include "bmk/parallel.hpp"
#include "bmk/reeb.hpp"
#include "bmk/verify.hpp"

namespace bmk {

inline constexpr const char* kReportSchema = "bmk-report/1";
inline constexpr const char* kVersion = "0.1.0";

inline std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Short form for human-readable labels.
inline std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct RunConfig {
  std::string command;
  std::string field = "beltrami_maxwell";
  std::vector<double> x0s{0.0};
  std::vector<std::string> checks{"all"};
  std::string grid = "8x8x8";  // NxNxN or random:N
  std::uint64_t seed = 1;
  std::string seeds;           // explicit "x,y,z;x,y,z"
  std::string seed_grid = "3x3x3";
  std::string which = "e";     // e | h | Y0 | Y1 for Maxwell fields, v | Y for Beltrami forms
  double step = 1e-2;
  double s_max = 60.0;
  double tol = 1e-5;
  std::string constants = "nondimensional";
  bool allow_degenerate = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["field"] = field;
    j["x0"] = x0s;
    j["checks"] = checks;
    j["grid"] = grid;
    j["seed"] = seed;
    j["constants"] = constants;
    j["allow_degenerate"] = allow_degenerate;
    if (command == "trace" || command == "survey" || command == "reeb") j["which"] = which;
    if (command == "trace" || command == "survey") {
      if (!seeds.empty()) j["seeds"] = seeds;
      else j["seed_grid"] = seed_grid;
      j["step"] = step;
      j["s_max"] = s_max;
      j["tol"] = tol;
    }
    return j;
  }
};

/// "8x8x8" lattice or "random:N" points on a 3D chart.
inline SampleGrid parse_grid(const std::string& spec, const Chart& chart, std::uint64_t seed) {
  if (spec.rfind("random:", 0) == 0) {
    const std::string n = spec.substr(7);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(n, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != n.size() || v < 1) throw ConfigError("grid '" + spec + "': expected random:N with N >= 1");
    return SampleGrid::random(chart, static_cast<std::size_t>(v), seed);
  }
  std::vector<int> counts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (tok.empty() || pos != tok.size()) throw ConfigError("grid '" + spec + "': expected NxNxN");
    if (v < 2) throw ConfigError("grid '" + spec + "': counts must be >= 2 per axis");
    counts.push_back(v);
  }
  if (static_cast<int>(counts.size()) != chart.dim())
    throw ConfigError("grid '" + spec + "': needs " + std::to_string(chart.dim()) + " counts");
  return SampleGrid::regular(chart, counts);
}

/// Seeds "x,y,z;x,y,z" (reals, pi multiples allowed), each inside the chart.
inline std::vector<Point> parse_seed_list(const std::string& text, const Chart& chart) {
  std::vector<Point> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) throw ConfigError("seed list: empty seed");
    const auto v = parse_real_list(tok, "seed list");
    if (static_cast<int>(v.size()) != chart.dim())
      throw ConfigError("seed list: '" + tok + "' needs " + std::to_string(chart.dim()) + " coordinates");
    Point p{};
    for (int i = 0; i < chart.dim(); ++i) p[i] = v[static_cast<std::size_t>(i)];
    chart.require_contains(p);
    out.push_back(p);
  }
  if (out.empty()) throw ConfigError("seed list is empty");
  return out;
}

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> k{"beltrami", "maxwell", "constitutive", "contact", "shs", "symplectic",
                                          "parallel", "energy", "conservation", "reeb"};
  return k;
}

inline std::vector<std::string> applicable_checks(const BuiltField& f) {
  if (std::holds_alternative<BeltramiForm>(f)) return {"beltrami", "contact", "shs", "reeb"};
  const auto& m = std::get<MaxwellFieldSet>(f);
  std::vector<std::string> c{"maxwell", "constitutive", "contact", "shs", "symplectic", "parallel", "energy"};
  if (m.beltrami) {
    c.insert(c.begin(), "beltrami");
    c.push_back("conservation");
    c.push_back("reeb");
  }
  return c;
}

/// Expands "all" and validates names against the field kind.
inline std::vector<std::string> resolve_checks(const std::vector<std::string>& requested, const BuiltField& f) {
  const auto ok = applicable_checks(f);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& c : requested) {
    if (c == "all") {
      for (const auto& a : ok)
        if (seen.insert(a).second) out.push_back(a);
      continue;
    }
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw ConfigError("unknown check '" + c + "'");
    if (std::find(ok.begin(), ok.end(), c) == ok.end())
      throw ConfigError("check '" + c + "' does not apply to this field");
    if (seen.insert(c).second) out.push_back(c);
  }
  if (out.empty()) throw ConfigError("no checks selected");
  return out;
}

inline const Chart& spatial_chart(const BuiltField& f) {
  if (std::holds_alternative<BeltramiForm>(f)) return std::get<BeltramiForm>(f).chart;
  return std::get<MaxwellFieldSet>(f).g3.chart();
}

inline std::string field_name(const BuiltField& f) {
  return std::visit([](const auto& x) { return x.name; }, f);
}

inline std::string field_identity(const BuiltField& f) {
  return std::visit([](const auto& x) { return x.identity; }, f);
}

inline std::string topology_note(const Chart& c) {
  if (c.name() == "T3") return "T3 is a T2-bundle over S1";
  if (c.name() == "R3") return "non-compact chart: no periodic axes";
  if (c.name() == "D2xS1") return "solid torus with boundary r = a";
  return "";
}

namespace detail {

inline std::string at_instant(const std::string& what, double x0) { return what + " @ x0=" + fmt_short(x0); }

/// Runs f and turns a degenerate instant into a recorded failure when allowed.
template <class F>
void run_guarded(std::vector<CheckReport>& out, const RunConfig& cfg, const std::string& check,
                 const std::string& subject, F&& f) {
  try {
    f();
  } catch (const DegeneratePoint& e) {
    if (!cfg.allow_degenerate) throw;
    CheckReport r;
    r.check = check;
    r.subject = subject;
    r.forced_fail = true;
    r.max_residual = std::numeric_limits<double>::quiet_NaN();
    r.notes.push_back(std::string("degenerate: ") + e.what());
    r.decide();
    out.push_back(std::move(r));
  }
}

inline void beltrami_suite(const BeltramiForm& v, const std::vector<std::string>& checks, const SampleGrid& g,
                           const RunConfig& cfg, std::vector<CheckReport>& out) {
  for (const auto& c : checks) {
    if (c == "beltrami") {
      out.push_back(beltrami_residual(v, g));
    } else if (c == "contact") {
      auto r = contact_margin(v.form, g);
      r.subject = "v";
      out.push_back(std::move(r));
    } else if (c == "shs") {
      auto r = shs_check(hodge_star(v.metric, v.form), v.form, g);
      r.subject = "(*3 v, v)";
      out.push_back(std::move(r));
    } else if (c == "reeb") {
      run_guarded(out, cfg, "reeb_contracts", "Y", [&] {
        if (v.singular) throw DegeneratePoint(v.name + " vanishes on its sample grid");
        const auto cf = reeb_closed_form_beltrami(v, ReebVariant::normalized);
        auto r = reeb_contracts(reeb_field(cf.pair), cf.pair, g);
        r.subject = "Y";
        const auto Ys = reeb_field(cf.pair);
        const auto d = map_grid<double>(g, [&](const Point& p) {
          const auto a = Ys.values(p), b = cf.Y.values(p);
          double m = 0.0;
          for (int i = 0; i < 3; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
          return m;
        });
        const auto e = arg_max(d);
        r.values["max_shs_minus_closed_form"] = e.value;
        r.max_residual = std::max(r.max_residual, e.value);
        r.decide();
        out.push_back(std::move(r));
      });
    }
  }
}

inline void maxwell_suite(const MaxwellFieldSet& m, const std::vector<std::string>& checks, const SampleGrid& g3,
                          const RunConfig& cfg, std::vector<CheckReport>& out) {
  const auto g4 = SampleGrid::spacetime(g3, cfg.x0s);
  for (const auto& c : checks) {
    if (c == "beltrami") {
      out.push_back(beltrami_residual(*m.beltrami, g3));
    } else if (c == "maxwell") {
      out.push_back(maxwell_residuals(m, g4));
    } else if (c == "constitutive") {
      out.push_back(constitutive_residuals(m, g4));
    } else if (c == "parallel") {
      out.push_back(parallel_check(m, g4));
    } else if (c == "energy") {
      out.push_back(energy_check(m, g4));
    } else {
      for (double x0 : cfg.x0s) {
        const auto gi = SampleGrid::spacetime(g3, {x0});
        if (c == "contact") {
          for (const auto& [nm, f] : {std::pair{"e", m.e}, std::pair{"h", m.h}}) {
            auto r = contact_margin(slice(f, x0), g3);
            r.subject = at_instant(nm, x0);
            out.push_back(std::move(r));
          }
        } else if (c == "shs") {
          for (const auto& [nm, om, la] : {std::tuple{"(B,e)", m.B, m.e}, std::tuple{"(D,h)", m.D, m.h}}) {
            auto r = shs_check(slice(om, x0), slice(la, x0), g3);
            r.subject = at_instant(nm, x0);
            out.push_back(std::move(r));
          }
        } else if (c == "symplectic") {
          for (auto w : {WhichF::F0, WhichF::F1}) {
            auto r = symplectic_margin(m, w, gi);
            r.subject = at_instant(r.subject, x0);
            out.push_back(std::move(r));
          }
        } else if (c == "conservation" || c == "reeb") {
          for (auto w : {WhichReeb::Y0, WhichReeb::Y1}) {
            const std::string nm = w == WhichReeb::Y0 ? "Y0" : "Y1";
            run_guarded(out, cfg, c == "reeb" ? "reeb_contracts" : "conservation_along", at_instant(nm, x0), [&] {
              const auto R = reeb_for_maxwell(m, w, x0);
              CheckReport r;
              if (c == "reeb") {
                r = reeb_contracts(R.field.Y, R.field.pair, g3);
              } else {
                const auto en = energy_forms(m);
                r = conservation_along(R.field.Y,
                                       {{w == WhichReeb::Y0 ? "e" : "h", R.field.pair.lambda},
                                        {w == WhichReeb::Y0 ? "B" : "D", R.field.pair.omega},
                                        {"energy_e", slice(en.electric, x0)},
                                        {"energy_h", slice(en.magnetic, x0)}},
                                       g3);
              }
              r.subject = at_instant(nm, x0);
              out.push_back(std::move(r));
            });
          }
        }
      }
    }
  }
}

}  // namespace detail

inline std::vector<CheckReport> run_checks(const BuiltField& f, const std::vector<std::string>& checks,
                                           const RunConfig& cfg) {
  const auto g3 = parse_grid(cfg.grid, spatial_chart(f), cfg.seed);
  std::vector<CheckReport> out;
  if (std::holds_alternative<BeltramiForm>(f))
    detail::beltrami_suite(std::get<BeltramiForm>(f), checks, g3, cfg, out);
  else
    detail::maxwell_suite(std::get<MaxwellFieldSet>(f), checks, g3, cfg, out);
  return out;
}

/// The vector field whose lines are traced: metric duals or Reeb fields at the first instant.
inline VectorField traced_field(const BuiltField& f, const RunConfig& cfg) {
  if (std::holds_alternative<BeltramiForm>(f)) {
    const auto& v = std::get<BeltramiForm>(f);
    if (cfg.which == "v") return metric_sharp(v.metric, v.form);
    if (cfg.which == "Y") return reeb_closed_form_beltrami(v, ReebVariant::normalized).Y;
    throw ConfigError("--which for a Beltrami form must be v or Y");
  }
  const auto& m = std::get<MaxwellFieldSet>(f);
  const double x0 = cfg.x0s.front();
  if (cfg.which == "e") return metric_sharp(m.g3, slice(m.e, x0));
  if (cfg.which == "h") return metric_sharp(m.g3, slice(m.h, x0));
  if (cfg.which == "Y0" || cfg.which == "Y1") {
    const auto w = cfg.which == "Y0" ? WhichReeb::Y0 : WhichReeb::Y1;
    if (!cfg.allow_degenerate) require_nondegenerate_instant(m, w, x0);
    return reeb_for_maxwell(m, w, x0).field.Y;
  }
  throw ConfigError("--which for a Maxwell field must be e, h, Y0 or Y1");
}

inline SampleGrid seed_grid(const BuiltField& f, const RunConfig& cfg) {
  const Chart& c = spatial_chart(f);
  if (!cfg.seeds.empty()) {
    SampleGrid g;
    g.chart = c;
    g.kind = "list";
    g.points = parse_seed_list(cfg.seeds, c);
    g.counts = {static_cast<int>(g.points.size())};
    return g;
  }
  return parse_grid(cfg.seed_grid, c, cfg.seed);
}

struct RunReport {
  RunConfig config;
  std::string field_spec;
  nlohmann::json field;
  std::vector<CheckReport> checks;
  std::optional<nlohmann::json> orbits;
  std::optional<nlohmann::json> extra;
  double elapsed_ms = 0.0;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  nlohmann::json to_json(bool with_meta = true) const {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["command"] = config.command;
    j["config"] = config.to_json();
    j["field"] = field;
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) cs.push_back(c.to_json());
    j["checks"] = cs;
    if (orbits) j["orbits"] = *orbits;
    if (extra) j["reeb"] = *extra;
    int failed = 0;
    for (const auto& c : checks) failed += c.pass ? 0 : 1;
    j["summary"] = {{"checks_run", checks.size()}, {"checks_failed", failed}, {"pass", failed == 0}};
    if (orbits) {
      j["summary"]["closed_count"] = (*orbits)["closed_count"];
      j["summary"]["orbit_status"] = (*orbits)["status"];
    }
    if (with_meta) {
      j["meta"] = {{"version", kVersion}, {"threads", worker_count()}, {"elapsed_ms", elapsed_ms}};
    }
    return j;
  }
};

inline nlohmann::json describe_field(const FieldSpec& spec, const BuiltField& f) {
  const Chart& c = spatial_chart(f);
  nlohmann::json j{{"name", field_name(f)},
                   {"spec", spec.str()},
                   {"identity", field_identity(f)},
                   {"kind", std::holds_alternative<BeltramiForm>(f) ? "beltrami" : "maxwell"},
                   {"chart", std::holds_alternative<BeltramiForm>(f) ? c.name() : c.name() + "xR"},
                   {"topology_note", topology_note(c)}};
  if (std::holds_alternative<BeltramiForm>(f)) {
    const auto& b = std::get<BeltramiForm>(f);
    j["k"] = b.k_expected;
    j["singular"] = b.singular;
  } else {
    const auto& m = std::get<MaxwellFieldSet>(f);
    j["constants"] = {{"preset", m.constants.preset}, {"eps0", m.constants.eps0}, {"mu0", m.constants.mu0}};
    if (m.beltrami) j["k"] = m.k;
  }
  return j;
}

/// One human-readable line per check.
inline std::string summary_line(const CheckReport& r) {
  std::string s = (r.pass ? "PASS " : "FAIL ") + r.check;
  if (!r.subject.empty()) s += " [" + r.subject + "]";
  s += " residual=" + fmt_short(r.max_residual);
  if (r.normalized_margin) s += " margin=" + fmt_short(*r.normalized_margin);
  for (const auto& n : r.notes) s += " (" + n + ")";
  return s;
}

}  // namespace bmk
