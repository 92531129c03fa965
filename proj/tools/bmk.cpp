// bmk: build catalog fields, run structure checks and field-line surveys, emit JSON/CSV.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bmk/bmk.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Outputs {
  std::string out;
  std::string csv;
  bool stdout_json = false;
  bool no_meta = false;
};

void emit(const bmk::RunReport& rep, const Outputs& o) {
  const auto j = rep.to_json(!o.no_meta);
  const std::string text = j.dump(2) + "\n";
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw bmk::ConfigError("cannot write " + o.out);
    f << text;
  }
  if (o.stdout_json) std::cout << text;
}

struct Built {
  bmk::FieldSpec spec;
  bmk::BuiltField field;
};

Built build_field(const bmk::RunConfig& cfg) {
  const auto cst = bmk::Constants::from_name(cfg.constants);
  auto spec = bmk::parse_field_spec(cfg.field);
  auto f = bmk::Catalog::builtin().build(spec, cst);
  if (cfg.x0s.empty()) throw bmk::ConfigError("--x0 needs at least one instant");
  return {std::move(spec), std::move(f)};
}

int finish(bmk::RunReport& rep, const Outputs& o, std::chrono::steady_clock::time_point t0) {
  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : rep.checks) std::cerr << bmk::summary_line(c) << '\n';
  emit(rep, o);
  const bool ok = rep.all_pass();
  std::cerr << (ok ? "all checks passed" : "some checks failed") << " (" << rep.checks.size() << " run)\n";
  return ok ? 0 : kExitFail;
}

int cmd_catalog(const Outputs& o) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : bmk::Catalog::builtin().entries()) {
    std::cerr << e.name << "  [" << (e.kind == bmk::FieldKind::beltrami ? "beltrami" : "maxwell") << ", " << e.chart
              << "]\n    " << e.identity << "\n    " << e.summary << "\n    params:";
    nlohmann::json ps = nlohmann::json::array();
    for (const auto& p : e.params) {
      std::cerr << ' ' << p.name << '=' << p.default_value;
      ps.push_back({{"name", p.name}, {"default", p.default_value}, {"help", p.help}});
    }
    std::cerr << "\n";
    j.push_back({{"name", e.name}, {"identity", e.identity}, {"chart", e.chart}, {"params", ps}});
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw bmk::ConfigError("cannot write " + o.out);
    f << j.dump(2) << "\n";
  }
  if (o.stdout_json) std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(bmk::RunConfig cfg, const Outputs& o) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.command = "verify";
  const auto b = build_field(cfg);
  const auto checks = bmk::resolve_checks(cfg.checks, b.field);
  bmk::RunReport rep;
  rep.config = cfg;
  rep.field = bmk::describe_field(b.spec, b.field);
  rep.checks = bmk::run_checks(b.field, checks, cfg);
  return finish(rep, o, t0);
}

int cmd_reeb(bmk::RunConfig cfg, const Outputs& o) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.command = "reeb";
  const auto b = build_field(cfg);
  bmk::RunReport rep;
  rep.config = cfg;
  rep.field = bmk::describe_field(b.spec, b.field);
  rep.checks = bmk::run_checks(b.field, {"reeb"}, cfg);
  if (!o.csv.empty()) {
    const auto g = bmk::parse_grid(cfg.grid, bmk::spatial_chart(b.field), cfg.seed);
    std::ofstream f(o.csv, std::ios::binary);
    if (!f) throw bmk::ConfigError("cannot write " + o.csv);
    auto c = cfg;
    if (std::holds_alternative<bmk::MaxwellFieldSet>(b.field) && c.which != "Y0" && c.which != "Y1") c.which = "Y0";
    if (std::holds_alternative<bmk::BeltramiForm>(b.field)) c.which = "Y";
    bmk::write_vector_csv(f, bmk::traced_field(b.field, c), g);
  }
  return finish(rep, o, t0);
}

int cmd_orbits(bmk::RunConfig cfg, const Outputs& o, const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.command = name;
  if (!(cfg.step > 0.0) || !(cfg.s_max > 0.0) || !(cfg.tol > 0.0))
    throw bmk::ConfigError("--step, --s-max and --tol must be positive");
  const auto b = build_field(cfg);
  if (std::holds_alternative<bmk::BeltramiForm>(b.field) && cfg.which == "e") cfg.which = "v";
  const auto seeds = bmk::seed_grid(b.field, cfg);
  const auto y = bmk::traced_field(b.field, cfg);
  const auto sv = bmk::closed_orbit_survey(y, seeds, cfg.step, cfg.s_max, cfg.tol);
  bmk::RunReport rep;
  rep.config = cfg;
  rep.field = bmk::describe_field(b.spec, b.field);
  rep.orbits = sv.to_json();
  (*rep.orbits)["field_line"] = cfg.which;
  if (name == "trace" && !o.csv.empty()) {
    std::filesystem::create_directories(o.csv);
    const long n = static_cast<long>(std::ceil(cfg.s_max / cfg.step));
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto tr = bmk::integrate(y, seeds.points[i], cfg.step, n);
      std::ofstream f(std::filesystem::path(o.csv) / ("orbit_" + std::to_string(i) + ".csv"), std::ios::binary);
      bmk::write_orbit_csv(f, tr);
    }
  }
  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << name << ": " << sv.closed_count << " of " << seeds.size() << " seeds closed, " << sv.unique_closed
            << " distinct orbits; " << sv.status() << "\n";
  for (std::size_t i = 0; i < sv.periods.size(); ++i)
    std::cerr << "  orbit " << i << ": period " << bmk::fmt_short(sv.periods[i]) << "\n";
  emit(rep, o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beltrami-Maxwell field toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML run configuration (flags override)");

  bmk::RunConfig cfg;
  Outputs out;
  std::string x0_text = "0";
  std::string checks_text = "all";

  auto common = [&](CLI::App* s, bool with_grid) {
    s->add_option("--field", cfg.field, "field spec, e.g. beltrami_maxwell{v=t3_mode{n=1,c=1},e0=1}");
    s->add_option("--x0", x0_text, "comma-separated instants (pi multiples allowed)");
    s->add_option("--constants", cfg.constants, "nondimensional | SI");
    s->add_flag("--allow-degenerate", cfg.allow_degenerate, "record degenerate instants as failures instead of erroring");
    if (with_grid) {
      s->add_option("--grid", cfg.grid, "spatial sample grid: NxNxN or random:N");
      s->add_option("--seed", cfg.seed, "random grid seed");
    }
    s->add_option("--out", out.out, "JSON report path");
    s->add_flag("--stdout-json", out.stdout_json, "print the JSON report on stdout");
    s->add_flag("--no-meta", out.no_meta, "omit version and timing metadata");
  };

  auto* catalog = app.add_subcommand("catalog", "list catalog entries");
  catalog->add_option("--out", out.out, "JSON listing path");
  catalog->add_flag("--stdout-json", out.stdout_json, "print the JSON listing on stdout");

  auto* verify = app.add_subcommand("verify", "run structure checks");
  common(verify, true);
  verify->add_option("--checks", checks_text, "comma-separated checks or all");

  auto* reeb = app.add_subcommand("reeb", "Reeb fields and their defining contracts");
  common(reeb, true);
  reeb->add_option("--csv", out.csv, "component table on the grid");
  reeb->add_option("--which", cfg.which, "Y0 | Y1 (Maxwell) for the CSV");

  auto orbit_opts = [&](CLI::App* s) {
    common(s, false);
    s->add_option("--seeds", cfg.seeds, "explicit seeds x,y,z;x,y,z");
    s->add_option("--seed-grid", cfg.seed_grid, "seed lattice NxNxN (used without --seeds)");
    s->add_option("--which", cfg.which, "e | h | Y0 | Y1 for Maxwell fields, v | Y for Beltrami forms");
    s->add_option("--step", cfg.step, "RK4 step");
    s->add_option("--s-max", cfg.s_max, "parameter length per seed");
    s->add_option("--tol", cfg.tol, "closure tolerance");
  };
  auto* trace = app.add_subcommand("trace", "trace field lines and write orbit CSVs");
  orbit_opts(trace);
  trace->add_option("--csv", out.csv, "directory for orbit CSVs");
  auto* survey = app.add_subcommand("survey", "closed-orbit survey over a seed lattice");
  orbit_opts(survey);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    cfg.x0s = bmk::parse_real_list(x0_text, "--x0");
    cfg.checks.clear();
    std::stringstream ss(checks_text);
    for (std::string c; std::getline(ss, c, ',');)
      if (!c.empty()) cfg.checks.push_back(c);
    if (*catalog) return cmd_catalog(out);
    if (*verify) return cmd_verify(cfg, out);
    if (*reeb) return cmd_reeb(cfg, out);
    if (*trace) return cmd_orbits(cfg, out, "trace");
    return cmd_orbits(cfg, out, "survey");
  } catch (const bmk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bmk::DegeneratePoint& e) {
    std::cerr << "degenerate: " << e.what() << " (use --allow-degenerate)\n";
    return kExitConfig;
  } catch (const bmk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
