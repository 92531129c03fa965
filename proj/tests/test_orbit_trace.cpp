#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bmk/bmk.hpp"

using namespace bmk;

namespace {

constexpr double kPi = std::numbers::pi;

VectorField circular() {
  return VectorField::analytic(Chart::euclidean3(), [](auto s, const Point& p) {
    using S = decltype(s);
    Vec<S> r{};
    r[0] = -coord<S>(p, 1);
    r[1] = coord<S>(p, 0);
    return r;
  });
}

VectorField z1() {
  return VectorField::analytic(Chart::torus3(), [](auto s, const Point& p) {
    using S = decltype(s);
    Vec<S> r{};
    const S x3 = coord<S>(p, 2);
    r[0] = bmk::cos(x3);
    r[1] = bmk::sin(x3);
    return r;
  });
}

VectorField abc110() {
  const auto v = abc_flow(1.0, 1.0, 0.0);
  return metric_sharp(v.metric, v.form);
}

SampleGrid seed_list(const Chart& c, std::vector<Point> pts) {
  SampleGrid g;
  g.chart = c;
  g.kind = "list";
  g.counts = {static_cast<int>(pts.size())};
  g.points = std::move(pts);
  return g;
}

double end_error_circle(double h, double S) {
  const auto tr = integrate(circular(), {1.0, 0.0, 0.0, 0}, h, std::lround(S / h));
  const auto& x = tr.samples.back().x;
  return std::hypot(x[0] - std::cos(S), x[1] - std::sin(S));
}

std::vector<std::vector<double>> read_csv_numbers(std::istream& is, std::string& header) {
  std::getline(is, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(is, line);) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Integrate, ConstantFieldIsExactlyLinear) {
  const double e0 = 1.7;
  const auto tr = integrate(VectorField::constant(Chart::euclidean3(), {e0, 0, 0, 0}), {0, 0, 0, 0}, 0.01, 500);
  ASSERT_EQ(tr.samples.size(), 501u);
  EXPECT_EQ(tr.status, TraceStatus::complete);
  for (const auto& s : tr.samples) {
    EXPECT_NEAR(s.x[0], e0 * s.s, 1e-12);
    EXPECT_EQ(s.x[1], 0.0);
  }
  EXPECT_NEAR(tr.speed_min, e0, 1e-15);
  EXPECT_NEAR(tr.speed_max, e0, 1e-15);
}

TEST(Integrate, FrozenDirectionWindsOnce) {
  const long n = 1000;
  const auto tr = integrate(z1(), {0, 0, 0, 0}, 2.0 * kPi / n, n);
  EXPECT_EQ(tr.winding[0], 1);
  EXPECT_EQ(tr.winding[1], 0);
  EXPECT_EQ(tr.winding[2], 0);
  EXPECT_NEAR(tr.samples.back().x[0], 2.0 * kPi, 1e-12);
  EXPECT_NEAR(tr.wrapped(500)[0], kPi, 1e-12);
}

TEST(Integrate, CircularRadiusDrift) {
  const double h = 1e-3;
  const long n = std::lround(2.0 * kPi / h);
  const auto tr = integrate(circular(), {1.0, 0.0, 0.0, 0}, h, n);
  double drift = 0.0;
  for (const auto& s : tr.samples) drift = std::max(drift, std::fabs(std::hypot(s.x[0], s.x[1]) - 1.0));
  EXPECT_LT(drift, 1e-8);
}

TEST(Integrate, StepHalvingMatchesFourthOrder) {
  for (double h : {0.2, 0.1}) {
    const double ratio = end_error_circle(h, 4.0) / end_error_circle(h / 2.0, 4.0);
    EXPECT_GE(ratio, 12.0) << h;
    EXPECT_LE(ratio, 20.0) << h;
  }
}

TEST(Integrate, ForwardBackwardReversibility) {
  const auto m = beltrami_maxwell(t3_mode(1, 1.0), 1.0);
  const std::vector<std::pair<VectorField, Point>> cases{
      {circular(), {0.3, -0.8, 0.1, 0}},
      {reeb_for_maxwell(m, WhichReeb::Y0, kPi / 4.0).field.Y, {0.5, 1.0, 0.7, 0}},
      {abc110(), {0.3, 0.2, 0.1, 0}},
      {reeb_closed_form_beltrami(abc_flow(1.0, 0.6, 0.3), ReebVariant::normalized).Y, {1.0, 2.0, 3.0, 0}}};
  for (const auto& [y, seed] : cases) {
    const long n = 2000;
    const auto fw = integrate(y, seed, 1e-3, n);
    const auto bw = integrate(scale(-1.0, y), fw.wrapped(fw.samples.size() - 1), 1e-3, n);
    EXPECT_LT(y.chart().distance(bw.wrapped(bw.samples.size() - 1), seed), 1e-8);
  }
}

TEST(Integrate, HermiteInterpolation) {
  const auto tr = integrate(circular(), {1.0, 0.0, 0.0, 0}, 1e-2, 300);
  for (double s : {0.005, 0.777, 2.345, 2.999}) {
    const auto p = tr.position_at(s);
    EXPECT_NEAR(p[0], std::cos(s), 1e-8);
    EXPECT_NEAR(p[1], std::sin(s), 1e-8);
  }
}

TEST(Integrate, TerminatesOnDomainExit) {
  const Chart c = Chart::solid_torus(1.0, 0.01);
  const auto tr = integrate(VectorField::constant(c, {1.0, 0, 0, 0}), {0.5, 0, 0, 0}, 0.01, 1000);
  EXPECT_EQ(tr.status, TraceStatus::left_domain);
  EXPECT_FALSE(tr.reason.empty());
  EXPECT_LT(tr.samples.size(), 60u);
  for (const auto& s : tr.samples) EXPECT_LE(s.x[0], 1.0);
}

TEST(Integrate, TerminatesOnEvaluationFailure) {
  const auto y = VectorField::numeric(Chart::euclidean3(), [](const Point& p) -> Vec<double> {
    if (p[0] > 0.25) throw DegeneratePoint("test field undefined past x1 = 0.25");
    return {1.0, 0, 0, 0};
  });
  const auto tr = integrate(y, {0, 0, 0, 0}, 0.01, 100);
  EXPECT_EQ(tr.status, TraceStatus::evaluation_failed);
  EXPECT_NE(tr.reason.find("0.25"), std::string::npos);
  EXPECT_THROW(integrate(y, {0, 0, 0, 0}, 0.0, 10), ConfigError);
  EXPECT_THROW(integrate(y, {0, 0, 0, 0}, 0.1, 0), ConfigError);
}

TEST(Closure, AxisAlignedTorusFields) {
  for (auto [v, period, w] : {std::tuple{Vec<double>{1, 0, 0, 0}, 2.0 * kPi, std::array<int, 3>{1, 0, 0}},
                              std::tuple{Vec<double>{0, 2, 0, 0}, kPi, std::array<int, 3>{0, 1, 0}},
                              std::tuple{Vec<double>{0, 0, -0.5, 0}, 4.0 * kPi, std::array<int, 3>{0, 0, -1}}}) {
    const auto tr = integrate(VectorField::constant(Chart::torus3(), v), {0.4, 0.2, 1.0, 0}, 1e-2, 2000);
    const auto c = detect_closure(tr, 1e-5);
    ASSERT_TRUE(c.closed);
    EXPECT_NEAR(c.period_estimate, period, 1e-6);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(c.winding[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)]);
    EXPECT_LT(c.return_distance, 1e-5);
  }
}

TEST(Closure, IncommensurateSlopeNotClosed) {
  const double r2 = std::sqrt(2.0);
  // brute-force oracle: the exact line never comes within 1e-4 of the seed for s in (0.1, 200]
  double best = 1e9;
  for (double s = 0.1; s <= 200.0; s += 1e-4) {
    auto md = [](double x) { return std::fabs(std::remainder(x, 2.0 * kPi)); };
    best = std::min(best, std::max(md(s), md(r2 * s)));
  }
  ASSERT_GT(best, 1e-2);
  const auto tr = integrate(VectorField::constant(Chart::torus3(), {1, r2, 0, 0}), {0, 0, 0, 0}, 1e-2, 20000);
  const auto c = detect_closure(tr, 1e-4);
  EXPECT_FALSE(c.closed);
  EXPECT_GT(c.return_distance, 1e-4);
}

TEST(Closure, EuclideanLinesNeverClose) {
  const auto tr = integrate(VectorField::constant(Chart::euclidean3(), {1, 0.5, 0, 0}), {0, 0, 0, 0}, 1e-2, 5000);
  EXPECT_FALSE(detect_closure(tr).closed);
  const auto circle = integrate(circular(), {1, 0, 0, 0}, 1e-2, 1000);
  const auto cc = detect_closure(circle);
  EXPECT_TRUE(cc.closed);
  EXPECT_NEAR(cc.period_estimate, 2.0 * kPi, 1e-6);
}

TEST(Closure, NeedsEnoughSamples) {
  const auto tr = integrate(z1(), {0, 0, 0, 0}, 0.1, 50);
  EXPECT_THROW(detect_closure(tr), ConfigError);
}

TEST(Closure, StagnationSeedIsNotAnOrbit) {
  // ABC(1,1,0) vanishes at (pi/2, x2, pi)
  const Point still{kPi / 2.0, 0.0, kPi, 0};
  const auto v = abc110().values(still);
  ASSERT_LT(std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])}), 1e-15);
  const auto c = detect_closure(integrate(abc110(), still, 1e-2, 2000));
  EXPECT_FALSE(c.closed);
  EXPECT_EQ(c.method, "stationary");
  const auto sv = closed_orbit_survey(abc110(), seed_list(Chart::torus3(), {still}), 1e-2, 20.0);
  EXPECT_EQ(sv.closed_count, 0);
  EXPECT_EQ(sv.status(), "none found within budget");
}

TEST(Survey, MaxwellReebOrbitsAtRationalSlopes) {
  // Y0 = v / e0 at x0 = 0 has speed 1/e0: axis-aligned periods 2 pi e0
  const double e0 = 2.0;
  const auto m = beltrami_maxwell(t3_mode(1, 1.0), e0);
  const auto y0 = reeb_for_maxwell(m, WhichReeb::Y0, 0.0).field.Y;
  const auto seeds = seed_list(Chart::torus3(), {{0.5, 0.5, 0.0, 0}, {0.5, 0.5, kPi / 2.0, 0}, {0.5, 0.5, kPi, 0}});
  const auto sv = closed_orbit_survey(y0, seeds, 1e-2, 30.0, 1e-5);
  EXPECT_EQ(sv.closed_count, 3);
  EXPECT_EQ(sv.unique_closed, 3);
  for (const auto& s : sv.seeds) EXPECT_NEAR(s.closure.period_estimate, 2.0 * kPi * e0, 1e-4);

  const auto ye = metric_sharp(m.g3, slice(m.e, 0.0));
  const auto sl = closed_orbit_survey(
      ye, seed_list(Chart::torus3(), {{0, 0, std::atan(0.5), 0}, {0, 0, std::atan(std::sqrt(2.0)), 0}}), 1e-2, 60.0,
      1e-5);
  ASSERT_TRUE(sl.seeds[0].closure.closed);
  EXPECT_NEAR(sl.seeds[0].closure.period_estimate, 2.0 * kPi * std::sqrt(5.0) / e0, 1e-4);
  EXPECT_EQ(sl.seeds[0].closure.winding[0], 2);
  EXPECT_EQ(sl.seeds[0].closure.winding[1], 1);
  EXPECT_EQ(sl.seeds[0].closure.winding[2], 0);
  EXPECT_FALSE(sl.seeds[1].closure.closed);
  EXPECT_EQ(sl.seeds[1].orbit_id, -1);
}

TEST(Survey, DeduplicatesSeedsOnOneOrbit) {
  const auto y = VectorField::constant(Chart::torus3(), {1, 0, 0, 0});
  const auto sv = closed_orbit_survey(
      y, seed_list(Chart::torus3(), {{0, 1, 1, 0}, {2, 1, 1, 0}, {4, 1, 1, 0}, {0, 2, 1, 0}}), 1e-2, 10.0, 1e-5);
  EXPECT_EQ(sv.closed_count, 4);
  EXPECT_EQ(sv.unique_closed, 2);
  EXPECT_EQ(sv.seeds[0].orbit_id, sv.seeds[2].orbit_id);
  EXPECT_NE(sv.seeds[0].orbit_id, sv.seeds[3].orbit_id);
  ASSERT_EQ(sv.periods.size(), 2u);
  EXPECT_EQ(sv.status(), "closed orbits found");
  const auto j = sv.to_json();
  for (const char* k : {"seeds", "closed_count", "unique_closed", "fraction_closed", "periods", "period_histogram",
                        "status", "witnesses"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_DOUBLE_EQ(j["fraction_closed"].get<double>(), 1.0);
  EXPECT_EQ(j["witnesses"].size(), 4u);
}

TEST(Survey, NothingOnEuclideanLines) {
  const auto y = VectorField::constant(Chart::euclidean3(), {1, 0, 0, 0});
  const auto sv = closed_orbit_survey(y, SampleGrid::regular(Chart::euclidean3(), {2, 2, 2}), 1e-2, 20.0);
  EXPECT_EQ(sv.closed_count, 0);
  EXPECT_EQ(sv.status(), "none found within budget");
}

TEST(Poincare, VerticalFieldCrossesAtFixedPoint) {
  const auto y = VectorField::constant(Chart::torus3(), {0, 0, 1, 0});
  const auto seqs = poincare_section(y, 2, 0.0, {{0.3, 1.2, 0.5, 0}}, 30.0);
  ASSERT_EQ(seqs.size(), 1u);
  const auto& cr = seqs[0].crossings;
  ASSERT_EQ(cr.size(), 4u);
  for (std::size_t i = 0; i < cr.size(); ++i) {
    EXPECT_NEAR(cr[i].s, 2.0 * kPi * static_cast<double>(i + 1) - 0.5, 1e-10);
    EXPECT_NEAR(cr[i].point[0], 0.3, 1e-12);
    EXPECT_NEAR(cr[i].point[1], 1.2, 1e-12);
    EXPECT_EQ(cr[i].direction, 1);
    EXPECT_FALSE(cr[i].tangential);
  }
  EXPECT_TRUE(seqs[0].warnings.empty());
}

TEST(Poincare, FrozenLevelHasNoCrossings) {
  const auto seqs = poincare_section(z1(), 2, kPi / 4.0, {{0, 0, 0, 0}}, 20.0);
  EXPECT_TRUE(seqs[0].crossings.empty());
  EXPECT_THROW(poincare_section(z1(), 3, 0.0, {{0, 0, 0, 0}}, 1.0), ConfigError);
}

TEST(Poincare, AbcOnLevelSetsAndGolden) {
  // sin x1 + cos x3 is conserved by the (1,1,0) flow, so crossings of x3 = pi/2 keep sin x1
  // (0.3, 0, 0) has H > 1 and never reaches the section
  const std::vector<Point> seeds{{0.3, 0.0, 1.2, 0}, {1.0, 0.5, 2.0, 0}, {4.0, 3.0, 1.3, 0}, {2.5, 1.0, 1.9, 0},
                                 {0.3, 0.0, 0.0, 0}};
  const auto seqs = poincare_section(abc110(), 2, kPi / 2.0, seeds, 60.0, 1e-2);
  EXPECT_TRUE(seqs.back().crossings.empty());
  for (std::size_t k = 0; k + 1 < seeds.size(); ++k) {
    const double H = std::sin(seeds[k][0]) + std::cos(seeds[k][2]);
    ASSERT_GE(seqs[k].crossings.size(), 2u) << k;
    for (const auto& c : seqs[k].crossings) EXPECT_NEAR(std::sin(c.point[0]), H, 1e-7) << k;
  }
  std::ostringstream os;
  write_crossings_csv(os, Chart::torus3(), seqs);
  const std::string path = std::string(BMK_TEST_DATA) + "/abc110_section.csv";
  if (std::getenv("BMK_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << os.str();
    GTEST_SKIP() << "golden file rewritten";
  }
  std::ifstream f(path);
  ASSERT_TRUE(f) << path;
  std::string h_gold, h_now;
  const auto gold = read_csv_numbers(f, h_gold);
  std::istringstream now_s(os.str());
  const auto now = read_csv_numbers(now_s, h_now);
  EXPECT_EQ(h_now, h_gold);
  ASSERT_EQ(now.size(), gold.size());
  for (std::size_t i = 0; i < now.size(); ++i) {
    ASSERT_EQ(now[i].size(), gold[i].size());
    for (std::size_t j = 0; j < now[i].size(); ++j) EXPECT_NEAR(now[i][j], gold[i][j], 1e-9) << i << "," << j;
  }
}

TEST(Invariants, ReebOrbitsOfT3Modes) {
  const auto m = beltrami_maxwell(t3_mode(2, 1.5), 1.0);
  const double x0 = 0.3;
  const auto y0 = reeb_for_maxwell(m, WhichReeb::Y0, x0).field.Y;
  const auto e = slice(m.e, x0);
  const auto n2 = norm_sq_form(m.g3, e);
  for (const Point& seed : {Point{0.1, 0.2, 0.3, 0}, Point{5.0, 1.0, 2.2, 0}}) {
    const auto tr = integrate(y0, seed, 1e-2, 3000);
    const double ref = n2.values(seed)[0];
    double drift = 0.0, dx3 = 0.0;
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      drift = std::max(drift, std::fabs(n2.values(tr.wrapped(i))[0] - ref));
      dx3 = std::max(dx3, std::fabs(tr.samples[i].x[2] - seed[2]));
    }
    EXPECT_LT(drift, 1e-8);
    EXPECT_LT(dx3, 1e-10);
  }
}

TEST(OrbitCsv, ColumnsAndWinding) {
  const auto tr = integrate(z1(), {0, 0, 0, 0}, 2.0 * kPi / 200, 200);
  std::ostringstream os;
  write_orbit_csv(os, tr);
  std::istringstream is(os.str());
  std::string header;
  const auto rows = read_csv_numbers(is, header);
  EXPECT_EQ(header, "s,x1,x2,x3,w_x1,w_x2,w_x3");
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows.back()[4], 1.0);
  EXPECT_EQ(rows.front()[4], 0.0);
  EXPECT_LT(rows.back()[1], 1e-9 + 2.0 * kPi);
}
