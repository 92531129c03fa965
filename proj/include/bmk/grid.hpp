#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bmk/chart.hpp"
#include "bmk/errors.hpp"

namespace bmk {

/// Finite set of chart points on which "everywhere" conditions are sampled.
struct SampleGrid {
  Chart chart;
  std::vector<Point> points;
  std::vector<int> counts;  // per axis for lattices, {n} for random grids
  std::string kind;         // "regular" or "random"
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }

  /// Per-axis sampling range: periodic axes use their fundamental domain, bounded intervals
  /// their bounds, unbounded axes [0, 2*pi] unless overridden.
  static std::pair<double, double> default_range(const AxisSpec& ax) {
    if (ax.is_periodic() || ax.is_bounded()) return {ax.lo, ax.hi};
    return {0.0, 2.0 * std::numbers::pi};
  }

  /// Tensor-product lattice. Periodic axes exclude the right endpoint; other axes include both.
  /// `values` may fix an axis to an explicit list (counts for that axis are then ignored).
  static SampleGrid regular(const Chart& chart, const std::vector<int>& counts,
                            const std::vector<std::optional<std::pair<double, double>>>& ranges = {},
                            const std::vector<std::vector<double>>& values = {}) {
    const int n = chart.dim();
    if (static_cast<int>(counts.size()) != n) throw ConfigError("grid counts must match the chart dimension");
    std::vector<std::vector<double>> axis_vals(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      auto& out = axis_vals[static_cast<std::size_t>(a)];
      if (a < static_cast<int>(values.size()) && !values[static_cast<std::size_t>(a)].empty()) {
        out = values[static_cast<std::size_t>(a)];
        continue;
      }
      const int c = counts[static_cast<std::size_t>(a)];
      if (c < 1) throw ConfigError("grid counts must be positive");
      const auto& ax = chart.axis(a);
      auto [lo, hi] = default_range(ax);
      if (a < static_cast<int>(ranges.size()) && ranges[static_cast<std::size_t>(a)])
        std::tie(lo, hi) = *ranges[static_cast<std::size_t>(a)];
      const bool open = ax.is_periodic() && !(a < static_cast<int>(ranges.size()) && ranges[static_cast<std::size_t>(a)]);
      for (int i = 0; i < c; ++i) {
        double t;
        if (c == 1) t = open ? 0.0 : 0.5;
        else t = open ? static_cast<double>(i) / c : static_cast<double>(i) / (c - 1);
        out.push_back(lo + (hi - lo) * t);
      }
    }
    SampleGrid g;
    g.chart = chart;
    g.kind = "regular";
    for (int a = 0; a < n; ++a) g.counts.push_back(static_cast<int>(axis_vals[static_cast<std::size_t>(a)].size()));
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      Point p{};
      for (int a = 0; a < n; ++a) p[a] = axis_vals[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
      chart.require_contains(p);
      g.points.push_back(p);
      int a = n - 1;
      while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == axis_vals[static_cast<std::size_t>(a)].size()) {
        idx[static_cast<std::size_t>(a)] = 0;
        --a;
      }
      if (a < 0) break;
    }
    return g;
  }

  /// n uniformly distributed points from a seeded Mersenne twister.
  static SampleGrid random(const Chart& chart, std::size_t n, std::uint64_t seed,
                           const std::vector<std::optional<std::pair<double, double>>>& ranges = {}) {
    SampleGrid g;
    g.chart = chart;
    g.kind = "random";
    g.seed = seed;
    g.counts = {static_cast<int>(n)};
    std::mt19937_64 rng(seed);
    const int d = chart.dim();
    std::vector<std::uniform_real_distribution<double>> dist;
    for (int a = 0; a < d; ++a) {
      auto [lo, hi] = default_range(chart.axis(a));
      if (a < static_cast<int>(ranges.size()) && ranges[static_cast<std::size_t>(a)])
        std::tie(lo, hi) = *ranges[static_cast<std::size_t>(a)];
      dist.emplace_back(lo, hi);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Point p{};
      for (int a = 0; a < d; ++a) p[a] = dist[static_cast<std::size_t>(a)](rng);
      g.points.push_back(chart.wrap(p));
    }
    return g;
  }

  /// Spacetime grid: the given x0 instants times a spatial grid.
  static SampleGrid spacetime(const SampleGrid& spatial, const std::vector<double>& x0s) {
    SampleGrid g;
    g.chart = Chart::spacetime(spatial.chart);
    g.kind = spatial.kind;
    g.seed = spatial.seed;
    g.counts = {static_cast<int>(x0s.size())};
    g.counts.insert(g.counts.end(), spatial.counts.begin(), spatial.counts.end());
    for (double t : x0s)
      for (const auto& p : spatial.points) g.points.push_back(spacetime_point(t, p));
    return g;
  }

  /// The spatial points of a grid at one instant.
  static SampleGrid slice(const SampleGrid& g4) {
    if (g4.chart.dim() != 4) throw ChartMismatch("slice needs a spacetime grid");
    SampleGrid g;
    g.chart = g4.chart.spatial();
    g.kind = g4.kind;
    g.seed = g4.seed;
    const double t0 = g4.points.empty() ? 0.0 : g4.points.front()[0];
    for (const auto& p : g4.points)
      if (p[0] == t0) g.points.push_back(spatial_point(p));
    g.counts.assign(g4.counts.begin() + (g4.counts.size() > 1 ? 1 : 0), g4.counts.end());
    return g;
  }
};

}  // namespace bmk
