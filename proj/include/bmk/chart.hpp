#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bmk/errors.hpp"
#include "bmk/jet.hpp"

namespace bmk {

/// Chart coordinates. Only the first `Chart::dim()` entries are meaningful.
/// On spacetime charts entry 0 is x^0; on spatial charts entries 0..2 are x^1..x^3.
using Point = std::array<double, kMaxDim>;

enum class AxisKind { periodic, interval };

struct AxisSpec {
  AxisKind kind = AxisKind::interval;
  double lo = 0.0;  // periodic axes: fundamental domain [lo, lo + period)
  double hi = 0.0;
  std::string label;

  static AxisSpec periodic(double period, std::string label, double origin = 0.0) {
    if (!(period > 0.0)) throw ConfigError("periodic axis '" + label + "' needs period > 0");
    return {AxisKind::periodic, origin, origin + period, std::move(label)};
  }
  static AxisSpec interval(double lo, double hi, std::string label) {
    if (!(lo < hi)) throw ConfigError("interval axis '" + label + "' needs lo < hi");
    return {AxisKind::interval, lo, hi, std::move(label)};
  }
  /// The whole real line, an interval with infinite bounds.
  static AxisSpec line(std::string label) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {AxisKind::interval, -inf, inf, std::move(label)};
  }

  bool is_periodic() const { return kind == AxisKind::periodic; }
  bool is_bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double period() const { return hi - lo; }

  bool operator==(const AxisSpec&) const = default;
};

/// Coordinate domain descriptor: T^3, D^2 x S^1, R^3 and their x^0-extended products.
class Chart {
 public:
  Chart() = default;
  Chart(std::string name, std::vector<AxisSpec> axes) : name_(std::move(name)), axes_(std::move(axes)) {
    if (axes_.size() != 3 && axes_.size() != 4)
      throw ConfigError("chart '" + name_ + "' must have 3 or 4 axes");
  }

  static Chart torus3() {
    constexpr double tau = 2.0 * std::numbers::pi;
    return Chart("T3", {AxisSpec::periodic(tau, "x1"), AxisSpec::periodic(tau, "x2"),
                        AxisSpec::periodic(tau, "x3")});
  }
  static Chart euclidean3() {
    return Chart("R3", {AxisSpec::line("x1"), AxisSpec::line("x2"), AxisSpec::line("x3")});
  }
  /// Solid torus (r, phi, x3) with r in [r_min, a].
  static Chart solid_torus(double a, double r_min) {
    constexpr double tau = 2.0 * std::numbers::pi;
    return Chart("D2xS1", {AxisSpec::interval(r_min, a, "r"), AxisSpec::periodic(tau, "phi"),
                           AxisSpec::periodic(tau, "x3")});
  }
  /// Product (x^0 line) x spatial chart, x^0 first.
  static Chart spacetime(const Chart& spatial) {
    if (spatial.dim() != 3) throw ConfigError("spacetime() needs a 3-dimensional chart");
    std::vector<AxisSpec> axes{AxisSpec::line("x0")};
    axes.insert(axes.end(), spatial.axes_.begin(), spatial.axes_.end());
    return Chart(spatial.name_ + "xR", std::move(axes));
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::string& name() const { return name_; }
  const std::vector<AxisSpec>& axes() const { return axes_; }
  const AxisSpec& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }

  /// True for x^0-first spacetime charts built by spacetime().
  bool is_spacetime() const { return dim() == 4; }

  /// The spatial factor of a spacetime chart.
  Chart spatial() const {
    if (!is_spacetime()) return *this;
    std::string n = name_;
    if (n.size() > 2 && n.ends_with("xR")) n.resize(n.size() - 2);
    return Chart(n, {axes_[1], axes_[2], axes_[3]});
  }

  bool contains(const Point& p) const {
    for (int i = 0; i < dim(); ++i) {
      const auto& ax = axes_[static_cast<std::size_t>(i)];
      if (!std::isfinite(p[static_cast<std::size_t>(i)])) return false;
      if (!ax.is_periodic() && (p[i] < ax.lo || p[i] > ax.hi)) return false;
    }
    return true;
  }

  void require_contains(const Point& p) const {
    if (!contains(p)) throw DomainError("point " + format(p) + " is outside chart " + name_);
  }

  /// Relative distance to a domain boundary below which a coordinate counts as on it.
  static constexpr double kBoundarySnap = 1e-12;

  /// Periodic coordinates reduced to their fundamental domain.
  Point wrap(Point p) const {
    for (int i = 0; i < dim(); ++i) {
      const auto& ax = axes_[static_cast<std::size_t>(i)];
      if (!ax.is_periodic()) continue;
      const double per = ax.period();
      double x = std::fmod(p[i] - ax.lo, per);
      if (x < 0.0) x += per;
      if (x >= per * (1.0 - kBoundarySnap)) x = 0.0;
      p[i] = ax.lo + x;
    }
    return p;
  }

  /// Integer number of fundamental-domain traversals between a wrapped and a lifted coordinate.
  std::array<int, kMaxDim> winding(const Point& start, const Point& lifted) const {
    std::array<int, kMaxDim> w{};
    for (int i = 0; i < dim(); ++i) {
      const auto& ax = axes_[static_cast<std::size_t>(i)];
      if (!ax.is_periodic()) continue;
      auto turns = [&](double x) {
        const double t = (x - ax.lo) / ax.period();
        const double r = std::round(t);
        return std::fabs(t - r) < kBoundarySnap ? r : std::floor(t);
      };
      w[i] = static_cast<int>(turns(lifted[i]) - turns(start[i]));
    }
    return w;
  }

  /// Coordinate distance with minimal-image deltas on periodic axes, each
  /// periodic delta scaled by 2*pi/period.
  double distance(const Point& a, const Point& b) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const double d = delta(a, b, i);
      s += d * d;
    }
    return std::sqrt(s);
  }

  /// Signed minimal-image difference b - a along axis i (period-normalized when periodic).
  double delta(const Point& a, const Point& b, int i) const {
    const auto& ax = axes_[static_cast<std::size_t>(i)];
    double d = b[i] - a[i];
    if (ax.is_periodic()) {
      const double per = ax.period();
      d -= per * std::round(d / per);
      d *= 2.0 * std::numbers::pi / per;
    }
    return d;
  }

  bool operator==(const Chart& o) const { return axes_ == o.axes_; }

  static std::string format(const Point& p, int n = kMaxDim) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (int i = 0; i < n; ++i) os << (i ? ", " : "") << p[static_cast<std::size_t>(i)];
    os << ')';
    return os.str();
  }

 private:
  std::string name_;
  std::vector<AxisSpec> axes_;
};

/// Spatial part (x^1, x^2, x^3) of a spacetime point.
inline Point spatial_point(const Point& p4) { return {p4[1], p4[2], p4[3], 0.0}; }
/// Spacetime point (x0, x).
inline Point spacetime_point(double x0, const Point& p3) { return {x0, p3[0], p3[1], p3[2]}; }

inline void require_same_chart(const Chart& a, const Chart& b, const char* what) {
  if (!(a == b))
    throw ChartMismatch(std::string(what) + ": chart mismatch (" + a.name() + " vs " + b.name() + ")");
}

}  // namespace bmk
