// Poincare section {x3 = pi/2} of the ABC(1,1,0) field lines, written as CSV to stdout.
#include <iostream>
#include <numbers>

#include "bmk/bmk.hpp"

int main() {
  using namespace bmk;
  const auto v = abc_flow(1.0, 1.0, 0.0);
  const auto y = metric_sharp(v.metric, v.form);
  // sin x1 + cos x3 is conserved, so each seed stays on one level set
  const std::vector<Point> seeds{{0.3, 0.0, 1.2, 0}, {1.0, 0.5, 2.0, 0}, {2.5, 1.0, 1.9, 0}};
  const auto seqs = poincare_section(y, 2, std::numbers::pi / 2.0, seeds, 200.0);
  write_crossings_csv(std::cout, y.chart(), seqs);
}
