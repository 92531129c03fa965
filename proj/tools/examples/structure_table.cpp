// Structure checks of a time-harmonic Beltrami-Maxwell field across one quarter period.
#include <cstdio>
#include <numbers>

#include "bmk/bmk.hpp"

int main() {
  using namespace bmk;
  const auto m = beltrami_maxwell(t3_mode(1, 1.0), 1.0);
  const auto g = SampleGrid::regular(Chart::torus3(), {8, 8, 8});
  std::printf("%-8s %-12s %-12s %-8s %-8s %-8s %-8s\n", "k x0", "contact(e)", "contact(h)", "SHS(B,e)", "SHS(D,h)",
              "F0", "F1");
  for (int i = 0; i <= 4; ++i) {
    const double x0 = i * std::numbers::pi / (8.0 * m.k);
    const auto g4 = SampleGrid::spacetime(g, {x0});
    auto mark = [](const CheckReport& r) { return r.pass ? "yes" : "no"; };
    std::printf("%-8.4f %-12s %-12s %-8s %-8s %-8s %-8s\n", m.k * x0, mark(contact_margin(slice(m.e, x0), g)),
                mark(contact_margin(slice(m.h, x0), g)), mark(shs_check(slice(m.B, x0), slice(m.e, x0), g)),
                mark(shs_check(slice(m.D, x0), slice(m.h, x0), g)), mark(symplectic_margin(m, WhichF::F0, g4)),
                mark(symplectic_margin(m, WhichF::F1, g4)));
  }
}
