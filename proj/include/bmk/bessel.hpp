#pragma once

// Bessel functions J0 and J1 of real argument, |z| <= 50.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bmk/errors.hpp"
#include "bmk/jet.hpp"

namespace bmk {

namespace detail {

inline double bessel_series(int n, double z) {
  const double q = -0.25 * z * z;
  double term = n == 0 ? 1.0 : 0.5 * z;
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * static_cast<double>(m + n));
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

/// Miller's backward recurrence normalized by J0 + 2 sum J_{2k} = 1. Returns {J0, J1}.
inline std::pair<double, double> bessel_miller(double z) {
  int start = static_cast<int>(z) + 40;
  if (start % 2) ++start;
  double jp1 = 0.0, j = 1e-300, norm = 0.0;
  double j0 = 0.0, j1 = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm1 = 2.0 * k / z * j - jp1;
    jp1 = j;
    j = jm1;
    // j is now J_{k-1}
    if (std::fabs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      j1 *= 1e-250;
    }
    if (k - 1 == 1) j1 = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
  }
  j0 = j;
  norm += j0;
  return {j0 / norm, j1 / norm};
}

}  // namespace detail

/// J_order(z) for order 0 or 1; throws DomainError outside |z| <= 50.
inline double bessel_j(int order, double z) {
  if (order != 0 && order != 1) throw DomainError("bessel_j supports orders 0 and 1");
  if (!(std::fabs(z) <= 50.0)) throw DomainError("bessel_j argument out of range: " + std::to_string(z));
  const double sign = (order == 1 && z < 0.0) ? -1.0 : 1.0;
  const double x = std::fabs(z);
  if (x < 8.0) return sign * detail::bessel_series(order, x);
  const auto [j0, j1] = detail::bessel_miller(x);
  return sign * (order == 0 ? j0 : j1);
}

/// J0 of a jet argument: J0' = -J1, J0'' = J1/z - J0.
inline Jet bessel_j0(const Jet& z) {
  const double x = z.v;
  const double j0 = bessel_j(0, x), j1 = bessel_j(1, x);
  const double j1_over_z = std::fabs(x) < 1e-8 ? 0.5 : j1 / x;
  return chain(z, j0, -j1, j1_over_z - j0);
}
/// J1 of a jet argument: J1' = J0 - J1/z, J1'' = -J1'/z - (1 - 1/z^2) J1.
inline Jet bessel_j1(const Jet& z) {
  const double x = z.v;
  const double j0 = bessel_j(0, x), j1 = bessel_j(1, x);
  if (std::fabs(x) < 1e-8) return chain(z, j1, 0.5, 0.0);
  const double d1 = j0 - j1 / x;
  const double d2 = -d1 / x - (1.0 - 1.0 / (x * x)) * j1;
  return chain(z, j1, d1, d2);
}
inline double bessel_j0(double z) { return bessel_j(0, z); }
inline double bessel_j1(double z) { return bessel_j(1, z); }

}  // namespace bmk
