#pragma once

// Pointwise exterior algebra over a generic scalar (double or Jet).
//
// A k-form value on an n-dimensional chart is stored as 16 coefficients
// indexed by bitmask: bit i set means dx^i is a factor, and the canonical
// basis element is the increasing wedge of the set bits.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bmk/errors.hpp"
#include "bmk/jet.hpp"

namespace bmk {

inline constexpr int kMasks = 1 << kMaxDim;

using Mask = unsigned;

template <class S>
using Coeffs = std::array<S, kMasks>;
template <class S>
using Vec = std::array<S, kMaxDim>;
template <class S>
using Mat = std::array<std::array<S, kMaxDim>, kMaxDim>;

inline int mask_degree(Mask m) { return std::popcount(m); }
inline Mask full_mask(int n) { return (Mask{1} << n) - 1; }

/// All masks of a given degree on an n-dimensional chart, in lexicographic order of the index tuple.
inline std::vector<Mask> masks_of_degree(int n, int k) {
  std::vector<Mask> out;
  // Lexicographic order of increasing tuples, e.g. (0,1) (0,2) (0,3) (1,2) ...
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      tuples.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  for (const auto& t : tuples) {
    Mask m = 0;
    for (int i : t) m |= Mask{1} << i;
    out.push_back(m);
  }
  return out;
}

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; i < kMaxDim; ++i)
    if (m & (Mask{1} << i)) out.push_back(i);
  return out;
}

/// Mask of a strictly increasing multi-index; throws DegreeError otherwise.
inline Mask mask_of(const std::vector<int>& idx, int dim) {
  Mask m = 0;
  int prev = -1;
  for (int i : idx) {
    if (i <= prev || i < 0 || i >= dim)
      throw DegreeError("multi-index must be strictly increasing within the chart dimension");
    m |= Mask{1} << i;
    prev = i;
  }
  return m;
}

/// (-1)^{#{j in m : j < i}}: sign of moving dx^i to the front of dx^m.
inline double front_sign(int i, Mask m) {
  return (std::popcount(m & ((Mask{1} << i) - 1)) & 1) ? -1.0 : 1.0;
}

/// Sign of dx^a ^ dx^b relative to dx^{a|b}; zero when a and b overlap.
inline double wedge_sign(Mask a, Mask b) {
  if (a & b) return 0.0;
  int inversions = 0;
  for (int i = 0; i < kMaxDim; ++i)
    if (a & (Mask{1} << i)) inversions += std::popcount(b & ((Mask{1} << i) - 1));
  return (inversions & 1) ? -1.0 : 1.0;
}

template <class S>
Coeffs<S> zero_coeffs() {
  Coeffs<S> c;
  c.fill(S(0.0));
  return c;
}

template <class S>
Coeffs<S> wedge_values(const Coeffs<S>& a, int deg_a, const Coeffs<S>& b, int deg_b, int n) {
  Coeffs<S> r = zero_coeffs<S>();
  const Mask lim = Mask{1} << n;
  for (Mask ma = 0; ma < lim; ++ma) {
    if (mask_degree(ma) != deg_a) continue;
    for (Mask mb = 0; mb < lim; ++mb) {
      if (mask_degree(mb) != deg_b || (ma & mb)) continue;
      r[ma | mb] += wedge_sign(ma, mb) * (a[ma] * b[mb]);
    }
  }
  return r;
}

/// iota_X on the first slot.
template <class S>
Coeffs<S> interior_values(const Vec<S>& x, const Coeffs<S>& a, int deg, int n) {
  Coeffs<S> r = zero_coeffs<S>();
  if (deg == 0) return r;
  const Mask lim = Mask{1} << n;
  for (Mask m = 0; m < lim; ++m) {
    if (mask_degree(m) != deg) continue;
    for (int i = 0; i < n; ++i) {
      const Mask bit = Mask{1} << i;
      if (!(m & bit)) continue;
      r[m & ~bit] += front_sign(i, m) * (x[i] * a[m]);
    }
  }
  return r;
}

template <class S>
S det_and_inverse(Mat<S> a, int n, Mat<S>& inv) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = S(i == j ? 1.0 : 0.0);
  S det(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(value_of(a[r][col])) > std::fabs(value_of(a[piv][col]))) piv = r;
    if (std::fabs(value_of(a[piv][col])) < 1e-300) throw SingularMetric("metric matrix is singular");
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(inv[piv], inv[col]);
      det *= -1.0;
    }
    const S p = a[col][col];
    det *= p;
    const S ip = S(1.0) / p;
    for (int j = 0; j < n; ++j) {
      a[col][j] *= ip;
      inv[col][j] *= ip;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const S f = a[r][col];
      if (value_of(f) == 0.0 && std::is_same_v<S, double>) continue;
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return det;
}

template <class S>
S determinant(const Mat<S>& a, int n) {
  Mat<S> inv;
  return det_and_inverse(a, n, inv);
}

/// Hodge dual on the coordinate block [offset, offset+n): star(dx^I) is obtained by
/// contracting the volume form with g^{-1}(dx^{i_1}), g^{-1}(dx^{i_2}), ... in that order.
/// `g` is indexed within the block. Coefficients outside the block are ignored.
template <class S>
Coeffs<S> hodge_values(const Coeffs<S>& a, int deg, const Mat<S>& g, int n, int offset = 0) {
  Mat<S> ginv;
  const S det = det_and_inverse(g, n, ginv);
  const S vol = sqrt(value_of(det) < 0.0 ? -det : det);
  Coeffs<S> r = zero_coeffs<S>();
  const Mask block = full_mask(n) << offset;
  for (Mask m = 0; m < static_cast<Mask>(kMasks); ++m) {
    if (mask_degree(m) != deg || (m & ~block)) continue;
    if (value_of(a[m]) == 0.0 && std::is_same_v<S, double>) continue;
    Coeffs<S> w = zero_coeffs<S>();
    w[block] = vol;
    int cur = n;
    for (int i = offset; i < offset + n; ++i) {
      if (!(m & (Mask{1} << i))) continue;
      Vec<S> x;
      x.fill(S(0.0));
      for (int j = 0; j < n; ++j) x[offset + j] = ginv[j][i - offset];
      w = interior_values(x, w, cur, offset + n);
      --cur;
    }
    for (Mask t = 0; t < static_cast<Mask>(kMasks); ++t)
      if (mask_degree(t) == n - deg && !(t & ~block)) r[t] += a[m] * w[t];
  }
  return r;
}

/// Index-raised components (g^{-1})^{ab} a_b of a 1-form.
template <class S>
Vec<S> sharp_values(const Coeffs<S>& a, const Mat<S>& g, int n) {
  Mat<S> ginv;
  det_and_inverse(g, n, ginv);
  Vec<S> x;
  x.fill(S(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x[i] += ginv[i][j] * a[Mask{1} << j];
  return x;
}

template <class S>
S norm_sq_values(const Coeffs<S>& a, const Mat<S>& g, int n) {
  const Vec<S> x = sharp_values(a, g, n);
  S s(0.0);
  for (int i = 0; i < n; ++i) s += x[i] * a[Mask{1} << i];
  return s;
}

/// Pullback coefficients sum_J a_J det(J[rows J, cols I]) for a Jacobian J.
inline Coeffs<double> pullback_values(const Coeffs<double>& a, int deg, const Mat<double>& jac, int n) {
  Coeffs<double> r = zero_coeffs<double>();
  const auto masks = masks_of_degree(n, deg);
  for (Mask mi : masks) {
    const auto cols = mask_indices(mi);
    for (Mask mj : masks) {
      if (a[mj] == 0.0) continue;
      const auto rows = mask_indices(mj);
      Mat<double> sub{};
      for (int r0 = 0; r0 < deg; ++r0)
        for (int c0 = 0; c0 < deg; ++c0) sub[r0][c0] = jac[rows[r0]][cols[c0]];
      const double d = deg == 0 ? 1.0 : [&] {
        Mat<double> inv;
        try {
          return det_and_inverse(sub, deg, inv);
        } catch (const SingularMetric&) {
          return 0.0;
        }
      }();
      r[mi] += a[mj] * d;
    }
  }
  return r;
}

template <class S>
double max_abs(const Coeffs<S>& c) {
  double m = 0.0;
  for (const auto& x : c) m = std::max(m, std::fabs(value_of(x)));
  return m;
}

/// "dx1^dx2" style label for a mask; `first_label` is the name of axis 0.
inline std::string mask_label(Mask m, int first_label) {
  if (m == 0) return "1";
  std::string s;
  for (int i : mask_indices(m)) {
    if (!s.empty()) s += "^";
    s += "dx" + std::to_string(i + first_label);
  }
  return s;
}

}  // namespace bmk
