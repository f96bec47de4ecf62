#pragma once

#include <array>
#include <utility>

#include "ccnn/types.hpp"

namespace ccnn {

// Point group of the square. Transforms act on square arrays about their
// geometric center (index reversal handles even extents with half-integer
// centers) and on displacement vectors as orthogonal maps.
enum class D4 : int {
  identity = 0,
  rot90 = 1,   // counterclockwise
  rot180 = 2,
  rot270 = 3,
  flip_h = 4,  // reverse columns
  flip_v = 5,  // reverse rows
  transpose = 6,
  anti_transpose = 7,
};

inline constexpr std::array<D4, 8> kD4All = {
    D4::identity, D4::rot90,     D4::rot180,    D4::rot270,
    D4::flip_h,   D4::flip_v,    D4::transpose, D4::anti_transpose};

D4 d4_inverse(D4 g);

// g applied to a square array.
template <typename T>
Grid<T> d4_transform(const Grid<T>& m, D4 g) {
  if (m.rows() != m.cols()) throw std::invalid_argument("d4_transform: non-square");
  const int n = m.rows();
  Grid<T> out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int sr, sc;  // source index
      switch (g) {
        case D4::identity:       sr = r;         sc = c;         break;
        case D4::rot90:          sr = c;         sc = n - 1 - r; break;
        case D4::rot180:         sr = n - 1 - r; sc = n - 1 - c; break;
        case D4::rot270:         sr = n - 1 - c; sc = r;         break;
        case D4::flip_h:         sr = r;         sc = n - 1 - c; break;
        case D4::flip_v:         sr = n - 1 - r; sc = c;         break;
        case D4::transpose:      sr = c;         sc = r;         break;
        case D4::anti_transpose: sr = n - 1 - c; sc = n - 1 - r; break;
        default: throw std::invalid_argument("d4_transform: bad element");
      }
      out(r, c) = m(sr, sc);
    }
  return out;
}

// Projection onto the D4-invariant subspace (group average).
RealMap d4_project(const RealMap& m);

bool d4_is_symmetric(const RealMap& m, double tol = 0.0);

// Orbit of a displacement vector (dr, dc) under the 8 orthogonal maps,
// in the order of kD4All.
std::array<std::pair<int, int>, 8> d4_offset_images(std::pair<int, int> d);

// k-space symmetrization on a periodic K x K index grid, where negation is
// j -> (K - j) mod K: out(k) = sum over the 8 images of in(g k).
RealMap ksym_sum(const RealMap& m);

}  // namespace ccnn
