#include "ccnn/d4.hpp"

#include <cmath>

namespace ccnn {

D4 d4_inverse(D4 g) {
  switch (g) {
    case D4::rot90: return D4::rot270;
    case D4::rot270: return D4::rot90;
    default: return g;  // identity, rot180 and reflections are involutions
  }
}

RealMap d4_project(const RealMap& m) {
  RealMap acc(m.rows(), m.cols(), 0.0);
  for (D4 g : kD4All) {
    RealMap t = d4_transform(m, g);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
  }
  for (size_t i = 0; i < acc.size(); ++i) acc[i] *= 0.125;
  return acc;
}

bool d4_is_symmetric(const RealMap& m, double tol) {
  for (D4 g : kD4All) {
    RealMap t = d4_transform(m, g);
    for (size_t i = 0; i < m.size(); ++i)
      if (std::abs(t[i] - m[i]) > tol) return false;
  }
  return true;
}

std::array<std::pair<int, int>, 8> d4_offset_images(std::pair<int, int> d) {
  const int r = d.first, c = d.second;
  // Linear actions matching the array transforms of d4_transform.
  return {{{r, c},    // identity
           {-c, r},   // rot90
           {-r, -c},  // rot180
           {c, -r},   // rot270
           {r, -c},   // flip_h
           {-r, c},   // flip_v
           {c, r},    // transpose
           {-c, -r}}};  // anti_transpose
}

RealMap ksym_sum(const RealMap& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("ksym_sum: non-square");
  const int K = m.rows();
  auto neg = [K](int j) { return j == 0 ? 0 : K - j; };
  RealMap out(K, K, 0.0);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      const int ni = neg(i), nj = neg(j);
      out(i, j) = m(i, j) + m(i, nj) + m(ni, j) + m(ni, nj) +
                  m(j, i) + m(j, ni) + m(nj, i) + m(nj, ni);
    }
  return out;
}

}  // namespace ccnn
