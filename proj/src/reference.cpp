#include "ccnn/reference.hpp"

#include <cmath>
#include <numbers>

#include "ccnn/core.hpp"

namespace ccnn::reference {

ComplexMap dft2(const RealMap& map, int K) {
  if (K < map.rows() || K < map.cols())
    throw std::invalid_argument("reference::dft2: K smaller than map dimension");
  ComplexMap out(K, K);
  for (int kr = 0; kr < K; ++kr)
    for (int kc = 0; kc < K; ++kc) {
      std::complex<double> acc = 0.0;
      for (int r = 0; r < map.rows(); ++r)
        for (int c = 0; c < map.cols(); ++c) {
          const double phi =
              -2.0 * std::numbers::pi * (static_cast<double>(kr) * r + static_cast<double>(kc) * c) / K;
          acc += map(r, c) * std::complex<double>(std::cos(phi), std::sin(phi));
        }
      out(kr, kc) = acc;
    }
  return out;
}

RealMap conv_full(const RealMap& map, const RealMap& filter) {
  const int F = filter.rows();
  if (filter.cols() != F) throw std::invalid_argument("conv_full: non-square filter");
  const RealMap padded = zero_pad(map, F - 1);
  const int oh = map.rows() + F - 1, ow = map.cols() + F - 1;
  RealMap out(oh, ow, 0.0);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int ar = 0; ar < F; ++ar)
        for (int ac = 0; ac < F; ++ac)
          acc += filter(ar, ac) * padded(r + ar, c + ac);
      out(r, c) = acc;
    }
  return out;
}

RealMap correlator_map_bruteforce(const RealMap& dn, const RealMap& filter, int m) {
  if (m < 1 || m > 3)
    throw std::invalid_argument("correlator_map_bruteforce: m outside {1,2,3}");
  const int F = filter.rows();
  const RealMap padded = zero_pad(dn, F - 1);
  const int oh = dn.rows() + F - 1, ow = dn.cols() + F - 1;
  const int nf = F * F;
  RealMap out(oh, ow, 0.0);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      auto tap = [&](int a) {
        return filter[a] * padded(r + a / F, c + a % F);
      };
      if (m == 1) {
        for (int a = 0; a < nf; ++a) acc += tap(a);
      } else if (m == 2) {
        for (int a1 = 0; a1 < nf; ++a1)
          for (int a2 = 0; a2 < nf; ++a2)
            if (a1 != a2) acc += tap(a1) * tap(a2);
      } else {
        for (int a1 = 0; a1 < nf; ++a1)
          for (int a2 = 0; a2 < nf; ++a2)
            for (int a3 = 0; a3 < nf; ++a3)
              if (a1 != a2 && a1 != a3 && a2 != a3)
                acc += tap(a1) * tap(a2) * tap(a3);
      }
      out(r, c) = acc;
    }
  return out;
}

double spatial_pool(const RealMap& m, const RealMap& w) {
  if (!m.same_shape(w))
    throw std::invalid_argument("reference::spatial_pool: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < m.size(); ++i) acc += w[i] * m[i];
  return acc;
}

}  // namespace ccnn::reference
