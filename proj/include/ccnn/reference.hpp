#pragma once

#include "ccnn/spectral.hpp"
#include "ccnn/types.hpp"

// Serial reference implementations, written as directly from the defining
// sums as possible. They are the independent oracles for the optimized
// kernels (tests assert agreement) and the baselines for tools/bench.
namespace ccnn::reference {

// Naive double sum F(k) = sum_x e^{-i k.x} m(x).
ComplexMap dft2(const RealMap& map, int K);

// Quadruple-loop cross-correlation with F-1 zero padding.
RealMap conv_full(const RealMap& map, const RealMap& filter);

// C^(m)(x) by explicit enumeration of ordered tuples of m pairwise-distinct
// filter offsets. O(F^(2m)) per site; only usable for small F.
RealMap correlator_map_bruteforce(const RealMap& dn, const RealMap& filter, int m);

// Plain dot product sum_x w(x) m(x).
double spatial_pool(const RealMap& m, const RealMap& w);

}  // namespace ccnn::reference
