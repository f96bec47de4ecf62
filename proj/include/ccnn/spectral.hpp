#pragma once

#include <complex>
#include <iosfwd>
#include <numbers>

#include "ccnn/types.hpp"

namespace ccnn {

using ComplexMap = Grid<std::complex<double>>;

// Wavevector convention for a K-point axis: k_j = 2*pi*j/K, j in [0, K).
inline double k_value(int j, int K) { return 2.0 * std::numbers::pi * j / K; }

// 2D discrete Fourier transform F(k) = sum_x exp(-i k.x) m(x) on a K x K
// k-grid, K >= both map dimensions. Separable row/column evaluation; agrees
// with reference::dft2 to machine precision.
ComplexMap dft2(const RealMap& map, int K);

// |F(k)|^2 per grid point.
RealMap power_spectrum(const ComplexMap& f);

// Average of |dft2(n_i - nbar, K)|^2 over the set, using the set's own
// global mean density. Parallel over snapshots, ordered reduction.
RealMap mean_power_spectrum(const SnapshotSet& set, int K);

// Density-shift-invariant features: subtract the k-space mean, so the
// output sums to zero and constant spectral shifts drop out.
RealMap shift_invariant_features(const RealMap& spectrum);

// Row-major vectorization order used for downstream PCA.
std::vector<double> vectorize(const RealMap& grid);

// CSV export: header kx_index,ky_index,value (kx = row-axis index).
void spectrum_to_csv(const RealMap& grid, std::ostream& os);

}  // namespace ccnn
