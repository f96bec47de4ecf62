#include "ccnn/spectral.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include "ccnn/core.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ccnn {

ComplexMap dft2(const RealMap& map, int K) {
  if (K < map.rows() || K < map.cols())
    throw std::invalid_argument("dft2: K smaller than map dimension");
  const int h = map.rows(), w = map.cols();

  // Twiddle table e^{-2*pi*i*j*x/K} for j in [0,K), x in [0,max(h,w)).
  const int xmax = std::max(h, w);
  std::vector<std::complex<double>> tw(static_cast<size_t>(K) * xmax);
  for (int j = 0; j < K; ++j)
    for (int x = 0; x < xmax; ++x) {
      const double phi = -2.0 * std::numbers::pi * j * x / K;
      tw[static_cast<size_t>(j) * xmax + x] = {std::cos(phi), std::sin(phi)};
    }

  // Columns first: G(r, kc) = sum_c e^{-i kc c} m(r, c).
  std::vector<std::complex<double>> g(static_cast<size_t>(h) * K);
  for (int r = 0; r < h; ++r)
    for (int kc = 0; kc < K; ++kc) {
      std::complex<double> acc = 0.0;
      for (int c = 0; c < w; ++c)
        acc += map(r, c) * tw[static_cast<size_t>(kc) * xmax + c];
      g[static_cast<size_t>(r) * K + kc] = acc;
    }

  // Then rows: F(kr, kc) = sum_r e^{-i kr r} G(r, kc).
  ComplexMap out(K, K);
  for (int kr = 0; kr < K; ++kr)
    for (int kc = 0; kc < K; ++kc) {
      std::complex<double> acc = 0.0;
      for (int r = 0; r < h; ++r)
        acc += tw[static_cast<size_t>(kr) * xmax + r] * g[static_cast<size_t>(r) * K + kc];
      out(kr, kc) = acc;
    }
  return out;
}

RealMap power_spectrum(const ComplexMap& f) {
  RealMap out(f.rows(), f.cols());
  for (size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
  return out;
}

RealMap mean_power_spectrum(const SnapshotSet& set, int K) {
  if (set.snapshots.empty())
    throw std::invalid_argument("mean_power_spectrum: empty set");
  const double nbar = mean_density(set);
  const int n = static_cast<int>(set.snapshots.size());

  std::vector<RealMap> partial(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      RealMap dn = normalize_global(set.snapshots[i], nbar);
      partial[i] = power_spectrum(dft2(dn, K));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Ordered reduction keeps the result independent of thread count.
  RealMap acc(K, K, 0.0);
  for (int i = 0; i < n; ++i)
    for (size_t j = 0; j < acc.size(); ++j) acc[j] += partial[i][j];
  for (size_t j = 0; j < acc.size(); ++j) acc[j] /= n;
  return acc;
}

RealMap shift_invariant_features(const RealMap& spectrum) {
  double mean = 0.0;
  for (size_t i = 0; i < spectrum.size(); ++i) mean += spectrum[i];
  mean /= static_cast<double>(spectrum.size());
  RealMap out(spectrum.rows(), spectrum.cols());
  for (size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum[i] - mean;
  return out;
}

std::vector<double> vectorize(const RealMap& grid) { return grid.data(); }

void spectrum_to_csv(const RealMap& grid, std::ostream& os) {
  os << "kx_index,ky_index,value\n";
  char buf[64];
  for (int i = 0; i < grid.rows(); ++i)
    for (int j = 0; j < grid.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", i, j, grid(i, j));
      os << buf;
    }
}

}  // namespace ccnn
