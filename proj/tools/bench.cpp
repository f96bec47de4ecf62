// Timing comparison between the serial reference kernels and the production
// (OpenMP) paths: per-snapshot spectra, correlator maps, and batch
// forward/backward.

#include <chrono>
#include <cstdio>
#include <functional>

#include "ccnn/core.hpp"
#include "ccnn/datagen.hpp"
#include "ccnn/gradients.hpp"
#include "ccnn/reference.hpp"
#include "ccnn/rng.hpp"
#include "ccnn/spectral.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace ccnn;

namespace {

double time_ms(const std::function<void()>& body, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) body();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-40s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::printf("%-40s %13s %13s %9s\n", "kernel", "reference", "optimized", "speedup");

  const Lattice lat{13, 13};
  SnapshotSet set = render(make_phase_spec("striated", 0.03), lat, 250, 7);

  // spectra: naive double-sum DFT vs separable transform over the set
  {
    const double nbar = mean_density(set);
    auto serial = [&] {
      RealMap acc(16, 16, 0.0);
      for (const Snapshot& s : set.snapshots) {
        RealMap p = power_spectrum(reference::dft2(normalize_global(s, nbar), 16));
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
      }
    };
    auto optimized = [&] { mean_power_spectrum(set, 16); };
    row("mean_power_spectrum (250 x 13x13, K=16)", time_ms(serial, 3),
        time_ms(optimized, 3));
  }

  // correlator maps: brute-force tuple enumeration vs power-sum identities
  {
    Rng rng(13);
    RealMap dn(13, 13), f(3, 3);
    for (size_t i = 0; i < dn.size(); ++i) dn[i] = rng.normal();
    for (size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform();
    auto serial = [&] { reference::correlator_map_bruteforce(dn, f, 3); };
    auto optimized = [&] { correlator_maps(dn, f, 3); };
    row("correlator maps C^(3) (13x13, F=3)", time_ms(serial, 10),
        time_ms(optimized, 10));
  }

  // batch gradients: single-thread vs all threads
  {
    ModelConfig cfg;
    CCNNModel model = init_model(cfg, 3);
    const RealMap nbar = site_mean_density(set);
    std::vector<RealMap> batch;
    std::vector<double> labels;
    for (int i = 0; i < 128; ++i) {
      batch.push_back(normalize_per_site(set.snapshots[i], nbar));
      labels.push_back(i % 2);
    }
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    auto serial = [&] {
      omp_set_num_threads(1);
      gradients(model, batch, labels, 0.1, false);
      omp_set_num_threads(max_threads);
    };
#else
    auto serial = [&] { gradients(model, batch, labels, 0.1, false); };
#endif
    auto optimized = [&] { gradients(model, batch, labels, 0.1, false); };
    row("batch gradients (128 x 13x13, order 3)", time_ms(serial, 3),
        time_ms(optimized, 3));
  }
  return 0;
}
