#include "ccnn/kmeans.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "ccnn/rng.hpp"

namespace ccnn {

Eigen::MatrixXd kmeans_init(const Eigen::MatrixXd& data, int K, uint64_t seed) {
  const Eigen::Index n = data.rows(), d = data.cols();
  if (K < 1) throw std::invalid_argument("kmeans_init: K < 1");
  if (K > n) throw std::invalid_argument("kmeans_init: K exceeds point count");

  Rng rng(seed);
  Eigen::MatrixXd centers(K, d);

  // k-means++ seeding
  centers.row(0) = data.row(rng.uniform_int(n));
  Eigen::VectorXd d2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < K; ++k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total, run = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += d2[i];
        if (run >= target) { pick = i; break; }
        pick = i;
      }
    } else {
      pick = rng.uniform_int(n);  // all remaining points coincide
    }
    centers.row(k) = data.row(pick);
    d2 = d2.cwiseMin((data.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }

  // Lloyd to assignment fixpoint
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bestd = std::numeric_limits<double>::max();
      for (int k = 0; k < K; ++k) {
        const double dist = (data.row(i) - centers.row(k)).squaredNorm();
        if (dist < bestd) { bestd = dist; best = k; }
      }
      if (assign[i] != best) { assign[i] = best; changed = true; }
    }
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, d);
    std::vector<int> counts(K, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += data.row(i);
      counts[assign[i]] += 1;
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) {
        centers.row(k) = sums.row(k) / counts[k];
      } else {
        // reseed an emptied cluster at the point farthest from its center
        Eigen::Index far = 0;
        double fard = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dist = (data.row(i) - centers.row(assign[i])).squaredNorm();
          if (dist > fard) { fard = dist; far = i; }
        }
        centers.row(k) = data.row(far);
      }
    }
  }
  return centers;
}

}  // namespace ccnn
