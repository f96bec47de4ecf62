#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace ccnn {

// k-means++ seeding followed by Lloyd iterations run to an assignment
// fixpoint. Returns K centroid rows. Deterministic for a given seed.
Eigen::MatrixXd kmeans_init(const Eigen::MatrixXd& data, int K, uint64_t seed);

}  // namespace ccnn
