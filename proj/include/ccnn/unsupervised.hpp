#pragma once

#include <cstdint>

#include "ccnn/gmm.hpp"
#include "ccnn/pca.hpp"
#include "ccnn/types.hpp"

namespace ccnn {

// Shift-invariant spectral features, one row-major vectorized K x K grid per
// set: rows = parameter points, cols = K*K.
Eigen::MatrixXd spectral_feature_matrix(const Dataset& dataset, int K_spectral);

struct UnsupervisedResult {
  PCAModel pca;
  GMMModel gmm;
  ClusterAssignment assignment;
  Eigen::MatrixXd features;     // raw spectral features per point
  Eigen::MatrixXd projections;  // points x n_pca
  bool degenerate = false;      // zero-variance dataset collapsed to 1 cluster
};

// Full first-pass pipeline: mean power spectra -> shift-invariant features
// -> PCA -> GMM restart search -> per-point labels.
UnsupervisedResult cluster_phase_diagram(const Dataset& dataset, int K_spectral = 16,
                                         int n_pca = 10, int K_clusters = 6,
                                         uint64_t seed = 0, int restart_window = 500);

}  // namespace ccnn
