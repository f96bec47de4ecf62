#include "ccnn/unsupervised.hpp"

#include <stdexcept>

#include "ccnn/spectral.hpp"

namespace ccnn {

Eigen::MatrixXd spectral_feature_matrix(const Dataset& dataset, int K_spectral) {
  if (dataset.sets.empty())
    throw std::invalid_argument("spectral_feature_matrix: empty dataset");
  const int n = static_cast<int>(dataset.sets.size());
  Eigen::MatrixXd features(n, K_spectral * K_spectral);
  for (int i = 0; i < n; ++i) {
    RealMap phat =
        shift_invariant_features(mean_power_spectrum(dataset.sets[i], K_spectral));
    const std::vector<double> v = vectorize(phat);
    for (size_t j = 0; j < v.size(); ++j) features(i, static_cast<Eigen::Index>(j)) = v[j];
  }
  return features;
}

UnsupervisedResult cluster_phase_diagram(const Dataset& dataset, int K_spectral,
                                         int n_pca, int K_clusters, uint64_t seed,
                                         int restart_window) {
  UnsupervisedResult res;
  res.features = spectral_feature_matrix(dataset, K_spectral);
  const Eigen::Index n = res.features.rows();

  // Identical sets give an exactly zero-variance feature matrix; that is one
  // effective cluster, not an error.
  Eigen::RowVectorXd mean = res.features.colwise().mean();
  if ((res.features.rowwise() - mean).cwiseAbs().maxCoeff() == 0.0) {
    res.degenerate = true;
    res.assignment.labels.assign(n, 0);
    res.assignment.responsibilities = Eigen::MatrixXd::Ones(n, 1);
    res.projections = Eigen::MatrixXd::Zero(n, 1);
    return res;
  }

  res.pca = pca_fit(res.features, n_pca);
  res.projections = pca_project(res.pca, res.features);
  res.gmm = gmm_restart_search(res.projections, K_clusters, seed, restart_window);
  res.assignment = gmm_assign(res.gmm, res.projections);
  return res;
}

}  // namespace ccnn
