#include "ccnn/pca.hpp"

#include <stdexcept>

namespace ccnn {

PCAModel pca_fit(const Eigen::MatrixXd& features, int n_components) {
  const Eigen::Index n = features.rows(), d = features.cols();
  if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 points");
  if (n_components < 1 || n_components > std::min<Eigen::Index>(n - 1, d))
    throw std::invalid_argument("pca_fit: n_components outside [1, min(points-1, dims)]");

  PCAModel model;
  model.mean = features.colwise().mean();
  Eigen::MatrixXd centered = features.rowwise() - model.mean.transpose();
  if (centered.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("pca_fit: degenerate data (all points identical)");

  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("pca_fit: eigendecomposition failed");

  // SelfAdjointEigenSolver sorts ascending; take the top from the back.
  model.components.resize(n_components, d);
  model.explained_variance.resize(n_components);
  for (int i = 0; i < n_components; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - i);
    // sign convention
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < d; ++j)
      if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    if (v[arg] < 0.0) v = -v;
    model.components.row(i) = v.transpose();
    model.explained_variance[i] = std::max(0.0, eig.eigenvalues()[d - 1 - i]);
  }
  return model;
}

Eigen::MatrixXd pca_project(const PCAModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.mean.size())
    throw std::invalid_argument("pca_project: dimension mismatch");
  return (features.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace ccnn
