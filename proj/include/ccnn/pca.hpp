#pragma once

#include <Eigen/Dense>

namespace ccnn {

struct PCAModel {
  Eigen::VectorXd mean;                 // feature mean
  Eigen::MatrixXd components;           // n_components x dims, rows orthonormal
  Eigen::VectorXd explained_variance;   // non-increasing, >= 0
};

// Top eigenvectors of the sample covariance (1/(n-1) normalization) of the
// row-wise data matrix. Deterministic sign: the largest-|entry| coordinate
// of each component is positive, ties broken by lowest index.
PCAModel pca_fit(const Eigen::MatrixXd& features, int n_components);

// (features - mean) * components^T, one row per point.
Eigen::MatrixXd pca_project(const PCAModel& model, const Eigen::MatrixXd& features);

}  // namespace ccnn
