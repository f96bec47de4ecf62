#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ccnn {

struct GMMModel {
  int K_clusters = 0;
  Eigen::VectorXd weights;                 // simplex
  Eigen::MatrixXd means;                   // K x d
  std::vector<Eigen::MatrixXd> covariances;  // full, SPD after regularization
  double log_likelihood = 0.0;
  std::vector<double> ll_trace;            // per EM iteration, non-decreasing
  long attempts_run = 1;                   // restarts evaluated by the search
};

struct ClusterAssignment {
  std::vector<int> labels;           // argmax of responsibilities
  Eigen::MatrixXd responsibilities;  // rows sum to 1
};

// EM with full covariances and eps*I regularization,
// eps = 1e-6 * mean feature variance of the data.
GMMModel gmm_fit_em(const Eigen::MatrixXd& data, int K,
                    const Eigen::MatrixXd& init_means, double tol = 1e-6,
                    int max_iter = 500);

// Posterior responsibilities and hard labels under a fitted model.
ClusterAssignment gmm_assign(const GMMModel& model, const Eigen::MatrixXd& data);

// p*ln(n) - 2*lnL with p = (K-1) + K*d + K*d(d+1)/2 free parameters.
double bic(const GMMModel& model, int n_points);

// Repeats kmeans_init + gmm_fit_em with fresh derived seeds, keeping the
// best log-likelihood; stops once `window` consecutive attempts fail to
// improve. Attempts may run in parallel; the stopping rule is evaluated
// over the logical attempt order, so results are scheduling-independent.
GMMModel gmm_restart_search(const Eigen::MatrixXd& data, int K, uint64_t seed,
                            int window = 500, double tol = 1e-6,
                            int max_iter = 500);

}  // namespace ccnn
