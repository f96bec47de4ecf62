#include "ccnn/gmm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ccnn/kmeans.hpp"
#include "ccnn/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ccnn {

namespace {

constexpr double kImproveTol = 1e-9;

double regularization_eps(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  if (n < 2) return 1e-6;
  Eigen::RowVectorXd mean = data.colwise().mean();
  const double total_var =
      (data.rowwise() - mean).squaredNorm() / static_cast<double>(n - 1);
  return 1e-6 * (total_var / static_cast<double>(data.cols()));
}

struct ComponentCache {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm;  // -d/2 log(2 pi) - 1/2 log|Sigma|
};

ComponentCache make_cache(const Eigen::MatrixXd& cov) {
  ComponentCache c;
  c.llt.compute(cov);
  if (c.llt.info() != Eigen::Success)
    throw std::runtime_error("gmm: covariance not positive definite");
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    logdet += std::log(c.llt.matrixL()(i, i));
  logdet *= 2.0;
  c.log_norm = -0.5 * cov.rows() * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
  return c;
}

double log_pdf(const ComponentCache& c, const Eigen::VectorXd& diff) {
  Eigen::VectorXd y = c.llt.matrixL().solve(diff);
  return c.log_norm - 0.5 * y.squaredNorm();
}

// Fills log responsibilities (unnormalized) and returns the log-likelihood.
double e_step(const Eigen::MatrixXd& data, const GMMModel& m,
              const std::vector<ComponentCache>& caches, Eigen::MatrixXd& resp) {
  const Eigen::Index n = data.rows();
  const int K = m.K_clusters;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const double lw = m.weights[k] > 0.0
                            ? std::log(m.weights[k])
                            : -std::numeric_limits<double>::infinity();
      Eigen::VectorXd diff = data.row(i).transpose() - m.means.row(k).transpose();
      resp(i, k) = lw + log_pdf(caches[k], diff);
      mx = std::max(mx, resp(i, k));
    }
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(resp(i, k) - mx);
    const double lse = mx + std::log(sum);
    for (int k = 0; k < K; ++k) resp(i, k) = std::exp(resp(i, k) - lse);
    ll += lse;
  }
  return ll;
}

}  // namespace

GMMModel gmm_fit_em(const Eigen::MatrixXd& data, int K,
                    const Eigen::MatrixXd& init_means, double tol, int max_iter) {
  const Eigen::Index n = data.rows(), d = data.cols();
  if (K < 1) throw std::invalid_argument("gmm_fit_em: K < 1");
  if (n < K) throw std::invalid_argument("gmm_fit_em: fewer points than clusters");
  if (init_means.rows() != K || init_means.cols() != d)
    throw std::invalid_argument("gmm_fit_em: init_means shape mismatch");

  const double eps_reg = regularization_eps(data);
  const Eigen::MatrixXd eps_eye = eps_reg * Eigen::MatrixXd::Identity(d, d);

  GMMModel m;
  m.K_clusters = K;
  m.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
  m.means = init_means;
  // start from the pooled covariance
  Eigen::RowVectorXd mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd pooled =
      centered.transpose() * centered / std::max<double>(1.0, double(n - 1)) + eps_eye;
  m.covariances.assign(K, pooled);

  Eigen::MatrixXd resp(n, K);
  double prev_ll = -std::numeric_limits<double>::infinity();
  GMMModel at_peak = m;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<ComponentCache> caches(K);
    for (int k = 0; k < K; ++k) caches[k] = make_cache(m.covariances[k]);
    const double ll = e_step(data, m, caches, resp);
    if (!std::isfinite(ll))
      throw std::runtime_error("gmm_fit_em: non-finite log-likelihood");
    if (iter > 0 && ll < prev_ll) {
      // the eps*I floor makes the M-step inexact near singular components; a
      // drop means we have passed the peak, so keep the previous parameters
      const std::vector<double> trace = m.ll_trace;
      m = at_peak;
      m.ll_trace = trace;
      break;
    }
    m.log_likelihood = ll;
    m.ll_trace.push_back(ll);
    if (iter > 0 && ll - prev_ll < tol) break;
    prev_ll = ll;
    at_peak = m;
    at_peak.ll_trace.clear();

    // M-step
    for (int k = 0; k < K; ++k) {
      const double nk = resp.col(k).sum();
      if (!(nk > 0.0) || !std::isfinite(nk))
        throw std::runtime_error("gmm_fit_em: degenerate component");
      m.weights[k] = nk / static_cast<double>(n);
      Eigen::RowVectorXd mu = (resp.col(k).transpose() * data) / nk;
      m.means.row(k) = mu;
      Eigen::MatrixXd dev = data.rowwise() - mu;
      Eigen::MatrixXd cov =
          dev.transpose() * resp.col(k).asDiagonal() * dev / nk + eps_eye;
      m.covariances[k] = 0.5 * (cov + cov.transpose());  // enforce symmetry
    }
  }
  return m;
}

ClusterAssignment gmm_assign(const GMMModel& model, const Eigen::MatrixXd& data) {
  std::vector<ComponentCache> caches(model.K_clusters);
  for (int k = 0; k < model.K_clusters; ++k)
    caches[k] = make_cache(model.covariances[k]);
  ClusterAssignment out;
  out.responsibilities.resize(data.rows(), model.K_clusters);
  e_step(data, model, caches, out.responsibilities);
  out.labels.resize(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < model.K_clusters; ++k)
      if (out.responsibilities(i, k) > out.responsibilities(i, best)) best = k;
    out.labels[i] = best;
  }
  return out;
}

double bic(const GMMModel& model, int n_points) {
  const int K = model.K_clusters;
  const int d = static_cast<int>(model.means.cols());
  const double p = (K - 1) + K * d + K * d * (d + 1) / 2;
  return p * std::log(static_cast<double>(n_points)) - 2.0 * model.log_likelihood;
}

GMMModel gmm_restart_search(const Eigen::MatrixXd& data, int K, uint64_t seed,
                            int window, double tol, int max_iter) {
  GMMModel best;
  bool have_best = false;
  int since_improve = 0;
  long next = 0;
  long evaluated = 0;

#ifdef _OPENMP
  const int batch = std::max(1, omp_get_max_threads()) * 4;
#else
  const int batch = 4;
#endif

  while (since_improve < window) {
    std::vector<GMMModel> out(batch);
    std::vector<std::exception_ptr> err(batch);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < batch; ++j) {
      try {
        const uint64_t s = derive_seed(seed, static_cast<uint64_t>(next + j));
        Eigen::MatrixXd init = kmeans_init(data, K, s);
        out[j] = gmm_fit_em(data, K, init, tol, max_iter);
      } catch (...) {
        err[j] = std::current_exception();
      }
    }
    // Logical-order evaluation of the stopping rule.
    for (int j = 0; j < batch && since_improve < window; ++j) {
      if (err[j]) std::rethrow_exception(err[j]);
      ++evaluated;
      if (!have_best || out[j].log_likelihood > best.log_likelihood + kImproveTol) {
        best = std::move(out[j]);
        have_best = true;
        since_improve = 0;
      } else {
        ++since_improve;
      }
    }
    next += batch;
  }
  best.attempts_run = evaluated;
  return best;
}

}  // namespace ccnn
