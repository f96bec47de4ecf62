#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ccnn/datagen.hpp"
#include "ccnn/kmeans.hpp"
#include "ccnn/unsupervised.hpp"
#include "test_util.hpp"

using namespace ccnn;
using namespace ccnn::testutil;

namespace {

Eigen::MatrixXd blobs(const std::vector<Eigen::Vector2d>& centers, int per_blob,
                      double sigma, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd data(per_blob * centers.size(), 2);
  Eigen::Index row = 0;
  for (const auto& c : centers)
    for (int i = 0; i < per_blob; ++i, ++row) {
      data(row, 0) = c.x() + sigma * rng.normal();
      data(row, 1) = c.y() + sigma * rng.normal();
    }
  return data;
}

}  // namespace

TEST_CASE("pca_fit basics") {
  SUBCASE("two points: PC1 along the difference, variance = half squared distance") {
    Eigen::MatrixXd x(2, 3);
    x.row(0) << 1.0, 2.0, 3.0;
    x.row(1) << 3.0, 2.0, 7.0;
    const PCAModel m = pca_fit(x, 1);
    Eigen::VectorXd diff(3);
    diff << 2.0, 0.0, 4.0;
    diff.normalize();
    CHECK((m.components.row(0).transpose() - diff).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.explained_variance[0] == doctest::Approx(10.0).epsilon(1e-12));
  }

  SUBCASE("axis-aligned variances sort descending with sign fix") {
    Rng rng(7);
    Eigen::MatrixXd x(400, 2);
    for (int i = 0; i < 400; ++i) {
      x(i, 0) = 2.0 * rng.normal();  // variance 4
      x(i, 1) = 1.0 * rng.normal();  // variance 1
    }
    const PCAModel m = pca_fit(x, 2);
    CHECK(std::abs(m.components(0, 0)) > 0.99);
    CHECK(m.components(0, 0) > 0.0);  // deterministic sign
    CHECK(m.explained_variance[0] > m.explained_variance[1]);
    CHECK(m.explained_variance[0] == doctest::Approx(4.0).epsilon(0.2));
  }

  SUBCASE("zero-sum inputs give zero-sum components") {
    Rng rng(9);
    Eigen::MatrixXd x(30, 8);
    for (int i = 0; i < 30; ++i) {
      double s = 0.0;
      for (int j = 0; j < 8; ++j) {
        x(i, j) = rng.normal();
        s += x(i, j);
      }
      for (int j = 0; j < 8; ++j) x(i, j) -= s / 8.0;
    }
    const PCAModel m = pca_fit(x, 4);
    for (int pc = 0; pc < 4; ++pc)
      CHECK(std::abs(m.components.row(pc).sum()) < 1e-8);
  }

  SUBCASE("degenerate and invalid inputs") {
    Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 3);
    CHECK_THROWS(pca_fit(same, 1));
    Eigen::MatrixXd two(2, 3);
    two.setRandom();
    CHECK_THROWS(pca_fit(two, 2));  // n_components > points-1
  }
}

TEST_CASE("pca agrees with an SVD of the centered data") {
  Rng rng(77);
  Eigen::MatrixXd x(40, 12);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  const PCAModel m = pca_fit(x, 6);

  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  for (int pc = 0; pc < 6; ++pc) {
    const double sv = svd.singularValues()[pc];
    CHECK(rel_err(m.explained_variance[pc], sv * sv / (x.rows() - 1.0)) < 1e-9);
    // same axis up to sign
    const double overlap =
        std::abs(m.components.row(pc).dot(svd.matrixV().col(pc).transpose()));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("pca components are orthonormal and reproduce projected variance") {
  Rng rng(21);
  Eigen::MatrixXd x(60, 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  const PCAModel m = pca_fit(x, 5);
  const Eigen::MatrixXd gram = m.components * m.components.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);

  const Eigen::MatrixXd proj = pca_project(m, x);
  Eigen::RowVectorXd mean = proj.colwise().mean();
  const Eigen::MatrixXd centered = proj.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (x.rows() - 1.0);
  for (int i = 0; i < 5; ++i) {
    CHECK(rel_err(cov(i, i), m.explained_variance[i]) < 1e-6);
    for (int j = 0; j < 5; ++j)
      if (i != j) CHECK(std::abs(cov(i, j)) < 1e-8);
  }
}

TEST_CASE("pca_project closed forms") {
  Rng rng(33);
  Eigen::MatrixXd x(20, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  const PCAModel m = pca_fit(x, 3);

  // the mean projects to zero
  Eigen::MatrixXd mean_row = m.mean.transpose();
  CHECK(pca_project(m, mean_row).cwiseAbs().maxCoeff() < 1e-12);

  // mean + components[0] projects to e1
  Eigen::MatrixXd shifted = (m.mean + m.components.row(0).transpose()).transpose();
  const Eigen::MatrixXd p = pca_project(m, shifted);
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(p(0, 1)) < 1e-10);

  // exact reconstruction of rank-limited data
  Eigen::MatrixXd low = Eigen::MatrixXd::Zero(20, 6);
  Eigen::VectorXd dir(6);
  dir << 1, 2, 3, 4, 5, 6;
  dir.normalize();
  for (int i = 0; i < 20; ++i) low.row(i) = (i * 0.1) * dir.transpose();
  const PCAModel lm = pca_fit(low, 1);
  const Eigen::MatrixXd back =
      (pca_project(lm, low) * lm.components).rowwise() + lm.mean.transpose();
  CHECK((back - low).cwiseAbs().maxCoeff() < 1e-8);

  CHECK_THROWS(pca_project(m, Eigen::MatrixXd::Zero(3, 4)));
}

TEST_CASE("kmeans_init") {
  SUBCASE("K = points returns the points") {
    Eigen::MatrixXd x(3, 2);
    x << 0, 0, 5, 5, -3, 4;
    const Eigen::MatrixXd c = kmeans_init(x, 3, 1);
    // every point appears among the centroids
    for (int i = 0; i < 3; ++i) {
      double best = 1e300;
      for (int k = 0; k < 3; ++k)
        best = std::min(best, (x.row(i) - c.row(k)).squaredNorm());
      CHECK(best < 1e-20);
    }
  }

  SUBCASE("two far pairs: centroids at the midpoints") {
    Eigen::MatrixXd x(4, 2);
    x << 0, 0, 0, 1, 100, 100, 100, 101;
    const Eigen::MatrixXd c = kmeans_init(x, 2, 3);
    std::vector<Eigen::RowVector2d> expect{{0.0, 0.5}, {100.0, 100.5}};
    for (const auto& e : expect) {
      double best = 1e300;
      for (int k = 0; k < 2; ++k) best = std::min(best, (c.row(k) - e).squaredNorm());
      CHECK(best < 1e-20);
    }
  }

  SUBCASE("determinism and error") {
    const Eigen::MatrixXd x = blobs({{0, 0}, {10, 10}}, 20, 1.0, 5);
    const Eigen::MatrixXd a = kmeans_init(x, 4, 42);
    const Eigen::MatrixXd b = kmeans_init(x, 4, 42);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(kmeans_init(x, 41, 1));
  }
}

TEST_CASE("gmm_fit_em") {
  SUBCASE("K=1 closed form") {
    const Eigen::MatrixXd x = blobs({{1, -2}}, 50, 1.5, 7);
    Eigen::MatrixXd init = x.colwise().mean();
    const GMMModel m = gmm_fit_em(x, 1, init);
    CHECK((m.means.row(0).transpose() -
           Eigen::Vector2d(x.col(0).mean(), x.col(1).mean()))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK(m.weights[0] == doctest::Approx(1.0));
    // covariance equals the biased sample covariance plus the eps floor
    Eigen::RowVectorXd mu = x.colwise().mean();
    Eigen::MatrixXd dev = x.rowwise() - mu;
    Eigen::MatrixXd cov = dev.transpose() * dev / x.rows();
    CHECK((m.covariances[0] - cov).cwiseAbs().maxCoeff() < 1e-4);
  }

  SUBCASE("two separated blobs: one-hot responsibilities, even weights") {
    const Eigen::MatrixXd x = blobs({{0, 0}, {20, 0}}, 100, 1.0, 11);
    const Eigen::MatrixXd init = kmeans_init(x, 2, 3);
    const GMMModel m = gmm_fit_em(x, 2, init);
    const ClusterAssignment asg = gmm_assign(m, x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double top = asg.responsibilities.row(i).maxCoeff();
      CHECK(top > 1.0 - 1e-6);
      CHECK(asg.responsibilities.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(std::abs(m.weights[0] - 0.5) < 0.05);
  }

  SUBCASE("log-likelihood trace is monotone non-decreasing") {
    const Eigen::MatrixXd x = blobs({{0, 0}, {4, 1}, {-3, 5}}, 40, 1.2, 13);
    const GMMModel m = gmm_fit_em(x, 3, kmeans_init(x, 3, 5));
    for (size_t i = 1; i < m.ll_trace.size(); ++i)
      CHECK(m.ll_trace[i] >= m.ll_trace[i - 1] - 1e-9);
  }
}

TEST_CASE("bic") {
  GMMModel m;
  m.K_clusters = 1;
  m.means = Eigen::MatrixXd::Zero(1, 1);
  m.log_likelihood = 0.0;
  // K=1, d=1: p = 0 + 1 + 1 = 2
  CHECK(bic(m, 100) == doctest::Approx(2.0 * std::log(100.0)).epsilon(1e-12));
  const double b1 = bic(m, 100);
  GMMModel m2 = m;
  m2.K_clusters = 2;
  m2.means = Eigen::MatrixXd::Zero(2, 1);
  CHECK(bic(m2, 100) > b1);  // same likelihood, more parameters

  // well-separated 3 blobs: BIC minimized at K = 3
  const Eigen::MatrixXd x = blobs({{0, 0}, {15, 0}, {0, 15}}, 60, 1.0, 17);
  double best_bic = 1e300;
  int best_k = 0;
  for (int k = 2; k <= 4; ++k) {
    const GMMModel g = gmm_restart_search(x, k, 19, 30);
    const double b = bic(g, static_cast<int>(x.rows()));
    if (b < best_bic) {
      best_bic = b;
      best_k = k;
    }
  }
  CHECK(best_k == 3);
}

TEST_CASE("gmm_restart_search determinism and stopping") {
  const Eigen::MatrixXd x = blobs({{0, 0}, {12, 0}}, 30, 1.0, 23);
  const GMMModel a = gmm_restart_search(x, 2, 7, 25);
  const GMMModel b = gmm_restart_search(x, 2, 7, 25);
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK((a.means - b.means).cwiseAbs().maxCoeff() == 0.0);

  // trivially separable data: the restart winner matches a single run
  const GMMModel single = gmm_fit_em(x, 2, kmeans_init(x, 2, ccnn::derive_seed(7, 0)));
  CHECK(std::abs(a.log_likelihood - single.log_likelihood) < 1e-6);

  // the counter only starts expiring after the last improvement, so at least
  // window + 1 attempts always run
  CHECK(a.attempts_run >= 26);
}

TEST_CASE("cluster_phase_diagram") {
  SUBCASE("identical sets collapse to one cluster") {
    Rng rng(3);
    const Snapshot s = random_snapshot(Lattice{6, 6}, rng, 0.4);
    Dataset ds;
    for (int i = 0; i < 8; ++i) {
      SnapshotSet set;
      set.point = {static_cast<double>(i), 0.0};
      for (int j = 0; j < 5; ++j) set.snapshots.push_back(s);
      ds.sets.push_back(set);
    }
    const UnsupervisedResult res = cluster_phase_diagram(ds, 8, 2, 2, 1);
    CHECK(res.degenerate);
    for (int l : res.assignment.labels) CHECK(l == res.assignment.labels[0]);
  }

  SUBCASE("two-phase synthetic grid separates cleanly") {
    GenerationPlan plan;
    plan.lattice = {9, 9};
    plan.count = 60;
    plan.delta_values = {0.0, 1.0, 2.0, 3.0};
    plan.rb_values = {0.0, 1.0, 2.0, 3.0};
    plan.phases.push_back(make_phase_spec("checkerboard", 0.02));
    plan.phases.push_back(make_phase_spec("disordered", 0.02));
    std::vector<int> truth;
    for (int i = 0; i < 16; ++i) {
      const bool checker = i % 4 < 2;
      plan.layout.push_back(checker ? "checkerboard" : "disordered");
      truth.push_back(checker);
    }
    const GeneratedDataset gen = generate_dataset(plan, 5);
    const UnsupervisedResult res =
        cluster_phase_diagram(gen.dataset, 16, 3, 2, 11, 30);
    CHECK(cluster_purity(res.assignment.labels, truth) >= 0.95);

    // scale invariance of the partition: PCA + full-covariance GMM adapt
    Eigen::MatrixXd scaled = res.features * 2.0;
    const PCAModel pca2 = pca_fit(scaled, 3);
    const GMMModel gmm2 = gmm_restart_search(pca_project(pca2, scaled), 2, 11, 30);
    const ClusterAssignment asg2 = gmm_assign(gmm2, pca_project(pca2, scaled));
    CHECK(adjusted_rand_index(res.assignment.labels, asg2.labels) == 1.0);

    // permuting the dataset permutes labels consistently (same partition)
    Dataset reversed = gen.dataset;
    reversed.grid.reset();
    std::reverse(reversed.sets.begin(), reversed.sets.end());
    const UnsupervisedResult res2 = cluster_phase_diagram(reversed, 16, 3, 2, 11, 30);
    std::vector<int> realigned(res2.assignment.labels.rbegin(),
                               res2.assignment.labels.rend());
    CHECK(adjusted_rand_index(res.assignment.labels, realigned) == 1.0);
  }
}
