#include "ccnn/gradients.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "ccnn/d4.hpp"

namespace ccnn {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// A(a) = sum_x weighted(x) * padded(x + a), the adjoint of conv_padded.
RealMap correlate_taps(const RealMap& weighted, const RealMap& padded, int F) {
  RealMap out(F, F, 0.0);
  const int oh = weighted.rows(), ow = weighted.cols();
  for (int ar = 0; ar < F; ++ar)
    for (int ac = 0; ac < F; ++ac) {
      double acc = 0.0;
      for (int r = 0; r < oh; ++r) {
        const double* wrow = &weighted(r, 0);
        const double* prow = &padded(r + ar, ac);
        for (int c = 0; c < ow; ++c) acc += wrow[c] * prow[c];
      }
      out(ar, ac) = acc;
    }
  return out;
}

double ce_term(double y, double p) {
  return -(y * std::log(p) + (1.0 - y) * std::log1p(-p));
}

struct SnapshotGrad {
  std::vector<RealMap> f_eff;  // per filter, d loss / d effective filter
  RealMap w_eff;               // d loss / d effective w (learned mode)
};

// Backpropagates dL/dc (one coefficient per feature) through the correlator
// maps of a single snapshot.
SnapshotGrad snapshot_backward(const ModelConfig& config,
                               const detail::FilterVariants& fv,
                               const detail::SnapshotTrace& t,
                               const RealMap& w_eff,
                               const std::vector<double>& dl_dc) {
  const int F = config.filter_size;
  const int oh = config.out_rows(), ow = config.out_cols();
  SnapshotGrad g;
  g.f_eff.assign(config.n_filters, RealMap(F, F, 0.0));
  if (!config.uniform_w) {
    g.w_eff = RealMap(oh, ow, 0.0);
    for (int j = 0; j < config.n_features(); ++j) {
      const double lam = dl_dc[j];
      if (lam == 0.0) continue;
      const RealMap& m = t.pooled_map[j];
      for (size_t i = 0; i < g.w_eff.size(); ++i) g.w_eff[i] += lam * m[i];
    }
  }

  // Shared tap sums over the padded powers.
  const RealMap a2 = correlate_taps(w_eff, t.p2, F);
  RealMap b4;
  if (config.m_max == 3) b4 = correlate_taps(w_eff, t.p3, F);

  RealMap wc1(oh, ow), tmp(oh, ow);
  for (int a = 0; a < config.n_filters; ++a) {
    const double lam2 = dl_dc[config.feature_index(a, 2)];
    const double lam3 = config.m_max == 3 ? dl_dc[config.feature_index(a, 3)] : 0.0;
    if (lam2 == 0.0 && lam3 == 0.0) continue;
    for (int gi = 0; gi < 8; ++gi) {
      const size_t vi = static_cast<size_t>(a) * 8 + gi;
      const RealMap& c1 = t.c1[vi];
      const RealMap& s2 = t.s2[vi];
      const RealMap& fg = fv.f[vi];
      RealMap gf(F, F, 0.0);

      for (size_t i = 0; i < wc1.size(); ++i) wc1[i] = w_eff[i] * c1[i];
      const RealMap q1 = correlate_taps(wc1, t.p1, F);  // sum w C1 P1(x+a)
      for (size_t i = 0; i < gf.size(); ++i)
        gf[i] += lam2 * 2.0 * (q1[i] - fg[i] * a2[i]);

      if (lam3 != 0.0) {
        for (size_t i = 0; i < tmp.size(); ++i)
          tmp[i] = w_eff[i] * (c1[i] * c1[i] - s2[i]);
        const RealMap q2 = correlate_taps(tmp, t.p1, F);  // sum w (C1^2 - S2) P1
        const RealMap q3 = correlate_taps(wc1, t.p2, F);  // sum w C1 P2
        for (size_t i = 0; i < gf.size(); ++i)
          gf[i] += lam3 * (3.0 * q2[i] - 6.0 * fg[i] * q3[i] +
                           6.0 * fg[i] * fg[i] * b4[i]);
      }

      // pull the variant gradient back to the untransformed filter
      const RealMap back = d4_transform(gf, d4_inverse(kD4All[gi]));
      for (size_t i = 0; i < back.size(); ++i) g.f_eff[a][i] += back[i];
    }
  }
  return g;
}

}  // namespace

double loss(const CCNNModel& model, const std::vector<RealMap>& batch,
            const std::vector<double>& labels, double gamma) {
  if (batch.size() != labels.size())
    throw std::invalid_argument("loss: batch/label size mismatch");
  for (double y : labels)
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("loss: labels must be 0/1");

  CCNNModel scratch = model;  // running stats untouched
  const std::vector<double> yhat = forward(scratch, batch, BNMode::Train, false);
  double ce = 0.0;
  for (size_t i = 0; i < yhat.size(); ++i) ce += ce_term(labels[i], clamp_prob(yhat[i]));
  ce /= static_cast<double>(yhat.size());

  double l1 = 0.0;
  for (const RealMap& f : model.filters.raw)
    for (size_t i = 0; i < f.size(); ++i) l1 += std::abs(f[i]);
  return ce + gamma * l1;
}

TrainStep gradients(CCNNModel& model, const std::vector<RealMap>& batch,
                    const std::vector<double>& labels, double gamma,
                    bool update_bn) {
  model.config.validate();
  const int B = static_cast<int>(batch.size());
  if (B < 2) throw std::invalid_argument("gradients: train mode needs batch >= 2");
  if (labels.size() != batch.size())
    throw std::invalid_argument("gradients: batch/label size mismatch");

  const detail::FilterVariants fv = detail::make_filter_variants(model);
  const RealMap w_eff = model.w.effective();
  const ModelConfig& config = model.config;
  const int n = config.n_features();

  // Phase 1: per-snapshot forward with traces (parallel).
  std::vector<detail::SnapshotTrace> traces(B);
  std::vector<std::exception_ptr> errors(B);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < B; ++i) {
    try {
      traces[i] = detail::snapshot_forward(config, fv, batch[i], w_eff, true);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RealMap features(B, n);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < n; ++j) features(i, j) = traces[i].features[j];

  // Phase 2: BatchNorm + head (serial).
  RealMap xhat = batchnorm_apply(features, model.bn, BNMode::Train, update_bn);
  std::vector<double> sigma_inv(n);
  for (int j = 0; j < n; ++j) {
    double mean = 0.0;
    for (int i = 0; i < B; ++i) mean += features(i, j);
    mean /= B;
    double var = 0.0;
    for (int i = 0; i < B; ++i) {
      const double d = features(i, j) - mean;
      var += d * d;
    }
    var /= B;
    sigma_inv[j] = 1.0 / std::sqrt(var + model.bn.eps);
  }

  std::vector<double> yhat(B), dz(B);
  double ce = 0.0;
  for (int i = 0; i < B; ++i) {
    double z = -model.head.bias;
    for (int j = 0; j < n; ++j) z += model.head.beta[j] * xhat(i, j);
    if (!std::isfinite(z)) throw std::runtime_error("gradients: non-finite logit");
    yhat[i] = sigmoid(z);
    ce += ce_term(labels[i], clamp_prob(yhat[i]));
    dz[i] = (yhat[i] - labels[i]) / B;
  }
  ce /= B;

  TrainStep step;
  step.grad.beta.assign(n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < B; ++i) step.grad.beta[j] += dz[i] * xhat(i, j);
  step.grad.bias = 0.0;
  for (int i = 0; i < B; ++i) step.grad.bias -= dz[i];

  // BatchNorm backward: dL/dc_ij from dL/dxhat_ij = dz_i * beta_j.
  RealMap dl_dc(B, n);
  for (int j = 0; j < n; ++j) {
    double mean_d = 0.0, mean_dx = 0.0;
    for (int i = 0; i < B; ++i) {
      const double d = dz[i] * model.head.beta[j];
      mean_d += d;
      mean_dx += d * xhat(i, j);
    }
    mean_d /= B;
    mean_dx /= B;
    for (int i = 0; i < B; ++i) {
      const double d = dz[i] * model.head.beta[j];
      dl_dc(i, j) = sigma_inv[j] * (d - mean_d - xhat(i, j) * mean_dx);
    }
  }

  // Phase 3: per-snapshot parameter gradients (parallel)...
  std::vector<SnapshotGrad> grads(B);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < B; ++i) {
    try {
      std::vector<double> coeff(n);
      for (int j = 0; j < n; ++j) coeff[j] = dl_dc(i, j);
      grads[i] = snapshot_backward(config, fv, traces[i], w_eff, coeff);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // ... phase 4: ordered reduction.
  const int F = config.filter_size;
  std::vector<RealMap> g_eff(config.n_filters, RealMap(F, F, 0.0));
  RealMap g_weff;
  if (!config.uniform_w) g_weff = RealMap(config.out_rows(), config.out_cols(), 0.0);
  for (int i = 0; i < B; ++i) {
    for (int a = 0; a < config.n_filters; ++a)
      for (size_t k = 0; k < g_eff[a].size(); ++k) g_eff[a][k] += grads[i].f_eff[a][k];
    if (!config.uniform_w)
      for (size_t k = 0; k < g_weff.size(); ++k) g_weff[k] += grads[i].w_eff[k];
  }

  // Chain through the reparametrizations: f = |raw| and w = P_D4(raw).
  step.grad.raw_filters.assign(config.n_filters, RealMap(F, F, 0.0));
  for (int a = 0; a < config.n_filters; ++a)
    for (size_t k = 0; k < g_eff[a].size(); ++k) {
      const double s = sign0(model.filters.raw[a][k]);
      step.grad.raw_filters[a][k] = (g_eff[a][k] + gamma) * s;
    }
  if (!config.uniform_w) step.grad.raw_w = d4_project(g_weff);

  double l1 = 0.0;
  for (const RealMap& f : model.filters.raw)
    for (size_t i = 0; i < f.size(); ++i) l1 += std::abs(f[i]);
  step.loss = ce + gamma * l1;

  for (const RealMap& g : step.grad.raw_filters)
    for (size_t i = 0; i < g.size(); ++i)
      if (!std::isfinite(g[i])) throw std::runtime_error("gradients: non-finite gradient");
  return step;
}

}  // namespace ccnn
