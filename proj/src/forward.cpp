#include "ccnn/forward.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "ccnn/core.hpp"
#include "ccnn/d4.hpp"

namespace ccnn {

namespace {

// Cross-correlation against a pre-padded input.
RealMap conv_padded(const RealMap& padded, const RealMap& filter, int oh, int ow) {
  const int F = filter.rows();
  RealMap out(oh, ow, 0.0);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int ar = 0; ar < F; ++ar) {
        const double* prow = &padded(r + ar, c);
        const double* frow = &filter(ar, 0);
        for (int ac = 0; ac < F; ++ac) acc += frow[ac] * prow[ac];
      }
      out(r, c) = acc;
    }
  return out;
}

RealMap elementwise_pow(const RealMap& m, int p) {
  RealMap out = m;
  if (p == 2)
    for (size_t i = 0; i < out.size(); ++i) out[i] *= m[i];
  else if (p == 3)
    for (size_t i = 0; i < out.size(); ++i) out[i] *= m[i] * m[i];
  return out;
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::runtime_error(std::string(what) + ": non-finite value");
}

}  // namespace

RealMap conv_full(const RealMap& map, const RealMap& filter) {
  if (filter.rows() != filter.cols())
    throw std::invalid_argument("conv_full: non-square filter");
  const int F = filter.rows();
  const RealMap padded = zero_pad(map, F - 1);
  return conv_padded(padded, filter, map.rows() + F - 1, map.cols() + F - 1);
}

std::vector<RealMap> correlator_maps(const RealMap& dn, const RealMap& filter,
                                     int m_max) {
  if (m_max < 1 || m_max > 3)
    throw std::invalid_argument("correlator_maps: m_max outside {1,2,3}");
  std::vector<RealMap> out;
  RealMap c1 = conv_full(dn, filter);
  out.push_back(c1);
  if (m_max >= 2) {
    RealMap s2 = conv_full(elementwise_pow(dn, 2), elementwise_pow(filter, 2));
    RealMap c2(c1.rows(), c1.cols());
    for (size_t i = 0; i < c2.size(); ++i) c2[i] = c1[i] * c1[i] - s2[i];
    out.push_back(std::move(c2));
    if (m_max == 3) {
      RealMap s3 = conv_full(elementwise_pow(dn, 3), elementwise_pow(filter, 3));
      RealMap c3(c1.rows(), c1.cols());
      for (size_t i = 0; i < c3.size(); ++i)
        c3[i] = c1[i] * c1[i] * c1[i] - 3.0 * c1[i] * s2[i] + 2.0 * s3[i];
      out.push_back(std::move(c3));
    }
  }
  return out;
}

RealMap d4_symmetrized_maps(const RealMap& dn, const RealMap& filter, int m) {
  if (dn.rows() != dn.cols())
    throw std::invalid_argument("d4_symmetrized_maps: input must be square");
  RealMap acc;
  for (D4 g : kD4All) {
    RealMap fg = d4_transform(filter, g);
    RealMap cm = correlator_maps(dn, fg, m).back();
    if (acc.size() == 0) acc = std::move(cm);
    else
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += cm[i];
  }
  return d4_project(acc);
}

double spatial_pool(const RealMap& map, const RealMap& w_effective) {
  if (!map.same_shape(w_effective))
    throw std::invalid_argument("spatial_pool: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < map.size(); ++i) acc += w_effective[i] * map[i];
  return acc;
}

RealMap batchnorm_apply(const RealMap& features, BatchNormState& state,
                        BNMode mode, bool update_running) {
  const int B = features.rows(), n = features.cols();
  if (static_cast<size_t>(n) != state.running_mean.size())
    throw std::invalid_argument("batchnorm_apply: feature count mismatch");
  RealMap out(B, n);
  if (mode == BNMode::Train) {
    if (B < 2) throw std::invalid_argument("batchnorm_apply: train mode needs batch >= 2");
    for (int j = 0; j < n; ++j) {
      double mean = 0.0;
      for (int i = 0; i < B; ++i) mean += features(i, j);
      mean /= B;
      double var = 0.0;
      for (int i = 0; i < B; ++i) {
        const double d = features(i, j) - mean;
        var += d * d;
      }
      var /= B;  // biased
      const double inv = 1.0 / std::sqrt(var + state.eps);
      for (int i = 0; i < B; ++i) out(i, j) = (features(i, j) - mean) * inv;
      if (update_running) {
        state.running_mean[j] = (1.0 - state.momentum) * state.running_mean[j] +
                                state.momentum * mean;
        state.running_var[j] = (1.0 - state.momentum) * state.running_var[j] +
                               state.momentum * var;
      }
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double inv = 1.0 / std::sqrt(state.running_var[j] + state.eps);
      for (int i = 0; i < B; ++i)
        out(i, j) = (features(i, j) - state.running_mean[j]) * inv;
    }
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

FilterVariants make_filter_variants(const CCNNModel& model) {
  FilterVariants fv;
  fv.F = model.config.filter_size;
  fv.n_filters = model.config.n_filters;
  fv.f.reserve(fv.n_filters * 8);
  for (int a = 0; a < fv.n_filters; ++a) {
    const RealMap eff = model.filters.effective(a);
    for (D4 g : kD4All) {
      RealMap fg = d4_transform(eff, g);
      fv.f2.push_back(elementwise_pow(fg, 2));
      fv.f3.push_back(elementwise_pow(fg, 3));
      fv.f.push_back(std::move(fg));
    }
  }
  return fv;
}

SnapshotTrace snapshot_forward(const ModelConfig& config, const FilterVariants& fv,
                               const RealMap& dn, const RealMap& w_eff,
                               bool keep_trace) {
  if (dn.rows() != config.lattice_height || dn.cols() != config.lattice_width)
    throw std::invalid_argument("snapshot_forward: input shape != lattice");
  const int F = config.filter_size;
  const int oh = config.out_rows(), ow = config.out_cols();
  const int n_var = 8;

  SnapshotTrace t;
  t.p1 = zero_pad(dn, F - 1);
  t.p2 = elementwise_pow(t.p1, 2);
  if (config.m_max == 3) t.p3 = elementwise_pow(t.p1, 3);

  t.features.assign(config.n_features(), 0.0);
  if (keep_trace) {
    t.c1.resize(static_cast<size_t>(config.n_filters) * n_var);
    t.s2.resize(static_cast<size_t>(config.n_filters) * n_var);
    t.pooled_map.assign(config.n_features(), RealMap(oh, ow, 0.0));
  }

  for (int a = 0; a < config.n_filters; ++a) {
    RealMap m2(oh, ow, 0.0), m3;
    if (config.m_max == 3) m3 = RealMap(oh, ow, 0.0);
    for (int g = 0; g < n_var; ++g) {
      const size_t vi = static_cast<size_t>(a) * n_var + g;
      RealMap c1 = conv_padded(t.p1, fv.f[vi], oh, ow);
      RealMap s2 = conv_padded(t.p2, fv.f2[vi], oh, ow);
      for (size_t i = 0; i < m2.size(); ++i) m2[i] += c1[i] * c1[i] - s2[i];
      if (config.m_max == 3) {
        RealMap s3 = conv_padded(t.p3, fv.f3[vi], oh, ow);
        for (size_t i = 0; i < m3.size(); ++i)
          m3[i] += c1[i] * (c1[i] * c1[i] - 3.0 * s2[i]) + 2.0 * s3[i];
      }
      if (keep_trace) {
        t.c1[vi] = std::move(c1);
        t.s2[vi] = std::move(s2);
      }
    }
    // Pooling the unprojected group sum equals pooling the projected map
    // because w_eff is D4-symmetric and the projection is self-adjoint.
    t.features[config.feature_index(a, 2)] = spatial_pool(m2, w_eff);
    if (config.m_max == 3)
      t.features[config.feature_index(a, 3)] = spatial_pool(m3, w_eff);
    if (keep_trace) {
      t.pooled_map[config.feature_index(a, 2)] = std::move(m2);
      if (config.m_max == 3) t.pooled_map[config.feature_index(a, 3)] = std::move(m3);
    }
  }
  return t;
}

}  // namespace detail

std::vector<double> snapshot_features(const CCNNModel& model, const RealMap& dn) {
  const detail::FilterVariants fv = detail::make_filter_variants(model);
  const RealMap w_eff = model.w.effective();
  return detail::snapshot_forward(model.config, fv, dn, w_eff, false).features;
}

std::vector<double> forward(CCNNModel& model, const std::vector<RealMap>& batch,
                            BNMode mode, bool update_bn) {
  model.config.validate();
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");
  if (model.head.nonneg)
    for (double b : model.head.beta)
      if (b < 0.0) throw std::invalid_argument("forward: nonneg_beta violated");

  const detail::FilterVariants fv = detail::make_filter_variants(model);
  const RealMap w_eff = model.w.effective();
  const int B = static_cast<int>(batch.size());
  const int n = model.config.n_features();

  RealMap features(B, n);
  std::vector<std::exception_ptr> errors(B);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < B; ++i) {
    try {
      const auto t = detail::snapshot_forward(model.config, fv, batch[i], w_eff, false);
      for (int j = 0; j < n; ++j) features(i, j) = t.features[j];
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  check_finite(features.data(), "forward features");

  RealMap bn = batchnorm_apply(features, model.bn, mode, update_bn);
  std::vector<double> yhat(B);
  for (int i = 0; i < B; ++i) {
    double z = -model.head.bias;
    for (int j = 0; j < n; ++j) z += model.head.beta[j] * bn(i, j);
    yhat[i] = sigmoid(z);
  }
  check_finite(yhat, "forward output");
  return yhat;
}

double forward_from_features(const CCNNModel& model, const std::vector<double>& features) {
  const int n = model.config.n_features();
  if (static_cast<int>(features.size()) != n)
    throw std::invalid_argument("forward_from_features: feature count mismatch");
  double z = -model.head.bias;
  for (int j = 0; j < n; ++j) {
    const double bn = (features[j] - model.bn.running_mean[j]) /
                      std::sqrt(model.bn.running_var[j] + model.bn.eps);
    z += model.head.beta[j] * bn;
  }
  return sigmoid(z);
}

}  // namespace ccnn
