#include "ccnn/train.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ccnn/forward.hpp"

namespace ccnn {

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw std::invalid_argument("TrainConfig: lr0 must be positive");
  if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size < 2");
  if (gamma < 0.0) throw std::invalid_argument("TrainConfig: gamma < 0");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs < 0");
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("TrainConfig: val_fraction outside (0,1)");
  arch.validate();
}

PoolSplit split_pool(const LabeledPool& pool, double val_fraction, uint64_t seed) {
  PoolSplit split;
  split.train_idx.resize(pool.phases.size());
  split.val_idx.resize(pool.phases.size());
  for (size_t p = 0; p < pool.phases.size(); ++p) {
    const int n = static_cast<int>(pool.phases[p].maps.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0x73706c6974ULL + p));
    rng.shuffle(idx);
    const int n_val = static_cast<int>(std::floor(val_fraction * n));
    split.val_idx[p].assign(idx.begin(), idx.begin() + n_val);
    split.train_idx[p].assign(idx.begin() + n_val, idx.end());
  }
  return split;
}

Batch balanced_sampler(const LabeledPool& pool, const PoolSplit& split,
                       int batch_size, Rng& rng) {
  if (pool.target < 0 || pool.target >= static_cast<int>(pool.phases.size()))
    throw std::invalid_argument("balanced_sampler: bad target index");
  if (split.train_idx[pool.target].empty())
    throw std::invalid_argument("balanced_sampler: target phase pool is empty");
  std::vector<int> others;
  for (int p = 0; p < static_cast<int>(pool.phases.size()); ++p) {
    if (p == pool.target) continue;
    if (split.train_idx[p].empty())
      throw std::invalid_argument("balanced_sampler: empty phase pool: " +
                                  pool.phases[p].name);
    others.push_back(p);
  }

  Batch batch;
  batch.maps.reserve(batch_size);
  batch.labels.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    int phase;
    if (others.empty() || rng.bernoulli(0.5)) {
      phase = pool.target;
    } else {
      phase = others[rng.uniform_int(others.size())];
    }
    const auto& idx = split.train_idx[phase];
    batch.maps.push_back(pool.phases[phase].maps[idx[rng.uniform_int(idx.size())]]);
    batch.labels.push_back(phase == pool.target ? 1.0 : 0.0);
    batch.phases.push_back(phase);
  }
  return batch;
}

double cosine_lr(long t, long T, double lr0) {
  if (t < 0 || t > T) throw std::invalid_argument("cosine_lr: t outside [0, T]");
  return lr0 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / T)) / 2.0;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void clamp_nonneg(std::span<double> params) {
  for (double& p : params) p = std::max(0.0, p);
}

namespace {

// Flat layout: [raw filters | raw w (learned mode) | beta | bias].
struct ParamLayout {
  int n_filters = 0;
  size_t filter_len = 0;
  size_t w_len = 0;
  size_t n_beta = 0;
  size_t beta_offset() const { return n_filters * filter_len + w_len; }
  size_t total() const { return beta_offset() + n_beta + 1; }
};

ParamLayout layout_of(const CCNNModel& m) {
  ParamLayout l;
  l.n_filters = m.config.n_filters;
  l.filter_len = m.filters.raw[0].size();
  l.w_len = m.config.uniform_w ? 0 : m.w.raw.size();
  l.n_beta = m.head.beta.size();
  return l;
}

std::vector<double> pack_params(const CCNNModel& m, const ParamLayout& l) {
  std::vector<double> v;
  v.reserve(l.total());
  for (const RealMap& f : m.filters.raw) v.insert(v.end(), f.data().begin(), f.data().end());
  if (!m.config.uniform_w) v.insert(v.end(), m.w.raw.data().begin(), m.w.raw.data().end());
  v.insert(v.end(), m.head.beta.begin(), m.head.beta.end());
  v.push_back(m.head.bias);
  return v;
}

void unpack_params(CCNNModel& m, const ParamLayout& l, const std::vector<double>& v) {
  size_t off = 0;
  for (RealMap& f : m.filters.raw) {
    std::copy(v.begin() + off, v.begin() + off + l.filter_len, f.data().begin());
    off += l.filter_len;
  }
  if (!m.config.uniform_w) {
    std::copy(v.begin() + off, v.begin() + off + l.w_len, m.w.raw.data().begin());
    off += l.w_len;
  }
  std::copy(v.begin() + off, v.begin() + off + l.n_beta, m.head.beta.begin());
  off += l.n_beta;
  m.head.bias = v[off];
}

std::vector<double> pack_grads(const GradientBundle& g, const ParamLayout& l,
                               bool uniform_w) {
  std::vector<double> v;
  v.reserve(l.total());
  for (const RealMap& f : g.raw_filters) v.insert(v.end(), f.data().begin(), f.data().end());
  if (!uniform_w) v.insert(v.end(), g.raw_w.data().begin(), g.raw_w.data().end());
  v.insert(v.end(), g.beta.begin(), g.beta.end());
  v.push_back(g.bias);
  return v;
}

size_t pool_train_size(const PoolSplit& split) {
  size_t n = 0;
  for (const auto& idx : split.train_idx) n += idx.size();
  return n;
}

void gather_val(const LabeledPool& pool, const PoolSplit& split,
                std::vector<RealMap>& maps, std::vector<double>& labels) {
  for (size_t p = 0; p < pool.phases.size(); ++p)
    for (int i : split.val_idx[p]) {
      maps.push_back(pool.phases[p].maps[i]);
      labels.push_back(static_cast<int>(p) == pool.target ? 1.0 : 0.0);
    }
}

}  // namespace

namespace {

TrainResult train_with_split(const LabeledPool& pool, const TrainConfig& config,
                             const PoolSplit& split) {
  config.validate();
  if (pool.phases.empty()) throw std::invalid_argument("train: empty pool");

  // lattice comes from the data
  TrainConfig cfg = config;
  const RealMap& first = pool.phases[0].maps.at(0);
  cfg.arch.lattice_height = first.rows();
  cfg.arch.lattice_width = first.cols();

  TrainResult result;
  result.model = init_model(cfg.arch, cfg.seed);
  CCNNModel& model = result.model;

  std::vector<RealMap> val_maps;
  std::vector<double> val_labels;
  gather_val(pool, split, val_maps, val_labels);

  const long steps_per_epoch = static_cast<long>(
      (pool_train_size(split) + cfg.batch_size - 1) / cfg.batch_size);
  const long T = static_cast<long>(cfg.epochs) * steps_per_epoch;

  const ParamLayout lay = layout_of(model);
  std::vector<double> params = pack_params(model, lay);
  AdamState adam;
  Rng sampler_rng(derive_seed(cfg.seed, 0x73616d706cULL));

  long t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    result.report.lr_trace.push_back(cosine_lr(t, T, cfg.lr0));
    for (long s = 0; s < steps_per_epoch; ++s, ++t) {
      const double lr = cosine_lr(t, T, cfg.lr0);
      Batch batch = balanced_sampler(pool, split, cfg.batch_size, sampler_rng);
      TrainStep step = gradients(model, batch.maps, batch.labels, cfg.gamma);
      epoch_loss += step.loss;
      const std::vector<double> g = pack_grads(step.grad, lay, cfg.arch.uniform_w);
      adam_step(params, g, adam, lr);
      if (cfg.arch.nonneg_beta)
        clamp_nonneg(std::span<double>(params).subspan(lay.beta_offset(), lay.n_beta));
      unpack_params(model, lay, params);
    }
    result.report.epoch_loss.push_back(epoch_loss / steps_per_epoch);
    result.report.val_accuracy.push_back(
        val_maps.empty() ? 0.0 : accuracy(model, val_maps, val_labels));
  }
  return result;
}

}  // namespace

TrainResult train(const LabeledPool& pool, const TrainConfig& config) {
  config.validate();
  return train_with_split(pool, config,
                          split_pool(pool, config.val_fraction, config.seed));
}

double accuracy(const CCNNModel& model, const std::vector<RealMap>& maps,
                const std::vector<double>& labels) {
  if (maps.empty() || maps.size() != labels.size())
    throw std::invalid_argument("accuracy: bad inputs");
  CCNNModel m = model;
  const std::vector<double> yhat = forward(m, maps, BNMode::Eval, false);
  int good = 0;
  for (size_t i = 0; i < yhat.size(); ++i)
    if ((yhat[i] >= 0.5 ? 1.0 : 0.0) == labels[i]) ++good;
  return static_cast<double>(good) / static_cast<double>(yhat.size());
}

CVReport cross_validate(const LabeledPool& pool, const TrainConfig& config,
                        int folds, int seeds) {
  if (folds < 2) throw std::invalid_argument("cross_validate: folds < 2");
  if (seeds < 1) throw std::invalid_argument("cross_validate: seeds < 1");
  for (const PhasePool& p : pool.phases)
    if (static_cast<int>(p.maps.size()) < folds)
      throw std::invalid_argument("cross_validate: pool too small for folds");

  CVReport report;
  for (int f = 0; f < folds; ++f) {
    // fold split: chunk f of each phase's seeded shuffle is validation
    PoolSplit split;
    split.train_idx.resize(pool.phases.size());
    split.val_idx.resize(pool.phases.size());
    for (size_t p = 0; p < pool.phases.size(); ++p) {
      const int n = static_cast<int>(pool.phases[p].maps.size());
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(derive_seed(config.seed, 0x666f6c64ULL + p));
      rng.shuffle(idx);
      for (int i = 0; i < n; ++i) {
        if (i % folds == f) split.val_idx[p].push_back(idx[i]);
        else split.train_idx[p].push_back(idx[i]);
      }
    }
    std::vector<RealMap> val_maps;
    std::vector<double> val_labels;
    gather_val(pool, split, val_maps, val_labels);

    for (int s = 0; s < seeds; ++s) {
      TrainConfig run = config;
      run.seed = derive_seed(config.seed, 0x6376ULL + f * seeds + s);
      TrainResult res = train_with_split(pool, run, split);
      report.accuracies.push_back(accuracy(res.model, val_maps, val_labels));
    }
  }

  const double n = static_cast<double>(report.accuracies.size());
  for (double a : report.accuracies) report.mean += a;
  report.mean /= n;
  double ss = 0.0;
  for (double a : report.accuracies) ss += (a - report.mean) * (a - report.mean);
  report.stderr_ = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return report;
}

std::vector<AblationRow> ablation_suite(const LabeledPool& pool,
                                        const std::vector<AblationVariant>& variants,
                                        int folds, int seeds) {
  std::vector<AblationRow> rows;
  for (const AblationVariant& v : variants)
    rows.push_back({v.name, cross_validate(pool, v.config, folds, seeds)});
  return rows;
}

}  // namespace ccnn
