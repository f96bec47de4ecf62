#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccnn/gradients.hpp"
#include "ccnn/model.hpp"
#include "ccnn/rng.hpp"

namespace ccnn {

struct TrainConfig {
  double lr0 = 0.01;
  int batch_size = 128;
  double gamma = 0.1;  // L1 coefficient on the effective filters
  int epochs = 100;
  uint64_t seed = 0;
  double val_fraction = 0.1;
  ModelConfig arch;

  void validate() const;
};

struct PhasePool {
  std::string name;
  std::vector<RealMap> maps;  // per-site normalized snapshots
};

// Binary pool: the target phase is labeled 1, everything else 0.
struct LabeledPool {
  std::vector<PhasePool> phases;
  int target = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> val_accuracy;
  std::vector<double> lr_trace;
};

// Per-phase train/val index split (90/10 by default), seeded.
struct PoolSplit {
  std::vector<std::vector<int>> train_idx;
  std::vector<std::vector<int>> val_idx;
};
PoolSplit split_pool(const LabeledPool& pool, double val_fraction, uint64_t seed);

// One balanced minibatch: the target phase is drawn with probability 0.5,
// each of the k other phases with probability 0.5/k, uniformly within the
// chosen phase's training split.
struct Batch {
  std::vector<RealMap> maps;
  std::vector<double> labels;
  std::vector<int> phases;  // source phase index per draw
};
Batch balanced_sampler(const LabeledPool& pool, const PoolSplit& split,
                       int batch_size, Rng& rng);

double cosine_lr(long t, long T, double lr0);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};
// Standard Adam (beta1=0.9, beta2=0.999, eps=1e-8) with bias correction.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr);
void clamp_nonneg(std::span<double> params);

struct TrainResult {
  CCNNModel model;
  TrainReport report;
};

TrainResult train(const LabeledPool& pool, const TrainConfig& config);

// Fraction of snapshots with (yhat >= 0.5) == label, eval mode.
double accuracy(const CCNNModel& model, const std::vector<RealMap>& maps,
                const std::vector<double>& labels);

struct CVReport {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> accuracies;  // folds x seeds entries
};
CVReport cross_validate(const LabeledPool& pool, const TrainConfig& config,
                        int folds = 10, int seeds = 5);

struct AblationVariant {
  std::string name;
  TrainConfig config;
};
struct AblationRow {
  std::string name;
  CVReport report;
};
std::vector<AblationRow> ablation_suite(const LabeledPool& pool,
                                        const std::vector<AblationVariant>& variants,
                                        int folds = 10, int seeds = 5);

}  // namespace ccnn
