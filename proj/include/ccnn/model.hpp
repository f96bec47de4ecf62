#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ccnn/types.hpp"

namespace ccnn {

struct ModelConfig {
  int m_max = 3;        // correlator truncation order, 2 or 3
  int n_filters = 3;
  int filter_size = 3;  // F in {3, 4, 5}
  bool uniform_w = false;
  bool nonneg_beta = false;
  int lattice_height = 13;
  int lattice_width = 13;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  int out_rows() const { return lattice_height + filter_size - 1; }
  int out_cols() const { return lattice_width + filter_size - 1; }
  // head features: (alpha, m) for m in {2..m_max}; first order never feeds
  // the head (it reads mean density, which per-site normalization removes)
  int n_features() const { return n_filters * (m_max - 1); }
  int feature_index(int alpha, int m) const { return (m - 2) * n_filters + alpha; }

  void validate() const;
};

// Unconstrained parameters; the effective filters are |raw|, applied on
// every forward pass.
struct FilterBank {
  std::vector<RealMap> raw;  // n_filters entries, F x F each
  RealMap effective(int alpha) const {
    RealMap f = raw[alpha];
    for (size_t i = 0; i < f.size(); ++i) f[i] = std::abs(f[i]);
    return f;
  }
};

// Raw map over the padded output domain; the effective weighting is its D4
// group average, recomputed each pass (uniform mode pins w = 1).
struct SpatialWeight {
  bool uniform = false;
  RealMap raw;
  RealMap effective() const;
};

struct BatchNormState {
  std::vector<double> running_mean;  // per feature
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

struct LogisticHead {
  std::vector<double> beta;  // per feature, layout ModelConfig::feature_index
  double bias = 0.0;         // the epsilon subtracted inside the sigmoid
  bool nonneg = false;
};

struct CCNNModel {
  ModelConfig config;
  FilterBank filters;
  SpatialWeight w;
  LogisticHead head;
  BatchNormState bn;
};

// Small symmetric initialization; w fixed to 1 in uniform mode, beta drawn
// nonnegative when the constraint is on.
CCNNModel init_model(const ModelConfig& config, uint64_t seed);

// Versioned JSON checkpoint; doubles round-trip exactly. Metadata is free
// string pairs (phase name, seed, ...) carried along but not interpreted.
using CheckpointMeta = std::map<std::string, std::string>;
std::string checkpoint_serialize(const CCNNModel& model,
                                 const CheckpointMeta& metadata = {});
CCNNModel checkpoint_deserialize(const std::string& text,
                                 CheckpointMeta* metadata = nullptr);
void checkpoint_save(const CCNNModel& model, const std::string& path,
                     const CheckpointMeta& metadata = {});
CCNNModel checkpoint_load(const std::string& path,
                          CheckpointMeta* metadata = nullptr);

}  // namespace ccnn
