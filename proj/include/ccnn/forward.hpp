#pragma once

#include <vector>

#include "ccnn/model.hpp"
#include "ccnn/types.hpp"

namespace ccnn {

// Cross-correlation of the F-1 zero-padded input with an F x F filter;
// output is (h+F-1) x (w+F-1) so every filter pixel visits every site.
RealMap conv_full(const RealMap& map, const RealMap& filter);

// C^(1..m_max) from the power-sum identities:
//   C1 = conv(dn, f), S2 = conv(dn^2, f^2), S3 = conv(dn^3, f^3)
//   C2 = C1^2 - S2,   C3 = C1^3 - 3 C1 S2 + 2 S3
// Each C^(m)(x) equals the sum over ordered tuples of m pairwise-distinct
// filter offsets (see reference::correlator_map_bruteforce).
std::vector<RealMap> correlator_maps(const RealMap& dn, const RealMap& filter,
                                     int m_max);

// Jointly-transformed D4 symmetrization, projected onto the invariant
// subspace: P_D4( sum_g C^(m)[g.f, dn] ). The map is D4-symmetric, does not
// change when dn is transformed, and reduces to 8 C^(m) for symmetric
// filter and input.
RealMap d4_symmetrized_maps(const RealMap& dn, const RealMap& filter, int m);

// c = sum_x w(x) Ctilde(x).
double spatial_pool(const RealMap& map, const RealMap& w_effective);

enum class BNMode { Train, Eval };

// BatchNorm without the affine transformation. Train mode normalizes by the
// batch mean and biased variance and (optionally) updates the running stats
// with `momentum`; eval mode normalizes by the running stats.
// features: rows = batch, cols = model features.
RealMap batchnorm_apply(const RealMap& features, BatchNormState& state,
                        BNMode mode, bool update_running = true);

// Pooled correlator features c_{alpha,m} for one snapshot, in
// ModelConfig::feature_index order (m >= 2 only). Pre-BatchNorm.
std::vector<double> snapshot_features(const CCNNModel& model, const RealMap& dn);

// Batch forward pass, yhat in (0,1) per snapshot. Train mode requires
// batch >= 2 for BatchNorm; snapshots are processed in parallel with a
// deterministic ordered reduction.
std::vector<double> forward(CCNNModel& model, const std::vector<RealMap>& batch,
                            BNMode mode, bool update_bn = true);

// Eval-mode forward of already-pooled (e.g. set-averaged) features.
double forward_from_features(const CCNNModel& model, const std::vector<double>& features);

double sigmoid(double z);

namespace detail {

// Effective filters and their D4 variants with elementwise powers, shared
// across a batch. Index layout: alpha * 8 + g.
struct FilterVariants {
  int F = 0;
  int n_filters = 0;
  std::vector<RealMap> f, f2, f3;
};
FilterVariants make_filter_variants(const CCNNModel& model);

// Per-snapshot forward intermediates kept for the backward pass.
struct SnapshotTrace {
  RealMap p1, p2, p3;               // padded dn powers
  std::vector<RealMap> c1, s2;      // per alpha*8+g
  std::vector<RealMap> pooled_map;  // per feature: M = sum_g C^(m) (unprojected)
  std::vector<double> features;
};

SnapshotTrace snapshot_forward(const ModelConfig& config, const FilterVariants& fv,
                               const RealMap& dn, const RealMap& w_eff,
                               bool keep_trace);

}  // namespace detail

}  // namespace ccnn
