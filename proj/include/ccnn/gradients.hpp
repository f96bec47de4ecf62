#pragma once

#include <vector>

#include "ccnn/forward.hpp"
#include "ccnn/model.hpp"

namespace ccnn {

struct GradientBundle {
  std::vector<RealMap> raw_filters;  // per filter, F x F
  RealMap raw_w;                     // empty in uniform mode
  std::vector<double> beta;
  double bias = 0.0;
};

// Mean cross-entropy over the batch plus gamma * sum |f| over the effective
// filters. yhat is clamped away from {0,1} before the logs. Train-mode
// BatchNorm; running stats are untouched so the value is side-effect free
// (usable for finite differencing).
double loss(const CCNNModel& model, const std::vector<RealMap>& batch,
            const std::vector<double>& labels, double gamma);

struct TrainStep {
  double loss = 0.0;
  GradientBundle grad;
};

// Exact reverse-mode derivative of loss() with respect to all raw
// parameters: raw filter weights through the |.| reparametrization
// (subgradient 0 at 0), the raw w map through the D4 projection, beta and
// the bias. Updates BatchNorm running stats when update_bn is set.
// Per-snapshot contributions run in parallel; the reduction is ordered.
TrainStep gradients(CCNNModel& model, const std::vector<RealMap>& batch,
                    const std::vector<double>& labels, double gamma,
                    bool update_bn = true);

}  // namespace ccnn
