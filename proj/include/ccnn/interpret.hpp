#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccnn/model.hpp"
#include "ccnn/types.hpp"

namespace ccnn {

// k-space order-parameter map of a uniform second-order model: BatchNorm is
// folded into the weights and bias, so order_parameter_value reproduces the
// model's eval-mode output exactly.
struct FourierOPMap {
  int K = 0;
  RealMap weights;  // K x K, sums to zero, symmetric under the k-grid D4 action
  double bias = 0.0;
};

// Requires m_max == 2, uniform w, and K >= L + F - 1 (the resolution at
// which the spatial and spectral routes coincide exactly).
FourierOPMap fourier_order_parameter(const CCNNModel& model, int K);

// O = sigmoid( sum_k weights(k) |dft2(dn)(k)|^2 - bias ), in (0,1).
double order_parameter_value(const FourierOPMap& opmap, const RealMap& dn);

struct ConfidenceMap {
  std::vector<ParameterPoint> points;  // parallel to yhat
  std::vector<double> yhat;
  std::optional<GridIndex> grid;
};

// Per parameter point: per-snapshot correlator features averaged over the
// set, then eval BatchNorm and the head applied once to the averages.
ConfidenceMap confidence_map(const CCNNModel& model, const Dataset& dataset);

struct PhaseDiagram {
  std::vector<ParameterPoint> points;
  std::vector<std::vector<std::string>> labels;  // phases above threshold; may be empty
  double threshold = 0.75;
};

PhaseDiagram phase_diagram(
    const std::vector<std::pair<std::string, ConfidenceMap>>& maps,
    double threshold = 0.75);

// Site masks for edge/bulk correlator measurements.
Grid<uint8_t> edge_mask(const Lattice& lat);  // outermost one-site ring
Grid<uint8_t> bulk_mask(const Lattice& lat);  // all but the outermost two-site strips

// Connected two-point correlator of per-site-normalized fluctuations at
// displacement d, averaged over snapshots, masked site pairs, and the D4
// orbit of d.
double connected_two_point(const SnapshotSet& set, std::pair<int, int> d,
                           const Grid<uint8_t>& mask);

// Mean over snapshots, in-lattice translations and the 8 D4 images of the
// offset triple of dn(x+i) dn(x+j) dn(x+k).
double three_point_correlator(const SnapshotSet& set, std::pair<int, int> i,
                              std::pair<int, int> j, std::pair<int, int> k);

// Decomposition of the same sum by the sign pattern of the three factors.
// Magnitudes are normalized by the full term count; mixed-sign classes are
// averaged over their three arrangements, so
//   ppp - 3*ppm_avg + 3*pmm_avg - mmm == total.
struct SignDecomposition {
  double ppp = 0.0;
  double ppm_avg = 0.0;
  double pmm_avg = 0.0;
  double mmm = 0.0;
  double total = 0.0;
};

SignDecomposition sign_decomposition(const SnapshotSet& set, std::pair<int, int> i,
                                     std::pair<int, int> j, std::pair<int, int> k);

}  // namespace ccnn
