#include "ccnn/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "ccnn/core.hpp"
#include "ccnn/d4.hpp"
#include "ccnn/forward.hpp"
#include "ccnn/spectral.hpp"

namespace ccnn {

FourierOPMap fourier_order_parameter(const CCNNModel& model, int K) {
  const ModelConfig& cfg = model.config;
  cfg.validate();
  if (cfg.m_max != 2 || !cfg.uniform_w)
    throw std::invalid_argument(
        "fourier_order_parameter: needs a second-order uniform-w model");
  if (K < cfg.lattice_height + cfg.filter_size - 1)
    throw std::invalid_argument("fourier_order_parameter: K < L + F - 1");

  FourierOPMap op;
  op.K = K;
  op.weights = RealMap(K, K, 0.0);
  op.bias = model.head.bias;

  const double invK2 = 1.0 / (static_cast<double>(K) * K);
  for (int a = 0; a < cfg.n_filters; ++a) {
    const int j = cfg.feature_index(a, 2);
    const double bn_scale = 1.0 / std::sqrt(model.bn.running_var[j] + model.bn.eps);
    const double beta_eff = model.head.beta[j] * bn_scale;
    op.bias += model.head.beta[j] * model.bn.running_mean[j] * bn_scale;

    RealMap ftilde = power_spectrum(dft2(model.filters.effective(a), K));
    double mean = 0.0;
    for (size_t i = 0; i < ftilde.size(); ++i) mean += ftilde[i];
    mean *= invK2;
    for (size_t i = 0; i < ftilde.size(); ++i) ftilde[i] -= mean;

    const RealMap sym = ksym_sum(ftilde);
    for (size_t i = 0; i < sym.size(); ++i)
      op.weights[i] += beta_eff * sym[i] * invK2;
  }
  return op;
}

double order_parameter_value(const FourierOPMap& opmap, const RealMap& dn) {
  const RealMap power = power_spectrum(dft2(dn, opmap.K));
  double z = -opmap.bias;
  for (size_t i = 0; i < power.size(); ++i) z += opmap.weights[i] * power[i];
  return sigmoid(z);
}

ConfidenceMap confidence_map(const CCNNModel& model, const Dataset& dataset) {
  if (dataset.sets.empty()) throw std::invalid_argument("confidence_map: empty dataset");
  ConfidenceMap cm;
  cm.grid = dataset.grid;
  const int n_sets = static_cast<int>(dataset.sets.size());
  cm.points.resize(n_sets);
  cm.yhat.resize(n_sets);

  std::vector<std::exception_ptr> errors(n_sets);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n_sets; ++s) {
    try {
      const SnapshotSet& set = dataset.sets[s];
      const RealMap nbar = site_mean_density(set);
      std::vector<double> mean_features(model.config.n_features(), 0.0);
      for (const Snapshot& snap : set.snapshots) {
        const std::vector<double> f =
            snapshot_features(model, normalize_per_site(snap, nbar));
        for (size_t j = 0; j < f.size(); ++j) mean_features[j] += f[j];
      }
      for (double& v : mean_features) v /= static_cast<double>(set.snapshots.size());
      cm.points[s] = set.point;
      cm.yhat[s] = forward_from_features(model, mean_features);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return cm;
}

PhaseDiagram phase_diagram(
    const std::vector<std::pair<std::string, ConfidenceMap>>& maps,
    double threshold) {
  if (maps.empty()) throw std::invalid_argument("phase_diagram: no maps");
  if (threshold <= 0.0 || threshold >= 1.0)
    throw std::invalid_argument("phase_diagram: threshold outside (0,1)");
  const ConfidenceMap& first = maps.front().second;
  for (const auto& [name, cm] : maps) {
    if (cm.points.size() != first.points.size())
      throw std::invalid_argument("phase_diagram: grid mismatch");
    for (size_t i = 0; i < cm.points.size(); ++i)
      if (!(cm.points[i] == first.points[i]))
        throw std::invalid_argument("phase_diagram: grid mismatch");
  }

  PhaseDiagram pd;
  pd.threshold = threshold;
  pd.points = first.points;
  pd.labels.resize(first.points.size());
  for (size_t i = 0; i < first.points.size(); ++i)
    for (const auto& [name, cm] : maps)
      if (cm.yhat[i] >= threshold) pd.labels[i].push_back(name);
  return pd;
}

Grid<uint8_t> edge_mask(const Lattice& lat) {
  Grid<uint8_t> m(lat.height, lat.width, 0);
  for (int r = 0; r < lat.height; ++r)
    for (int c = 0; c < lat.width; ++c)
      m(r, c) = (r == 0 || r == lat.height - 1 || c == 0 || c == lat.width - 1);
  return m;
}

Grid<uint8_t> bulk_mask(const Lattice& lat) {
  Grid<uint8_t> m(lat.height, lat.width, 0);
  for (int r = 2; r < lat.height - 2; ++r)
    for (int c = 2; c < lat.width - 2; ++c) m(r, c) = 1;
  return m;
}

namespace {

std::vector<RealMap> fluctuation_maps(const SnapshotSet& set) {
  const RealMap nbar = site_mean_density(set);
  std::vector<RealMap> dn;
  dn.reserve(set.snapshots.size());
  for (const Snapshot& s : set.snapshots)
    dn.push_back(normalize_per_site(s, nbar));
  return dn;
}

}  // namespace

double connected_two_point(const SnapshotSet& set, std::pair<int, int> d,
                           const Grid<uint8_t>& mask) {
  const Lattice& lat = set.lattice();
  if (mask.rows() != lat.height || mask.cols() != lat.width)
    throw std::invalid_argument("connected_two_point: mask shape mismatch");
  if (std::abs(d.first) >= lat.height || std::abs(d.second) >= lat.width)
    throw std::invalid_argument("connected_two_point: displacement outside lattice");
  const std::vector<RealMap> dn = fluctuation_maps(set);

  double sum = 0.0;
  long terms = 0;
  for (const auto& [dr, dc] : d4_offset_images(d)) {
    for (int r = 0; r < lat.height; ++r) {
      const int r2 = r + dr;
      if (r2 < 0 || r2 >= lat.height) continue;
      for (int c = 0; c < lat.width; ++c) {
        const int c2 = c + dc;
        if (c2 < 0 || c2 >= lat.width) continue;
        if (!mask(r, c) || !mask(r2, c2)) continue;
        for (const RealMap& m : dn) sum += m(r, c) * m(r2, c2);
        terms += dn.size();
      }
    }
  }
  if (terms == 0) throw std::invalid_argument("connected_two_point: empty pair set");
  return sum / static_cast<double>(terms);
}

namespace {

struct TripleSums {
  double total = 0.0;
  double ppp = 0.0, ppm = 0.0, pmm = 0.0, mmm = 0.0;  // |term| sums per class
  long terms = 0;
};

TripleSums triple_sums(const SnapshotSet& set, std::pair<int, int> i,
                       std::pair<int, int> j, std::pair<int, int> k) {
  if (i == j || i == k || j == k)
    throw std::invalid_argument("three_point_correlator: offsets must be distinct");
  const Lattice& lat = set.lattice();
  const std::vector<RealMap> dn = fluctuation_maps(set);
  const auto im_i = d4_offset_images(i);
  const auto im_j = d4_offset_images(j);
  const auto im_k = d4_offset_images(k);

  TripleSums out;
  for (int g = 0; g < 8; ++g) {
    const auto [ir, ic] = im_i[g];
    const auto [jr, jc] = im_j[g];
    const auto [kr, kc] = im_k[g];
    const int rlo = std::max({0, -ir, -jr, -kr});
    const int rhi = lat.height - 1 - std::max({0, ir, jr, kr});
    const int clo = std::max({0, -ic, -jc, -kc});
    const int chi = lat.width - 1 - std::max({0, ic, jc, kc});
    for (int r = rlo; r <= rhi; ++r)
      for (int c = clo; c <= chi; ++c) {
        for (const RealMap& m : dn) {
          const double a = m(r + ir, c + ic);
          const double b = m(r + jr, c + jc);
          const double d = m(r + kr, c + kc);
          const double term = a * b * d;
          out.total += term;
          if (a != 0.0 && b != 0.0 && d != 0.0) {
            const int neg = (a < 0.0) + (b < 0.0) + (d < 0.0);
            const double mag = std::abs(term);
            if (neg == 0) out.ppp += mag;
            else if (neg == 1) out.ppm += mag;
            else if (neg == 2) out.pmm += mag;
            else out.mmm += mag;
          }
        }
        out.terms += dn.size();
      }
  }
  if (out.terms == 0)
    throw std::invalid_argument("three_point_correlator: no valid translations");
  return out;
}

}  // namespace

double three_point_correlator(const SnapshotSet& set, std::pair<int, int> i,
                              std::pair<int, int> j, std::pair<int, int> k) {
  const TripleSums s = triple_sums(set, i, j, k);
  return s.total / static_cast<double>(s.terms);
}

SignDecomposition sign_decomposition(const SnapshotSet& set, std::pair<int, int> i,
                                     std::pair<int, int> j, std::pair<int, int> k) {
  const TripleSums s = triple_sums(set, i, j, k);
  const double T = static_cast<double>(s.terms);
  SignDecomposition d;
  d.ppp = s.ppp / T;
  d.ppm_avg = s.ppm / (3.0 * T);
  d.pmm_avg = s.pmm / (3.0 * T);
  d.mmm = s.mmm / T;
  d.total = s.total / T;
  return d;
}

}  // namespace ccnn
