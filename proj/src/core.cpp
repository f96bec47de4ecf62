#include "ccnn/core.hpp"

namespace ccnn {

double mean_density(const SnapshotSet& set) {
  if (set.snapshots.empty()) throw std::invalid_argument("mean_density: empty set");
  const Lattice& lat = set.lattice();
  double sum = 0.0;
  for (const Snapshot& s : set.snapshots) {
    if (!(s.lattice == lat))
      throw std::invalid_argument("mean_density: mixed lattices in set");
    for (auto b : s.bits.data()) sum += b;
  }
  return sum / (static_cast<double>(set.snapshots.size()) * lat.width * lat.height);
}

RealMap site_mean_density(const SnapshotSet& set) {
  if (set.snapshots.empty())
    throw std::invalid_argument("site_mean_density: empty set");
  const Lattice& lat = set.lattice();
  RealMap acc(lat.height, lat.width, 0.0);
  for (const Snapshot& s : set.snapshots) {
    if (!(s.lattice == lat))
      throw std::invalid_argument("site_mean_density: mixed lattices in set");
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += s.bits[i];
  }
  const double inv_n = 1.0 / static_cast<double>(set.snapshots.size());
  for (size_t i = 0; i < acc.size(); ++i) acc[i] *= inv_n;
  return acc;
}

RealMap normalize_global(const Snapshot& snapshot, double nbar) {
  if (nbar < 0.0 || nbar > 1.0)
    throw std::invalid_argument("normalize_global: nbar outside [0,1]");
  RealMap out(snapshot.bits.rows(), snapshot.bits.cols());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(snapshot.bits[i]) - nbar;
  return out;
}

RealMap normalize_per_site(const Snapshot& snapshot, const RealMap& nbar_map) {
  if (snapshot.bits.rows() != nbar_map.rows() ||
      snapshot.bits.cols() != nbar_map.cols())
    throw std::invalid_argument("normalize_per_site: shape mismatch");
  RealMap out(nbar_map.rows(), nbar_map.cols());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(snapshot.bits[i]) - nbar_map[i];
  return out;
}

RealMap zero_pad(const RealMap& map, int p) {
  if (p < 0) throw std::invalid_argument("zero_pad: negative padding");
  if (p == 0) return map;
  RealMap out(map.rows() + 2 * p, map.cols() + 2 * p, 0.0);
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c) out(r + p, c + p) = map(r, c);
  return out;
}

}  // namespace ccnn
