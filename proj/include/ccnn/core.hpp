#pragma once

#include "ccnn/types.hpp"

namespace ccnn {

// Average density across all sites and snapshots of a set; in [0, 1].
double mean_density(const SnapshotSet& set);

// Snapshot-averaged density at each site.
RealMap site_mean_density(const SnapshotSet& set);

// Global normalization: n(x) - nbar at every site.
RealMap normalize_global(const Snapshot& snapshot, double nbar);

// Per-site normalization: density fluctuation map n(x) - nbar_map(x).
RealMap normalize_per_site(const Snapshot& snapshot, const RealMap& nbar_map);

// Pad with p zeros on every edge.
RealMap zero_pad(const RealMap& map, int p);

}  // namespace ccnn
