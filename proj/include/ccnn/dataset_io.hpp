#pragma once

#include <map>
#include <string>

#include "ccnn/types.hpp"

namespace ccnn {

// On-disk dataset layout: a JSON manifest listing, per set,
// {delta_over_omega, rb_over_a, lattice:[h,w], count, data_file}; each data
// file holds `count` blocks of h lines of w characters from {0,1}, blocks
// separated by blank lines. An optional top-level "grid" records the
// rectangular scan layout. Anything else in a data file is rejected.

void save_dataset(const Dataset& ds, const std::string& dir,
                  const std::string& manifest_name = "manifest.json");

Dataset load_dataset(const std::string& manifest_path);

// Ground-truth sidecar for generated datasets: one record per set.
struct GroundTruth {
  std::vector<std::string> phase_per_set;  // parallel to Dataset::sets
};

void save_ground_truth(const Dataset& ds, const GroundTruth& gt,
                       const std::string& path);
GroundTruth load_ground_truth(const std::string& path, size_t n_sets);

}  // namespace ccnn
