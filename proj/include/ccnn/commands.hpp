#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ccnn/datagen.hpp"
#include "ccnn/train.hpp"

namespace ccnn {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared configuration for every subcommand. Loaded from JSON; CLI flags
// override individual fields.
struct PipelineConfig {
  uint64_t seed = 0;
  std::string out_dir = "out";
  std::string manifest;       // dataset to analyze
  std::string plan_file;      // generation plan (cmd generate)
  std::string builtin_plan;   // "six_phase" shortcut
  int plan_rows = 8, plan_cols = 8;
  double plan_p_flip = 0.03;
  int plan_count = 250;
  int spectral_k = 16;
  int n_pca = 10;
  int k_clusters = 6;
  int restart_window = 500;
  double threshold = 0.75;

  TrainConfig training;
  // phase -> (delta, rb) training points; defaults to the built-in table
  std::map<std::string, std::vector<ParameterPoint>> training_points;
  int points_from_truth = 0;  // if > 0, pick this many points per phase from
                              // the ground-truth sidecar instead
  int cv_folds = 10;
  int cv_seeds = 5;
  std::vector<std::array<std::pair<int, int>, 3>> sign_offsets;

  uint64_t config_hash = 0;  // of the raw config file bytes
};

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig default_pipeline_config();

// Training-point selection file: JSON object, phase name -> [[delta, rb], ...].
std::map<std::string, std::vector<ParameterPoint>> load_training_points(
    const std::string& path);
std::map<std::string, std::vector<ParameterPoint>> default_training_points();

GenerationPlan load_generation_plan(const std::string& path);

// Builds the per-phase pool of per-site-normalized snapshots for the given
// dataset and training-point table.
LabeledPool build_pool(
    const Dataset& ds,
    const std::map<std::string, std::vector<ParameterPoint>>& points,
    const std::string& target_phase);

// Subcommand bodies. Throw UsageError / DataError / std::runtime_error;
// the CLI maps these to exit codes 1 / 2 / 3.
void run_generate(const PipelineConfig& config);
void run_spectra(const PipelineConfig& config);
void run_unsupervised(const PipelineConfig& config);
void run_train(const PipelineConfig& config, const std::string& phase,
               const std::string& out_checkpoint = "");
void run_interpret(const PipelineConfig& config,
                   const std::vector<std::string>& checkpoints);
void run_ablate(const PipelineConfig& config, const std::string& phase);

}  // namespace ccnn
