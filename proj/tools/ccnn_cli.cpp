#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccnn/commands.hpp"

using ccnn::PipelineConfig;

namespace {

// exit codes: 0 success, 1 usage, 2 data, 3 numerical
int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ccnn::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const ccnn::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CCNN phase discovery and classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "pipeline configuration (JSON)");

  // shared overrides
  std::string manifest, out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--manifest", manifest, "dataset manifest path");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "global seed")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* cmd_generate = app.add_subcommand("generate", "render a synthetic dataset");
  std::string plan_file;
  cmd_generate->add_option("--plan", plan_file, "generation plan (JSON)");
  std::string builtin;
  cmd_generate->add_option("--builtin", builtin, "builtin plan name (six_phase)");

  auto* cmd_spectra = app.add_subcommand("spectra", "export per-point spectra");
  auto* cmd_unsup =
      app.add_subcommand("unsupervised", "PCA + GMM clustering of spectral features");

  auto* cmd_train = app.add_subcommand("train", "train a per-phase classifier");
  std::string phase, train_manifest, out_checkpoint;
  int order = 0, filters = 0, filter_size = 0, epochs = -1;
  double gamma = -1.0;
  bool uniform_w = false, nonneg_beta = false;
  cmd_train->add_option("--phase", phase, "target phase name")->required();
  cmd_train->add_option("--order", order, "correlator order (2 or 3)");
  cmd_train->add_option("--filters", filters, "number of filters");
  cmd_train->add_option("--filter-size", filter_size, "filter extent F");
  cmd_train->add_flag("--uniform-w", uniform_w, "fix w(x) = 1");
  cmd_train->add_flag("--nonneg-beta", nonneg_beta, "constrain beta >= 0");
  cmd_train->add_option("--gamma", gamma, "L1 coefficient");
  cmd_train->add_option("--epochs", epochs, "training epochs");
  cmd_train->add_option("--train-manifest", train_manifest,
                        "training-point selection file (JSON)");
  cmd_train->add_option("--out-checkpoint", out_checkpoint, "checkpoint path");

  auto* cmd_interpret =
      app.add_subcommand("interpret", "confidence maps, phase diagram, Fourier maps");
  std::vector<std::string> checkpoints;
  cmd_interpret->add_option("--checkpoint", checkpoints, "model checkpoint(s)")
      ->required();
  double threshold = -1.0;
  cmd_interpret->add_option("--threshold", threshold, "confidence threshold");

  auto* cmd_ablate = app.add_subcommand("ablate", "architecture ablation table");
  std::string ablate_phase;
  cmd_ablate->add_option("--phase", ablate_phase, "target phase name")->required();

  CLI11_PARSE(app, argc, argv);

  return guarded([&] {
    PipelineConfig config = config_path.empty()
                                ? ccnn::default_pipeline_config()
                                : ccnn::load_pipeline_config(config_path);
    if (!manifest.empty()) config.manifest = manifest;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_set) {
      config.seed = seed;
      config.training.seed = seed;
    }

    if (cmd_generate->parsed()) {
      if (!plan_file.empty()) config.plan_file = plan_file;
      if (!builtin.empty()) config.builtin_plan = builtin;
      run_generate(config);
    } else if (cmd_spectra->parsed()) {
      run_spectra(config);
    } else if (cmd_unsup->parsed()) {
      run_unsupervised(config);
    } else if (cmd_train->parsed()) {
      if (order) config.training.arch.m_max = order;
      if (filters) config.training.arch.n_filters = filters;
      if (filter_size) config.training.arch.filter_size = filter_size;
      if (uniform_w) config.training.arch.uniform_w = true;
      if (nonneg_beta) config.training.arch.nonneg_beta = true;
      if (gamma >= 0.0) config.training.gamma = gamma;
      if (epochs >= 0) config.training.epochs = epochs;
      if (!train_manifest.empty())
        config.training_points = ccnn::load_training_points(train_manifest);
      run_train(config, phase, out_checkpoint);
    } else if (cmd_interpret->parsed()) {
      if (threshold > 0.0) config.threshold = threshold;
      run_interpret(config, checkpoints);
    } else if (cmd_ablate->parsed()) {
      run_ablate(config, ablate_phase);
    }
  });
}
