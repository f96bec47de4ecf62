#include "ccnn/commands.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "ccnn/core.hpp"
#include "ccnn/interpret.hpp"
#include "ccnn/io_util.hpp"
#include "ccnn/spectral.hpp"
#include "ccnn/unsupervised.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ccnn {

namespace {

json parse_json_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("bad JSON in " + path + ": " + e.what());
  }
}

Dataset load_dataset_checked(const std::string& manifest) {
  if (manifest.empty()) throw UsageError("no dataset manifest configured");
  try {
    return load_dataset(manifest);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

bool point_close(const ParameterPoint& a, const ParameterPoint& b) {
  return std::abs(a.delta_over_omega - b.delta_over_omega) < 1e-9 &&
         std::abs(a.rb_over_a - b.rb_over_a) < 1e-9;
}

std::string grid_csv(const RealMap& m) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::map<std::string, std::vector<ParameterPoint>> default_training_points() {
  auto cartesian = [](std::vector<double> deltas, std::vector<double> rbs) {
    std::vector<ParameterPoint> out;
    for (double d : deltas)
      for (double r : rbs) out.push_back({d, r});
    return out;
  };
  return {
      {"checkerboard", cartesian({3.02, 3.26}, {1.13, 1.23})},
      {"striated", cartesian({2.33, 2.56, 2.79, 3.02}, {1.46})},
      {"star", cartesian({3.95, 4.19, 4.42, 4.65}, {1.71})},
      {"rhombic", cartesian({2.32, 2.56, 2.79, 3.02}, {1.97})},
      {"edge_ordered", cartesian({0.69, 0.93}, {1.46, 1.56})},
      {"disordered", cartesian({-2.09, -1.62, -1.16, -0.4}, {1.13, 1.46, 1.81})},
  };
}

std::map<std::string, std::vector<ParameterPoint>> load_training_points(
    const std::string& path) {
  const json j = parse_json_file(path);
  std::map<std::string, std::vector<ParameterPoint>> out;
  for (const auto& [phase, pts] : j.items())
    for (const auto& p : pts)
      out[phase].push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (out.empty()) throw DataError("training-point file is empty: " + path);
  return out;
}

PipelineConfig default_pipeline_config() {
  PipelineConfig c;
  c.training_points = default_training_points();
  c.sign_offsets = {{{{0, 0}, {0, 2}, {1, 1}}}};
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("bad JSON in " + path + ": " + e.what());
  }

  PipelineConfig c = default_pipeline_config();
  c.config_hash = fnv1a64(text);
  try {
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("dataset")) {
      const json& d = j["dataset"];
      c.manifest = d.value("manifest", c.manifest);
      c.plan_file = d.value("plan", c.plan_file);
      c.builtin_plan = d.value("builtin_plan", c.builtin_plan);
      c.plan_rows = d.value("rows", c.plan_rows);
      c.plan_cols = d.value("cols", c.plan_cols);
      c.plan_p_flip = d.value("p_flip", c.plan_p_flip);
      c.plan_count = d.value("count", c.plan_count);
    }
    c.spectral_k = j.value("spectral_k", c.spectral_k);
    c.n_pca = j.value("n_pca", c.n_pca);
    c.k_clusters = j.value("k_clusters", c.k_clusters);
    c.restart_window = j.value("restart_window", c.restart_window);
    c.threshold = j.value("threshold", c.threshold);
    if (j.contains("training")) {
      const json& t = j["training"];
      c.training.lr0 = t.value("lr0", c.training.lr0);
      c.training.batch_size = t.value("batch_size", c.training.batch_size);
      c.training.gamma = t.value("gamma", c.training.gamma);
      c.training.epochs = t.value("epochs", c.training.epochs);
      c.training.val_fraction = t.value("val_fraction", c.training.val_fraction);
      c.points_from_truth = t.value("points_from_truth", c.points_from_truth);
      c.cv_folds = t.value("cv_folds", c.cv_folds);
      c.cv_seeds = t.value("cv_seeds", c.cv_seeds);
      if (t.contains("arch")) {
        const json& a = t["arch"];
        c.training.arch.m_max = a.value("order", c.training.arch.m_max);
        c.training.arch.n_filters = a.value("filters", c.training.arch.n_filters);
        c.training.arch.filter_size = a.value("filter_size", c.training.arch.filter_size);
        c.training.arch.uniform_w = a.value("uniform_w", c.training.arch.uniform_w);
        c.training.arch.nonneg_beta = a.value("nonneg_beta", c.training.arch.nonneg_beta);
      }
      if (t.contains("points")) {
        c.training_points.clear();
        for (const auto& [phase, pts] : t["points"].items())
          for (const auto& p : pts)
            c.training_points[phase].push_back(
                {p.at(0).get<double>(), p.at(1).get<double>()});
      }
    }
    if (j.contains("sign_offsets")) {
      c.sign_offsets.clear();
      for (const auto& triple : j["sign_offsets"]) {
        std::array<std::pair<int, int>, 3> t;
        for (int i = 0; i < 3; ++i)
          t[i] = {triple.at(i).at(0).get<int>(), triple.at(i).at(1).get<int>()};
        c.sign_offsets.push_back(t);
      }
    }
  } catch (const json::exception& e) {
    throw DataError("bad config field in " + path + ": " + e.what());
  }
  c.training.seed = c.seed;
  return c;
}

GenerationPlan load_generation_plan(const std::string& path) {
  const json j = parse_json_file(path);
  if (j.contains("builtin")) {
    if (j["builtin"].get<std::string>() != "six_phase")
      throw UsageError("unknown builtin plan: " + j["builtin"].get<std::string>());
    Lattice lat;
    if (j.contains("lattice")) {
      lat.height = j["lattice"].at(0).get<int>();
      lat.width = j["lattice"].at(1).get<int>();
    }
    return make_six_phase_plan(j.value("rows", 8), j.value("cols", 8),
                               j.value("p_flip", 0.03), j.value("count", 250), lat);
  }
  GenerationPlan plan;
  try {
    plan.lattice.height = j.at("lattice").at(0).get<int>();
    plan.lattice.width = j.at("lattice").at(1).get<int>();
    plan.count = j.value("count", 250);
    plan.delta_values = j.at("delta_values").get<std::vector<double>>();
    plan.rb_values = j.at("rb_values").get<std::vector<double>>();
    for (const auto& row : j.at("layout"))
      for (const auto& name : row)
        plan.layout.push_back(name.get<std::string>());
    for (const auto& [name, spec] : j.at("phases").items()) {
      PhaseSpec p = make_phase_spec(name, spec.value("p_flip", 0.0),
                                    spec.value("q", 0.3));
      p.bernoulli_p = spec.value("bernoulli_p", p.bernoulli_p);
      p.random_offset = spec.value("random_offset", false);
      plan.phases.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw DataError("bad plan in " + path + ": " + e.what());
  }
  return plan;
}

LabeledPool build_pool(
    const Dataset& ds,
    const std::map<std::string, std::vector<ParameterPoint>>& points,
    const std::string& target_phase) {
  if (!points.count(target_phase))
    throw UsageError("phase not present in training points: " + target_phase);
  LabeledPool pool;
  for (const auto& [phase, pts] : points) {
    PhasePool pp;
    pp.name = phase;
    for (const ParameterPoint& p : pts) {
      bool found = false;
      for (const SnapshotSet& set : ds.sets) {
        if (!point_close(set.point, p)) continue;
        found = true;
        const RealMap nbar = site_mean_density(set);
        for (const Snapshot& s : set.snapshots)
          pp.maps.push_back(normalize_per_site(s, nbar));
      }
      if (!found) {
        std::ostringstream ss;
        ss << "training point (" << p.delta_over_omega << ", " << p.rb_over_a
           << ") for phase " << phase << " not in dataset";
        throw DataError(ss.str());
      }
    }
    if (phase == target_phase) pool.target = static_cast<int>(pool.phases.size());
    pool.phases.push_back(std::move(pp));
  }
  return pool;
}

namespace {

// Evenly spaced per-phase point selection from the ground-truth sidecar.
std::map<std::string, std::vector<ParameterPoint>> points_from_truth(
    const Dataset& ds, const GroundTruth& gt, int per_phase) {
  std::map<std::string, std::vector<size_t>> by_phase;
  for (size_t i = 0; i < gt.phase_per_set.size(); ++i)
    by_phase[gt.phase_per_set[i]].push_back(i);
  std::map<std::string, std::vector<ParameterPoint>> out;
  for (const auto& [phase, idx] : by_phase) {
    const int n = std::min<int>(per_phase, static_cast<int>(idx.size()));
    for (int k = 0; k < n; ++k) {
      const size_t pick = idx[(idx.size() - 1) * k / std::max(1, n - 1)];
      out[phase].push_back(ds.sets[pick].point);
    }
  }
  return out;
}

std::map<std::string, std::vector<ParameterPoint>> effective_points(
    const PipelineConfig& config, const Dataset& ds) {
  if (config.points_from_truth > 0) {
    const fs::path sidecar = fs::path(config.manifest).parent_path() / "ground_truth.json";
    GroundTruth gt;
    try {
      gt = load_ground_truth(sidecar.string(), ds.sets.size());
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
    return points_from_truth(ds, gt, config.points_from_truth);
  }
  return config.training_points;
}

}  // namespace

void run_generate(const PipelineConfig& config) {
  GenerationPlan plan;
  if (!config.plan_file.empty()) {
    plan = load_generation_plan(config.plan_file);
  } else if (config.builtin_plan == "six_phase") {
    plan = make_six_phase_plan(config.plan_rows, config.plan_cols,
                               config.plan_p_flip, config.plan_count);
  } else if (config.builtin_plan.empty()) {
    throw UsageError("generate: no plan or builtin_plan configured");
  } else {
    throw UsageError("generate: unknown builtin plan: " + config.builtin_plan);
  }

  GeneratedDataset gen = generate_dataset(plan, config.seed);
  const fs::path dir = fs::path(config.out_dir) / "dataset";
  save_dataset(gen.dataset, dir.string());
  save_ground_truth(gen.dataset, gen.truth, (dir / "ground_truth.json").string());
}

void run_spectra(const PipelineConfig& config) {
  const Dataset ds = load_dataset_checked(config.manifest);
  const fs::path dir = fs::path(config.out_dir) / "spectra";
  fs::create_directories(dir);
  const std::string prov = provenance_line(config.config_hash, config.seed);
  for (size_t i = 0; i < ds.sets.size(); ++i) {
    const RealMap spec = mean_power_spectrum(ds.sets[i], config.spectral_k);
    const RealMap phat = shift_invariant_features(spec);
    char name[64];
    std::snprintf(name, sizeof(name), "spectrum_%04zu.csv", i);
    std::ostringstream s1;
    s1 << prov;
    spectrum_to_csv(spec, s1);
    write_file((dir / name).string(), s1.str());
    std::snprintf(name, sizeof(name), "features_%04zu.csv", i);
    std::ostringstream s2;
    s2 << prov;
    spectrum_to_csv(phat, s2);
    write_file((dir / name).string(), s2.str());
  }
}

void run_unsupervised(const PipelineConfig& config) {
  const Dataset ds = load_dataset_checked(config.manifest);
  const UnsupervisedResult res =
      cluster_phase_diagram(ds, config.spectral_k, config.n_pca, config.k_clusters,
                            config.seed, config.restart_window);
  const fs::path dir = fs::path(config.out_dir) / "unsupervised";
  fs::create_directories(dir);
  const std::string prov = provenance_line(config.config_hash, config.seed);

  const int n_pc = res.degenerate ? 0 : static_cast<int>(res.pca.components.rows());
  for (int pc = 0; pc < n_pc; ++pc) {
    RealMap grid(config.spectral_k, config.spectral_k);
    for (size_t i = 0; i < grid.size(); ++i)
      grid[i] = res.pca.components(pc, static_cast<Eigen::Index>(i));
    char name[64];
    std::snprintf(name, sizeof(name), "pc_%02d.csv", pc + 1);
    write_file((dir / name).string(), prov + grid_csv(grid));
  }

  std::ostringstream proj;
  proj << prov << "row,col,delta,rb";
  const int n_proj = static_cast<int>(res.projections.cols());
  for (int p = 0; p < n_proj; ++p) proj << ",pc" << (p + 1);
  proj << ",label\n";
  for (size_t i = 0; i < ds.sets.size(); ++i) {
    int row = 0, col = static_cast<int>(i);
    if (ds.grid) {
      for (int r = 0; r < ds.grid->rows; ++r)
        for (int c = 0; c < ds.grid->cols; ++c)
          if (ds.grid->at(r, c) == static_cast<int>(i)) { row = r; col = c; }
    }
    proj << row << ',' << col << ','
         << format_double(ds.sets[i].point.delta_over_omega) << ','
         << format_double(ds.sets[i].point.rb_over_a);
    for (int p = 0; p < n_proj; ++p)
      proj << ',' << format_double(res.projections(static_cast<Eigen::Index>(i), p));
    proj << ',' << res.assignment.labels[i] << '\n';
  }
  write_file((dir / "projections.csv").string(), proj.str());
}

void run_train(const PipelineConfig& config, const std::string& phase,
               const std::string& out_checkpoint) {
  if (phase.empty()) throw UsageError("train: --phase is required");
  const Dataset ds = load_dataset_checked(config.manifest);
  const auto points = effective_points(config, ds);
  const LabeledPool pool = build_pool(ds, points, phase);

  TrainConfig tc = config.training;
  tc.seed = config.seed;
  const TrainResult res = train(pool, tc);

  fs::create_directories(config.out_dir);
  const std::string ckpt_path =
      out_checkpoint.empty()
          ? (fs::path(config.out_dir) / ("model_" + phase + ".json")).string()
          : out_checkpoint;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config.config_hash));
  CheckpointMeta meta{{"phase", phase},
                      {"seed", std::to_string(config.seed)},
                      {"epochs", std::to_string(tc.epochs)},
                      {"config_hash", hash}};
  checkpoint_save(res.model, ckpt_path, meta);

  std::ostringstream report;
  report << provenance_line(config.config_hash, config.seed)
         << "epoch,loss,val_accuracy,lr\n";
  for (size_t e = 0; e < res.report.epoch_loss.size(); ++e)
    report << e << ',' << format_double(res.report.epoch_loss[e]) << ','
           << format_double(res.report.val_accuracy[e]) << ','
           << format_double(res.report.lr_trace[e]) << '\n';
  write_file((fs::path(config.out_dir) / ("train_report_" + phase + ".csv")).string(),
             report.str());
}

void run_interpret(const PipelineConfig& config,
                   const std::vector<std::string>& checkpoints) {
  if (checkpoints.empty()) throw UsageError("interpret: no checkpoints given");
  const Dataset ds = load_dataset_checked(config.manifest);
  const fs::path dir = fs::path(config.out_dir) / "interpret";
  fs::create_directories(dir);
  const std::string prov = provenance_line(config.config_hash, config.seed);

  std::vector<std::pair<std::string, ConfidenceMap>> maps;
  for (const std::string& path : checkpoints) {
    CheckpointMeta meta;
    CCNNModel model;
    try {
      model = checkpoint_load(path, &meta);
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
    if (model.config.lattice_height != ds.sets.at(0).lattice().height ||
        model.config.lattice_width != ds.sets.at(0).lattice().width)
      throw UsageError("interpret: checkpoint lattice does not match dataset: " + path);
    const std::string phase =
        meta.count("phase") ? meta["phase"] : fs::path(path).stem().string();

    const ConfidenceMap cm = confidence_map(model, ds);
    std::ostringstream conf;
    conf << prov << "delta,rb,phase,yhat\n";
    for (size_t i = 0; i < cm.points.size(); ++i)
      conf << format_double(cm.points[i].delta_over_omega) << ','
           << format_double(cm.points[i].rb_over_a) << ',' << phase << ','
           << format_double(cm.yhat[i]) << '\n';
    write_file((dir / ("confidence_" + phase + ".csv")).string(), conf.str());

    // Fourier order-parameter map when the architecture admits one.
    if (model.config.m_max == 2 && model.config.uniform_w) {
      const FourierOPMap op = fourier_order_parameter(model, config.spectral_k);
      write_file((dir / ("fourier_" + phase + ".csv")).string(),
                 prov + grid_csv(op.weights));
    }
    maps.emplace_back(phase, cm);
  }

  const PhaseDiagram pd = phase_diagram(maps, config.threshold);
  std::ostringstream diag;
  diag << prov << "delta,rb,labels\n";
  for (size_t i = 0; i < pd.points.size(); ++i) {
    diag << format_double(pd.points[i].delta_over_omega) << ','
         << format_double(pd.points[i].rb_over_a) << ',';
    if (pd.labels[i].empty()) {
      diag << "unassigned";
    } else {
      for (size_t l = 0; l < pd.labels[i].size(); ++l) {
        if (l) diag << '|';
        diag << pd.labels[i][l];
      }
    }
    diag << '\n';
  }
  write_file((dir / "phase_diagram.csv").string(), diag.str());

  // Connected-correlator report: sign decomposition of the configured offset
  // triples on every dataset point.
  json records = json::array();
  for (const auto& offsets : config.sign_offsets) {
    for (const SnapshotSet& set : ds.sets) {
      const SignDecomposition sd =
          sign_decomposition(set, offsets[0], offsets[1], offsets[2]);
      records.push_back({
          {"delta_over_omega", set.point.delta_over_omega},
          {"rb_over_a", set.point.rb_over_a},
          {"offsets", {{offsets[0].first, offsets[0].second},
                       {offsets[1].first, offsets[1].second},
                       {offsets[2].first, offsets[2].second}}},
          {"ppp", sd.ppp},
          {"ppm_avg", sd.ppm_avg},
          {"pmm_avg", sd.pmm_avg},
          {"mmm", sd.mmm},
          {"total", sd.total},
      });
    }
  }
  json sign_out;
  sign_out["provenance"] = {{"tool", std::string("ccnn ") + kToolVersion},
                            {"config_hash", config.config_hash},
                            {"seed", config.seed}};
  sign_out["records"] = std::move(records);
  write_file((dir / "sign_decomposition.json").string(), sign_out.dump(2) + "\n");
}

void run_ablate(const PipelineConfig& config, const std::string& phase) {
  if (phase.empty()) throw UsageError("ablate: --phase is required");
  const Dataset ds = load_dataset_checked(config.manifest);
  const auto points = effective_points(config, ds);
  const LabeledPool pool = build_pool(ds, points, phase);

  auto variant = [&](const std::string& name, int order, bool uniform_w,
                     int filter_size, bool nonneg, double gamma) {
    AblationVariant v;
    v.name = name;
    v.config = config.training;
    v.config.seed = config.seed;
    v.config.arch.m_max = order;
    v.config.arch.uniform_w = uniform_w;
    v.config.arch.filter_size = filter_size;
    v.config.arch.nonneg_beta = nonneg;
    v.config.gamma = gamma;
    return v;
  };
  const std::vector<AblationVariant> variants = {
      variant("2nd order, uniform w, 4x4, gamma=0.0", 2, true, 4, false, 0.0),
      variant("3rd order, uniform w, 4x4, gamma=0.1", 3, true, 4, false, 0.1),
      variant("3rd order, nonneg beta, uniform w, 4x4, gamma=0.1", 3, true, 4, true, 0.1),
      variant("2nd order, learned w, 3x3, gamma=0.1", 2, false, 3, false, 0.1),
      variant("3rd order, learned w, 3x3, gamma=0.1", 3, false, 3, false, 0.1),
  };
  const std::vector<AblationRow> rows =
      ablation_suite(pool, variants, config.cv_folds, config.cv_seeds);

  fs::create_directories(config.out_dir);
  std::ostringstream out;
  out << provenance_line(config.config_hash, config.seed)
      << "variant,mean_accuracy,stderr\n";
  for (const AblationRow& r : rows)
    out << '"' << r.name << "\"," << format_double(r.report.mean) << ','
        << format_double(r.report.stderr_) << '\n';
  write_file((fs::path(config.out_dir) / ("ablation_" + phase + ".csv")).string(),
             out.str());
}

}  // namespace ccnn
