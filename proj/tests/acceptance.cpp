// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. --quick shrinks the
// synthetic dataset for debugging runs (not the shipped gate).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "ccnn/commands.hpp"
#include "ccnn/core.hpp"
#include "ccnn/d4.hpp"
#include "ccnn/datagen.hpp"
#include "ccnn/forward.hpp"
#include "ccnn/gradients.hpp"
#include "ccnn/interpret.hpp"
#include "ccnn/kmeans.hpp"
#include "ccnn/reference.hpp"
#include "ccnn/rng.hpp"
#include "ccnn/spectral.hpp"
#include "ccnn/train.hpp"
#include "ccnn/unsupervised.hpp"

using namespace ccnn;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

void report(int id, const char* what, bool ok, const std::string& detail = "") {
  std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / denom;
}

RealMap random_map(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  RealMap m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(lo, hi);
  return m;
}

// ---- criterion 1: correlator power-sum identities vs brute force ----
void criterion_1() {
  const auto t = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const RealMap dn = random_map(6, 6, rng);
    const RealMap f = random_map(3, 3, rng);
    const auto maps = correlator_maps(dn, f, 3);
    for (int m = 2; m <= 3; ++m) {
      const RealMap brute = reference::correlator_map_bruteforce(dn, f, m);
      double scale = 0.0;
      for (size_t i = 0; i < brute.size(); ++i)
        scale = std::max(scale, std::abs(brute[i]));
      for (size_t i = 0; i < brute.size(); ++i)
        worst = std::max(worst, std::abs(maps[m - 1][i] - brute[i]) / std::max(1.0, scale));
    }
  }
  const double dt = seconds_since(t);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max rel err %.2e, %.1f s", worst, dt);
  report(1, "correlator maps match brute-force tuple enumeration (50 trials)",
         worst < 1e-10 && dt < 10.0, detail);
}

// ---- criterion 2: finite-difference gradient check ----
void criterion_2() {
  const auto t = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (uint64_t seed : {201ULL, 202ULL, 203ULL}) {
    ModelConfig cfg;
    cfg.m_max = 3;
    cfg.n_filters = 2;
    cfg.filter_size = 3;
    cfg.uniform_w = false;
    cfg.lattice_height = 5;
    cfg.lattice_width = 5;
    CCNNModel model = init_model(cfg, seed);

    Rng rng(seed);
    std::vector<RealMap> batch;
    std::vector<double> labels;
    for (int i = 0; i < 8; ++i) {
      batch.push_back(random_map(5, 5, rng));
      labels.push_back(i % 2);
    }
    const double gamma = 0.1;
    const TrainStep step = gradients(model, batch, labels, gamma, false);

    auto fd = [&](double* slot) {
      const double h = 1e-5, saved = *slot;
      *slot = saved + h;
      const double up = loss(model, batch, labels, gamma);
      *slot = saved - h;
      const double down = loss(model, batch, labels, gamma);
      *slot = saved;
      return (up - down) / (2.0 * h);
    };
    auto check = [&](double* slot, double analytic) {
      const double numeric = fd(slot);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    };

    for (int a = 0; a < cfg.n_filters; ++a)
      for (size_t i = 0; i < model.filters.raw[a].size(); ++i)
        check(&model.filters.raw[a][i], step.grad.raw_filters[a][i]);
    for (size_t i = 0; i < model.w.raw.size(); ++i)
      check(&model.w.raw[i], step.grad.raw_w[i]);
    for (size_t j = 0; j < model.head.beta.size(); ++j)
      check(&model.head.beta[j], step.grad.beta[j]);
    check(&model.head.bias, step.grad.bias);
  }
  const double dt = seconds_since(t);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max rel err %.2e, %.1f s", worst, dt);
  report(2, "analytic gradients match central finite differences (3 seeds)",
         worst < 1e-4 && dt < 30.0, detail);
}

// ---- criterion 3: D4 invariance of the eval-mode output ----
void criterion_3() {
  Rng rng(301);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig cfg;
    cfg.m_max = trial % 2 ? 2 : 3;
    cfg.n_filters = 2 + trial % 2;
    cfg.filter_size = 3 + trial % 3;
    cfg.uniform_w = trial % 4 == 0;
    cfg.lattice_height = 7;
    cfg.lattice_width = 7;
    CCNNModel model = init_model(cfg, 300 + trial);
    for (int j = 0; j < cfg.n_features(); ++j) {
      model.bn.running_mean[j] = rng.uniform(-1.0, 1.0);
      model.bn.running_var[j] = rng.uniform(0.5, 2.0);
      model.head.beta[j] = rng.uniform(-1.0, 1.0);
    }
    model.head.bias = rng.uniform(-1.0, 1.0);

    const RealMap dn = random_map(7, 7, rng);
    std::vector<RealMap> batch{dn};
    const double base = forward(model, batch, BNMode::Eval, false)[0];
    for (D4 g : kD4All) {
      std::vector<RealMap> tb{d4_transform(dn, g)};
      worst = std::max(worst,
                       std::abs(forward(model, tb, BNMode::Eval, false)[0] - base));
    }
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "max |dy| %.2e", worst);
  report(3, "eval output invariant under all 8 point-group transforms (20 trials)",
         worst < 1e-10, detail);
}

// ---- criterion 4: spatial route == Fourier route for uniform 2nd order ----
void criterion_4() {
  Rng rng(401);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig cfg;
    cfg.m_max = 2;
    cfg.n_filters = 3;
    cfg.filter_size = trial % 2 ? 3 : 4;
    cfg.uniform_w = true;
    cfg.lattice_height = 13;
    cfg.lattice_width = 13;
    CCNNModel model = init_model(cfg, 400 + trial);
    for (int j = 0; j < cfg.n_features(); ++j) {
      model.bn.running_mean[j] = rng.uniform(-2.0, 2.0);
      model.bn.running_var[j] = rng.uniform(0.5, 3.0);
      model.head.beta[j] = rng.uniform(-1.5, 1.5);
    }
    model.head.bias = rng.uniform(-1.0, 1.0);

    const FourierOPMap op = fourier_order_parameter(model, 16);
    const RealMap dn = random_map(13, 13, rng, -0.6, 0.6);
    std::vector<RealMap> batch{dn};
    const double spatial = forward(model, batch, BNMode::Eval, false)[0];
    const double fourier = order_parameter_value(op, dn);
    worst = std::max(worst, rel_err(spatial, fourier));
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "max rel err %.2e", worst);
  report(4, "uniform second-order output matches the k-space weighted route",
         worst < 1e-8, detail);
}

// ---- criterion 5: Plancherel + shift-invariant features ----
void criterion_5() {
  Rng rng(501);
  double worst_plancherel = 0.0, worst_sum = 0.0, worst_shift = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RealMap m = random_map(5 + trial % 9, 5 + (trial * 3) % 9, rng);
    const int K = 16;
    const ComplexMap f = dft2(m, K);
    double sum_k = 0.0, sum_x = 0.0;
    for (size_t i = 0; i < f.size(); ++i) sum_k += std::norm(f[i]);
    for (size_t i = 0; i < m.size(); ++i) sum_x += m[i] * m[i];
    worst_plancherel = std::max(worst_plancherel, rel_err(sum_k, K * K * sum_x));

    const RealMap spec = random_map(16, 16, rng, 0.0, 10.0);
    const RealMap phat = shift_invariant_features(spec);
    double total = 0.0, mx = 0.0;
    for (size_t i = 0; i < phat.size(); ++i) {
      total += phat[i];
      mx = std::max(mx, std::abs(phat[i]));
    }
    worst_sum = std::max(worst_sum, std::abs(total) / std::max(1.0, mx));
    RealMap shifted = spec;
    for (size_t i = 0; i < shifted.size(); ++i) shifted[i] += 3.7;
    const RealMap phat2 = shift_invariant_features(shifted);
    for (size_t i = 0; i < phat2.size(); ++i)
      worst_shift = std::max(worst_shift, std::abs(phat2[i] - phat[i]));
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "plancherel %.2e, sum %.2e, shift %.2e",
                worst_plancherel, worst_sum, worst_shift);
  report(5, "Plancherel identity and density-shift invariance",
         worst_plancherel < 1e-10 && worst_sum < 1e-9 && worst_shift < 1e-12, detail);
}

// ---- criterion 6: EM monotonicity + BIC selection ----
void criterion_6() {
  bool monotone = true;
  bool bic_ok = true;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(600 + seed);
    Eigen::MatrixXd data(180, 2);
    const double centers[3][2] = {{0, 0}, {14, 0}, {0, 14}};
    for (int i = 0; i < 180; ++i) {
      data(i, 0) = centers[i % 3][0] + rng.normal();
      data(i, 1) = centers[i % 3][1] + rng.normal();
    }
    double best = 1e300;
    int best_k = 0;
    for (int k = 1; k <= 6; ++k) {
      const GMMModel g = gmm_restart_search(data, k, 600 + seed, 40);
      for (size_t i = 1; i < g.ll_trace.size(); ++i)
        if (g.ll_trace[i] < g.ll_trace[i - 1] - 1e-9) monotone = false;
      const double b = bic(g, 180);
      if (b < best) {
        best = b;
        best_k = k;
      }
    }
    if (best_k != 3) bic_ok = false;
  }
  report(6, "EM log-likelihood monotone; BIC selects K=3 on 3 blobs (5 seeds)",
         monotone && bic_ok);
}

// ---- criterion 7: end-to-end synthetic pipeline ----
struct EndToEnd {
  GeneratedDataset gen;
  std::map<std::string, std::vector<ParameterPoint>> points;
  std::map<std::string, CCNNModel> models;
  std::map<std::string, double> val_acc;
};

std::map<std::string, std::vector<ParameterPoint>> pick_training_points(
    const GenerationPlan& plan, const GeneratedDataset& gen, int per_phase) {
  std::map<std::string, std::vector<size_t>> by_phase;
  for (size_t i = 0; i < gen.truth.phase_per_set.size(); ++i)
    by_phase[gen.truth.phase_per_set[i]].push_back(i);
  std::map<std::string, std::vector<ParameterPoint>> out;
  for (const auto& [phase, idx] : by_phase)
    for (int k = 0; k < per_phase; ++k) {
      // spread picks across the region, away from the ends
      const size_t pick = idx[(idx.size() - 1) * (k + 1) / (per_phase + 1)];
      out[phase].push_back(gen.dataset.sets[pick].point);
    }
  return out;
}

void criterion_7(EndToEnd& e2e, bool quick) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n_snapshots = quick ? 80 : 250;
  const GenerationPlan plan = make_six_phase_plan(8, 8, 0.03, n_snapshots);
  e2e.gen = generate_dataset(plan, 777);
  const Dataset& ds = e2e.gen.dataset;

  // ---- (a) unsupervised purity ----
  std::map<std::string, int> phase_ids;
  std::vector<int> truth;
  for (const std::string& name : e2e.gen.truth.phase_per_set) {
    if (!phase_ids.count(name)) phase_ids[name] = static_cast<int>(phase_ids.size());
    truth.push_back(phase_ids[name]);
  }
  const UnsupervisedResult unsup = cluster_phase_diagram(ds, 16, 10, 6, 777);
  std::vector<std::vector<int>> table(6, std::vector<int>(6, 0));
  for (size_t i = 0; i < truth.size(); ++i)
    table[unsup.assignment.labels[i]][truth[i]] += 1;
  int matched = 0;
  for (int c = 0; c < 6; ++c) {
    int best = 0;
    for (int p = 0; p < 6; ++p) best = std::max(best, table[c][p]);
    matched += best;
  }
  const double purity = static_cast<double>(matched) / truth.size();
  char detail[160];
  std::snprintf(detail, sizeof(detail), "purity %.3f", purity);
  report(7, "(a) unsupervised stage purity >= 0.9", purity >= 0.9, detail);

  // ---- (b) per-phase classifiers ----
  e2e.points = pick_training_points(plan, e2e.gen, 2);
  TrainConfig tc;
  tc.epochs = quick ? 10 : 30;
  tc.batch_size = 128;
  tc.gamma = 0.1;
  tc.arch.m_max = 3;
  tc.arch.n_filters = 3;
  tc.arch.filter_size = 3;
  tc.arch.uniform_w = false;

  bool acc_ok = true;
  std::string acc_detail;
  for (const auto& [phase, pts] : e2e.points) {
    const LabeledPool pool = build_pool(ds, e2e.points, phase);
    tc.seed = 7000 + phase_ids[phase];
    const TrainResult res = train(pool, tc);
    e2e.models.emplace(phase, res.model);
    const double acc = res.report.val_accuracy.back();
    e2e.val_acc[phase] = acc;
    const double floor = phase == "checkerboard" ? 0.99 : 0.95;
    if (acc < floor) acc_ok = false;
    char part[48];
    std::snprintf(part, sizeof(part), "%s %.3f ", phase.c_str(), acc);
    acc_detail += part;
  }
  report(7, "(b) per-phase validation accuracy >= 0.95 (checkerboard >= 0.99)",
         acc_ok, acc_detail);

  // ---- (c) phase diagram vs ground truth ----
  std::vector<std::pair<std::string, ConfidenceMap>> maps;
  for (const auto& [phase, model] : e2e.models)
    maps.emplace_back(phase, confidence_map(model, ds));
  const PhaseDiagram pd = phase_diagram(maps, 0.75);
  int good = 0;
  for (size_t i = 0; i < pd.points.size(); ++i)
    if (pd.labels[i].size() == 1 && pd.labels[i][0] == e2e.gen.truth.phase_per_set[i])
      ++good;
  const double agree = static_cast<double>(good) / pd.points.size();
  std::snprintf(detail, sizeof(detail), "agreement %.3f", agree);
  report(7, "(c) phase diagram at threshold 0.75 matches ground truth on >= 90%",
         agree >= 0.9, detail);

  // ---- (d) Fourier order-parameter maps of interpretation models ----
  TrainConfig ic = tc;
  ic.epochs = quick ? 10 : 30;
  ic.gamma = 0.0;
  ic.arch.m_max = 2;
  ic.arch.uniform_w = true;
  ic.arch.filter_size = 4;

  bool checker_ok = false, striated_ok = false;
  {
    const LabeledPool pool = build_pool(ds, e2e.points, "checkerboard");
    ic.seed = 7101;
    const TrainResult res = train(pool, ic);
    const FourierOPMap op = fourier_order_parameter(res.model, 16);
    int arg = 0;
    for (int i = 1; i < 256; ++i)
      if (op.weights[i] > op.weights[arg]) arg = i;
    checker_ok = (arg / 16 == 8 && arg % 16 == 8);
  }
  {
    const LabeledPool pool = build_pool(ds, e2e.points, "striated");
    ic.seed = 7102;
    const TrainResult res = train(pool, ic);
    const FourierOPMap op = fourier_order_parameter(res.model, 16);
    std::vector<std::pair<double, int>> entries;
    for (int i = 0; i < 256; ++i) entries.push_back({op.weights[i], i});
    std::sort(entries.rbegin(), entries.rend());
    bool has_pi0 = false, has_0pi = false;
    for (int t = 0; t < 8; ++t) {
      if (entries[t].second == 8 * 16 + 0) has_pi0 = true;
      if (entries[t].second == 0 * 16 + 8) has_0pi = true;
    }
    striated_ok = has_pi0 && has_0pi;
  }
  report(7, "(d) checkerboard argmax at (pi,pi); striated top weights at (pi,0)/(0,pi)",
         checker_ok && striated_ok);

  const double dt = seconds_since(t_start);
  std::snprintf(detail, sizeof(detail), "%.0f s", dt);
  report(7, "(runtime) end-to-end pipeline under 20 minutes", dt < 1200.0, detail);
}

// ---- criterion 8: ablation gap on edge-ordered data ----
void criterion_8(const EndToEnd& e2e, bool quick) {
  double uniform_mean = 0.0, learned_mean = 0.0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const LabeledPool pool = build_pool(e2e.gen.dataset, e2e.points, "edge_ordered");

    TrainConfig uc;  // 2nd order, w(x) = 1, 4x4 filters, gamma = 0
    uc.epochs = quick ? 8 : 20;
    uc.gamma = 0.0;
    uc.arch.m_max = 2;
    uc.arch.uniform_w = true;
    uc.arch.filter_size = 4;
    uc.seed = 800 + seed;
    uniform_mean += train(pool, uc).report.val_accuracy.back();

    TrainConfig lc = uc;  // 2nd order, learned w, 3x3 filters, gamma = 0.1
    lc.gamma = 0.1;
    lc.arch.uniform_w = false;
    lc.arch.filter_size = 3;
    lc.seed = 800 + seed;
    learned_mean += train(pool, lc).report.val_accuracy.back();
  }
  uniform_mean /= 5.0;
  learned_mean /= 5.0;
  char detail[96];
  std::snprintf(detail, sizeof(detail), "uniform %.3f, learned %.3f",
                uniform_mean, learned_mean);
  report(8, "learned-w 2nd-order beats uniform-w by >= 2 accuracy points (edge)",
         learned_mean - uniform_mean >= 0.02, detail);
}

// ---- criterion 9: sign-decomposition partition identity ----
void criterion_9(bool quick) {
  const SnapshotSet set = render(make_phase_spec("rhombic", 0.03), Lattice{13, 13},
                                 quick ? 80 : 250, 901);
  double worst = 0.0;
  const std::vector<std::array<std::pair<int, int>, 3>> triples = {
      {{{0, 0}, {0, 2}, {1, 1}}},
      {{{0, 0}, {1, 2}, {2, 0}}},
      {{{0, 0}, {0, 1}, {2, 2}}},
  };
  for (const auto& tr : triples) {
    const SignDecomposition sd = sign_decomposition(set, tr[0], tr[1], tr[2]);
    const double direct = three_point_correlator(set, tr[0], tr[1], tr[2]);
    const double recombined = sd.ppp - 3.0 * sd.ppm_avg + 3.0 * sd.pmm_avg - sd.mmm;
    worst = std::max(worst, std::abs(recombined - direct));
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "max |recombined - direct| %.2e", worst);
  report(9, "sign-decomposition classes recombine to the three-point correlator",
         worst < 1e-10, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  g_t0 = std::chrono::steady_clock::now();

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  EndToEnd e2e;
  criterion_7(e2e, quick);
  criterion_8(e2e, quick);
  criterion_9(quick);

  std::printf("%s: %d failure(s), total %.0f s\n", g_failures ? "FAIL" : "PASS",
              g_failures, seconds_since(g_t0));
  return g_failures ? 1 : 0;
}
