#include "ccnn/datagen.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>

#include "ccnn/rng.hpp"

namespace ccnn {

Tile ideal_tile(const std::string& phase_name, double q) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("ideal_tile: q outside [0,1]");
  if (phase_name == "checkerboard") {
    Tile t(2, 2);
    t.cells(0, 0) = Tile::Cell::One;
    t.cells(1, 1) = Tile::Cell::One;
    return t;
  }
  if (phase_name == "striated") {
    Tile t(2, 2);
    t.cells(0, 0) = Tile::Cell::One;
    t.cells(1, 1) = Tile::Cell::Bernoulli;
    t.q = q;
    return t;
  }
  if (phase_name == "star") {
    // period-4 stripes: density 1/4, dominant power at (pi/2,0),(pi,0)
    Tile t(4, 4);
    for (int c = 0; c < 4; ++c) t.cells(0, c) = Tile::Cell::One;
    return t;
  }
  if (phase_name == "rhombic") {
    // two-wave threshold pattern with fundamentals at (pi, pi/4), (2pi/5, pi)
    Tile t(10, 8);
    for (int r = 0; r < 10; ++r)
      for (int c = 0; c < 8; ++c) {
        const double field = std::cos(std::numbers::pi * (r + c / 4.0)) +
                             std::cos(std::numbers::pi * (0.4 * r + c));
        if (field > 0.8) t.cells(r, c) = Tile::Cell::One;
      }
    return t;
  }
  throw std::invalid_argument("ideal_tile: unknown phase name: " + phase_name);
}

PhaseSpec make_phase_spec(const std::string& name, double p_flip, double q) {
  PhaseSpec spec;
  spec.name = name;
  spec.noise.p_flip = p_flip;
  spec.q = q;
  if (name == "edge_ordered") {
    spec.mode = PhaseMode::EdgeOrdered;
  } else if (name == "disordered") {
    spec.mode = PhaseMode::Disordered;
  } else {
    spec.mode = PhaseMode::Tiled;
    spec.tile = ideal_tile(name, q);
  }
  return spec;
}

SnapshotSet render(const PhaseSpec& spec, const Lattice& lattice, int n_snapshots,
                   uint64_t seed) {
  if (n_snapshots < 1) throw std::invalid_argument("render: n_snapshots < 1");
  if (spec.noise.p_flip < 0.0 || spec.noise.p_flip >= 0.5)
    throw std::invalid_argument("render: p_flip outside [0, 0.5)");
  if (spec.mode == PhaseMode::Tiled &&
      (lattice.height < spec.tile.period_rows || lattice.width < spec.tile.period_cols))
    throw std::invalid_argument("render: lattice smaller than tile period");

  Rng rng(seed);
  SnapshotSet set;
  set.snapshots.reserve(n_snapshots);
  for (int i = 0; i < n_snapshots; ++i) {
    Grid<uint8_t> bits(lattice.height, lattice.width, 0);
    switch (spec.mode) {
      case PhaseMode::Tiled: {
        int dr = 0, dc = 0;
        if (spec.random_offset) {
          dr = static_cast<int>(rng.uniform_int(spec.tile.period_rows));
          dc = static_cast<int>(rng.uniform_int(spec.tile.period_cols));
        }
        for (int r = 0; r < lattice.height; ++r)
          for (int c = 0; c < lattice.width; ++c) {
            const Tile::Cell cell = spec.tile.cells((r + dr) % spec.tile.period_rows,
                                                    (c + dc) % spec.tile.period_cols);
            if (cell == Tile::Cell::One) bits(r, c) = 1;
            else if (cell == Tile::Cell::Bernoulli) bits(r, c) = rng.bernoulli(spec.tile.q);
          }
        break;
      }
      case PhaseMode::EdgeOrdered: {
        // Z2 alternation phase drawn per snapshot; the perimeter of a square
        // lattice has even length, so (r+c+z) parity alternates consistently.
        const int z = rng.bernoulli(0.5) ? 1 : 0;
        for (int r = 0; r < lattice.height; ++r)
          for (int c = 0; c < lattice.width; ++c) {
            const bool on_ring = r == 0 || r == lattice.height - 1 || c == 0 ||
                                 c == lattice.width - 1;
            if (on_ring) bits(r, c) = (r + c + z) % 2 == 0;
            else bits(r, c) = rng.bernoulli(spec.bernoulli_p);
          }
        break;
      }
      case PhaseMode::Disordered: {
        for (size_t x = 0; x < bits.size(); ++x)
          bits[x] = rng.bernoulli(spec.bernoulli_p);
        break;
      }
    }
    if (spec.noise.p_flip > 0.0)
      for (size_t x = 0; x < bits.size(); ++x)
        if (rng.bernoulli(spec.noise.p_flip)) bits[x] ^= 1;
    set.snapshots.emplace_back(lattice, std::move(bits));
  }
  return set;
}

const PhaseSpec& GenerationPlan::phase(const std::string& name) const {
  for (const PhaseSpec& p : phases)
    if (p.name == name) return p;
  throw std::invalid_argument("GenerationPlan: unknown phase name: " + name);
}

GeneratedDataset generate_dataset(const GenerationPlan& plan, uint64_t seed) {
  const int R = plan.rows(), C = plan.cols();
  if (R < 1 || C < 1) throw std::invalid_argument("generate_dataset: empty plan");
  if (plan.layout.size() != static_cast<size_t>(R) * C)
    throw std::invalid_argument("generate_dataset: layout size != grid");
  for (const std::string& name : plan.layout) plan.phase(name);  // name check

  GeneratedDataset out;
  out.dataset.sets.resize(static_cast<size_t>(R) * C);
  out.truth.phase_per_set.resize(static_cast<size_t>(R) * C);

  std::vector<std::exception_ptr> errors(static_cast<size_t>(R) * C);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < R * C; ++s) {
    try {
      const int r = s / C, c = s % C;
      const PhaseSpec& spec = plan.phase(plan.layout[s]);
      SnapshotSet set = render(spec, plan.lattice, plan.count, derive_seed(seed, s));
      set.point = {plan.delta_values[c], plan.rb_values[r]};
      out.dataset.sets[s] = std::move(set);
      out.truth.phase_per_set[s] = spec.name;
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  GridIndex grid;
  grid.rows = R;
  grid.cols = C;
  grid.index.resize(static_cast<size_t>(R) * C);
  for (int s = 0; s < R * C; ++s) grid.index[s] = s;
  out.dataset.grid = std::move(grid);
  return out;
}

GenerationPlan make_six_phase_plan(int rows, int cols, double p_flip, int count,
                                   Lattice lattice) {
  if (rows < 8 || cols < 8)
    throw std::invalid_argument("make_six_phase_plan: grid must be at least 8x8");
  GenerationPlan plan;
  plan.lattice = lattice;
  plan.count = count;
  for (int c = 0; c < cols; ++c)
    plan.delta_values.push_back(-2.0 + 6.6 * c / (cols - 1));
  for (int r = 0; r < rows; ++r)
    plan.rb_values.push_back(1.05 + 0.95 * r / (rows - 1));

  for (const char* name :
       {"checkerboard", "striated", "star", "rhombic", "edge_ordered", "disordered"}) {
    PhaseSpec spec = make_phase_spec(name, p_flip);
    // shot-to-shot symmetry breaking: per-site normalization would otherwise
    // subtract the deterministic orderings entirely and leave only flip noise
    spec.random_offset = spec.mode == PhaseMode::Tiled;
    plan.phases.push_back(std::move(spec));
  }

  // Region layout loosely following the experimental topology: disordered at
  // low detuning, checkerboard at low blockade radius, striated/star/rhombic
  // stacked above it, an edge-ordered pocket in between.
  plan.layout.resize(static_cast<size_t>(rows) * cols);
  auto band = [&](int v, int n) { return v * 4 / n; };  // 4 bands per axis
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::string name;
      if (band(c, cols) == 0) {
        name = "disordered";
      } else if (band(r, rows) == 0) {
        name = "checkerboard";
      } else if (band(c, cols) == 1) {
        name = "edge_ordered";
      } else if (band(r, rows) == 1) {
        name = "striated";
      } else if (band(r, rows) == 2) {
        name = "star";
      } else {
        name = "rhombic";
      }
      plan.layout[static_cast<size_t>(r) * cols + c] = name;
    }
  return plan;
}

}  // namespace ccnn
