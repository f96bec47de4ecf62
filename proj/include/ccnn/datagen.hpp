#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccnn/dataset_io.hpp"
#include "ccnn/types.hpp"

namespace ccnn {

// One unit cell of an idealized ordering. Cells are deterministic 0/1 or an
// independent Bernoulli draw per snapshot (the superposed sublattice of the
// striated ordering).
struct Tile {
  enum class Cell : uint8_t { Zero, One, Bernoulli };
  int period_rows = 0, period_cols = 0;
  Grid<Cell> cells;
  double q = 0.0;  // Bernoulli cell probability

  Tile() = default;
  Tile(int pr, int pc) : period_rows(pr), period_cols(pc), cells(pr, pc, Cell::Zero) {}
};

struct NoiseModel {
  double p_flip = 0.0;  // symmetric per-site bit flip, in [0, 0.5)
};

enum class PhaseMode { Tiled, EdgeOrdered, Disordered };

struct PhaseSpec {
  std::string name;
  PhaseMode mode = PhaseMode::Tiled;
  Tile tile;
  NoiseModel noise;
  double q = 0.3;           // striated superposition amplitude
  double bernoulli_p = 0.15;  // disordered site probability / edge bulk density
  // draw a uniform tiling offset per snapshot (shot-to-shot symmetry
  // breaking); off by default so w(x) sublattice structure is reproducible
  bool random_offset = false;
};

// Built-in orderings: checkerboard, striated, star, rhombic.
// The star and rhombic tiles are frozen against their spectral peak checks.
Tile ideal_tile(const std::string& phase_name, double q = 0.3);

PhaseSpec make_phase_spec(const std::string& name, double p_flip = 0.0,
                          double q = 0.3);

// Tiles the lattice from the origin (no sublattice offset), samples
// Bernoulli cells per snapshot, then applies the bit-flip noise. The
// edge-ordered mode draws a Z2 alternation phase for the boundary ring per
// snapshot over an i.i.d. Bernoulli bulk; the disordered mode is i.i.d.
SnapshotSet render(const PhaseSpec& spec, const Lattice& lattice, int n_snapshots,
                   uint64_t seed);

struct GenerationPlan {
  Lattice lattice;
  int count = 250;
  std::vector<double> delta_values;  // per grid column
  std::vector<double> rb_values;     // per grid row
  std::vector<std::string> layout;   // rows*cols phase names, row-major
  std::vector<PhaseSpec> phases;

  const PhaseSpec& phase(const std::string& name) const;
  int rows() const { return static_cast<int>(rb_values.size()); }
  int cols() const { return static_cast<int>(delta_values.size()); }
};

struct GeneratedDataset {
  Dataset dataset;
  GroundTruth truth;
};

// One set per grid point; per-set randomness is derived from
// (seed, set index) so generation order does not matter.
GeneratedDataset generate_dataset(const GenerationPlan& plan, uint64_t seed);

// A 6-region plan (checkerboard, striated, star, rhombic, edge-ordered,
// disordered) laid out over an at-least-8x8 synthetic parameter grid.
GenerationPlan make_six_phase_plan(int rows = 8, int cols = 8,
                                   double p_flip = 0.03, int count = 250,
                                   Lattice lattice = {13, 13});

}  // namespace ccnn
