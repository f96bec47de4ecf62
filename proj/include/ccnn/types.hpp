#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccnn {

// Dense row-major 2D array. Coordinates are x = (row, col), origin top-left.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative shape");
  }
  Grid(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
    v_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols_)
        throw std::invalid_argument("Grid: ragged initializer");
      for (const auto& x : row) v_.push_back(x);
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }
  bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  T& operator()(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }
  T& operator[](size_t i) { return v_[i]; }
  const T& operator[](size_t i) const { return v_[i]; }

  std::vector<T>& data() { return v_; }
  const std::vector<T>& data() const { return v_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> v_;
};

using RealMap = Grid<double>;

struct Lattice {
  int width = 13;
  int height = 13;
  bool operator==(const Lattice&) const = default;
};

// One projective readout: one bit per site, 1 = excited.
struct Snapshot {
  Lattice lattice;
  Grid<uint8_t> bits;  // height x width, entries in {0,1}

  Snapshot() = default;
  Snapshot(Lattice lat, Grid<uint8_t> b) : lattice(lat), bits(std::move(b)) {
    if (bits.rows() != lattice.height || bits.cols() != lattice.width)
      throw std::invalid_argument("Snapshot: bits shape != lattice");
    for (auto x : bits.data())
      if (x > 1) throw std::invalid_argument("Snapshot: entries must be 0/1");
  }
};

struct ParameterPoint {
  double delta_over_omega = 0.0;
  double rb_over_a = 0.0;
  bool operator==(const ParameterPoint&) const = default;
};

// All snapshots taken at one parameter-space point; all share one lattice.
struct SnapshotSet {
  ParameterPoint point;
  std::vector<Snapshot> snapshots;

  const Lattice& lattice() const {
    if (snapshots.empty()) throw std::invalid_argument("SnapshotSet: empty");
    return snapshots.front().lattice;
  }
};

struct GridIndex {
  int rows = 0, cols = 0;
  std::vector<int> index;  // rows*cols entries, bijection onto set indices

  int at(int r, int c) const { return index[static_cast<size_t>(r) * cols + c]; }
};

struct Dataset {
  std::vector<SnapshotSet> sets;
  std::optional<GridIndex> grid;

  void validate_grid() const {
    if (!grid) return;
    if (grid->index.size() != static_cast<size_t>(grid->rows) * grid->cols)
      throw std::invalid_argument("Dataset: grid size mismatch");
    std::vector<char> seen(sets.size(), 0);
    for (int i : grid->index) {
      if (i < 0 || i >= static_cast<int>(sets.size()) || seen[i])
        throw std::invalid_argument("Dataset: grid index not a bijection");
      seen[i] = 1;
    }
    if (grid->index.size() != sets.size())
      throw std::invalid_argument("Dataset: grid does not cover all sets");
  }
};

}  // namespace ccnn
