#include "ccnn/dataset_io.hpp"

#include <filesystem>
#include <sstream>

#include "ccnn/io_util.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ccnn {

namespace {

std::string render_set(const SnapshotSet& set) {
  std::string out;
  const Lattice& lat = set.lattice();
  out.reserve(set.snapshots.size() * (lat.height * (lat.width + 1) + 1));
  for (size_t i = 0; i < set.snapshots.size(); ++i) {
    if (i) out += '\n';
    const Snapshot& s = set.snapshots[i];
    for (int r = 0; r < lat.height; ++r) {
      for (int c = 0; c < lat.width; ++c)
        out += s.bits(r, c) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

std::vector<Snapshot> parse_set(const std::string& text, const Lattice& lat,
                                int count, const std::string& path) {
  std::vector<Snapshot> out;
  out.reserve(count);
  std::istringstream in(text);
  std::string line;
  Grid<uint8_t> bits(lat.height, lat.width, 0);
  int row = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("bad snapshot data in " + path + ": " + why);
  };
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (row != 0) fail("blank line inside a block");
      continue;
    }
    if (static_cast<int>(line.size()) != lat.width) fail("wrong line width");
    for (int c = 0; c < lat.width; ++c) {
      if (line[c] == '0') bits(row, c) = 0;
      else if (line[c] == '1') bits(row, c) = 1;
      else fail("character outside {0,1}");
    }
    if (++row == lat.height) {
      out.emplace_back(lat, bits);
      row = 0;
    }
  }
  if (row != 0) fail("truncated block");
  if (static_cast<int>(out.size()) != count) fail("block count != manifest count");
  return out;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir,
                  const std::string& manifest_name) {
  ds.validate_grid();
  fs::create_directories(dir);
  json manifest;
  manifest["sets"] = json::array();
  for (size_t i = 0; i < ds.sets.size(); ++i) {
    const SnapshotSet& set = ds.sets[i];
    char name[32];
    std::snprintf(name, sizeof(name), "set_%04zu.txt", i);
    write_file((fs::path(dir) / name).string(), render_set(set));
    manifest["sets"].push_back({
        {"delta_over_omega", set.point.delta_over_omega},
        {"rb_over_a", set.point.rb_over_a},
        {"lattice", {set.lattice().height, set.lattice().width}},
        {"count", set.snapshots.size()},
        {"data_file", name},
    });
  }
  if (ds.grid) {
    json idx = json::array();
    for (int r = 0; r < ds.grid->rows; ++r) {
      json row = json::array();
      for (int c = 0; c < ds.grid->cols; ++c) row.push_back(ds.grid->at(r, c));
      idx.push_back(row);
    }
    manifest["grid"] = {{"rows", ds.grid->rows}, {"cols", ds.grid->cols}, {"index", idx}};
  }
  write_file((fs::path(dir) / manifest_name).string(), manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& manifest_path) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw std::runtime_error("bad manifest " + manifest_path + ": " + e.what());
  }
  const fs::path dir = fs::path(manifest_path).parent_path();
  Dataset ds;
  for (const auto& entry : manifest.at("sets")) {
    SnapshotSet set;
    set.point.delta_over_omega = entry.at("delta_over_omega").get<double>();
    set.point.rb_over_a = entry.at("rb_over_a").get<double>();
    Lattice lat;
    lat.height = entry.at("lattice").at(0).get<int>();
    lat.width = entry.at("lattice").at(1).get<int>();
    if (lat.height < 1 || lat.width < 1)
      throw std::runtime_error("manifest lattice must be positive");
    const int count = entry.at("count").get<int>();
    if (count < 1) throw std::runtime_error("manifest count must be positive");
    const std::string data_file = entry.at("data_file").get<std::string>();
    const std::string path = (dir / data_file).string();
    set.snapshots = parse_set(read_file(path), lat, count, path);
    ds.sets.push_back(std::move(set));
  }
  if (manifest.contains("grid")) {
    GridIndex g;
    g.rows = manifest["grid"].at("rows").get<int>();
    g.cols = manifest["grid"].at("cols").get<int>();
    for (const auto& row : manifest["grid"].at("index"))
      for (const auto& v : row) g.index.push_back(v.get<int>());
    ds.grid = std::move(g);
  }
  ds.validate_grid();
  return ds;
}

void save_ground_truth(const Dataset& ds, const GroundTruth& gt,
                       const std::string& path) {
  if (gt.phase_per_set.size() != ds.sets.size())
    throw std::invalid_argument("ground truth size != set count");
  json out = json::array();
  for (size_t i = 0; i < ds.sets.size(); ++i) {
    out.push_back({
        {"set", i},
        {"delta_over_omega", ds.sets[i].point.delta_over_omega},
        {"rb_over_a", ds.sets[i].point.rb_over_a},
        {"phase", gt.phase_per_set[i]},
    });
  }
  write_file(path, out.dump(2) + "\n");
}

GroundTruth load_ground_truth(const std::string& path, size_t n_sets) {
  json in = json::parse(read_file(path));
  GroundTruth gt;
  gt.phase_per_set.assign(n_sets, "");
  for (const auto& rec : in) {
    const size_t i = rec.at("set").get<size_t>();
    if (i >= n_sets) throw std::runtime_error("ground truth set index out of range");
    gt.phase_per_set[i] = rec.at("phase").get<std::string>();
  }
  for (const auto& p : gt.phase_per_set)
    if (p.empty()) throw std::runtime_error("ground truth missing a set");
  return gt;
}

}  // namespace ccnn
