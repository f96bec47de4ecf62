#include "ccnn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ccnn/d4.hpp"
#include "ccnn/io_util.hpp"
#include "ccnn/rng.hpp"
#include "json.hpp"

using nlohmann::json;

namespace ccnn {

void ModelConfig::validate() const {
  if (m_max < 2 || m_max > 3)
    throw std::invalid_argument("ModelConfig: m_max must be 2 or 3");
  if (n_filters < 1) throw std::invalid_argument("ModelConfig: n_filters < 1");
  if (filter_size < 3 || filter_size > 5)
    throw std::invalid_argument("ModelConfig: filter_size must be 3, 4 or 5");
  if (lattice_height < 1 || lattice_width < 1)
    throw std::invalid_argument("ModelConfig: lattice must be positive");
  if (lattice_height != lattice_width)
    throw std::invalid_argument("ModelConfig: lattice must be square for D4");
}

RealMap SpatialWeight::effective() const {
  if (uniform) return RealMap(raw.rows(), raw.cols(), 1.0);
  return d4_project(raw);
}

CCNNModel init_model(const ModelConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  CCNNModel m;
  m.config = config;

  const int F = config.filter_size;
  const double k = 1.0 / F;
  for (int a = 0; a < config.n_filters; ++a) {
    RealMap f(F, F);
    for (size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform(-k, k);
    m.filters.raw.push_back(std::move(f));
  }

  m.w.uniform = config.uniform_w;
  m.w.raw = RealMap(config.out_rows(), config.out_cols(), 1.0);
  if (!config.uniform_w)
    for (size_t i = 0; i < m.w.raw.size(); ++i) m.w.raw[i] = rng.uniform(-0.1, 0.1);

  m.head.nonneg = config.nonneg_beta;
  m.head.beta.resize(config.n_features());
  for (double& b : m.head.beta)
    b = config.nonneg_beta ? rng.uniform(0.0, 0.1) : rng.uniform(-0.1, 0.1);
  m.head.bias = 0.0;

  m.bn.running_mean.assign(config.n_features(), 0.0);
  m.bn.running_var.assign(config.n_features(), 1.0);
  m.bn.momentum = config.bn_momentum;
  m.bn.eps = config.bn_eps;
  return m;
}

namespace {

json map_to_json(const RealMap& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["data"] = m.data();
  return out;
}

RealMap map_from_json(const json& j) {
  RealMap m(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto& data = j.at("data");
  if (data.size() != m.size())
    throw std::runtime_error("checkpoint: map data size mismatch");
  for (size_t i = 0; i < m.size(); ++i) m[i] = data[i].get<double>();
  return m;
}

}  // namespace

std::string checkpoint_serialize(const CCNNModel& model,
                                 const CheckpointMeta& metadata) {
  json j;
  j["format"] = "ccnn-checkpoint";
  j["version"] = 1;
  j["config"] = {
      {"m_max", model.config.m_max},
      {"n_filters", model.config.n_filters},
      {"filter_size", model.config.filter_size},
      {"uniform_w", model.config.uniform_w},
      {"nonneg_beta", model.config.nonneg_beta},
      {"lattice_height", model.config.lattice_height},
      {"lattice_width", model.config.lattice_width},
      {"bn_momentum", model.config.bn_momentum},
      {"bn_eps", model.config.bn_eps},
  };
  j["raw_filters"] = json::array();
  for (const auto& f : model.filters.raw) j["raw_filters"].push_back(map_to_json(f));
  j["raw_w"] = map_to_json(model.w.raw);
  j["beta"] = model.head.beta;
  j["bias"] = model.head.bias;
  j["bn_running_mean"] = model.bn.running_mean;
  j["bn_running_var"] = model.bn.running_var;
  j["tool_version"] = kToolVersion;
  j["metadata"] = metadata;
  return j.dump(2) + "\n";
}

CCNNModel checkpoint_deserialize(const std::string& text, CheckpointMeta* metadata) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "ccnn-checkpoint")
    throw std::runtime_error("bad checkpoint: wrong format tag");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("bad checkpoint: unsupported version");

  CCNNModel m;
  const json& c = j.at("config");
  m.config.m_max = c.at("m_max").get<int>();
  m.config.n_filters = c.at("n_filters").get<int>();
  m.config.filter_size = c.at("filter_size").get<int>();
  m.config.uniform_w = c.at("uniform_w").get<bool>();
  m.config.nonneg_beta = c.at("nonneg_beta").get<bool>();
  m.config.lattice_height = c.at("lattice_height").get<int>();
  m.config.lattice_width = c.at("lattice_width").get<int>();
  m.config.bn_momentum = c.at("bn_momentum").get<double>();
  m.config.bn_eps = c.at("bn_eps").get<double>();
  m.config.validate();

  for (const auto& f : j.at("raw_filters")) m.filters.raw.push_back(map_from_json(f));
  if (static_cast<int>(m.filters.raw.size()) != m.config.n_filters)
    throw std::runtime_error("bad checkpoint: filter count mismatch");
  m.w.uniform = m.config.uniform_w;
  m.w.raw = map_from_json(j.at("raw_w"));
  m.head.beta = j.at("beta").get<std::vector<double>>();
  if (static_cast<int>(m.head.beta.size()) != m.config.n_features())
    throw std::runtime_error("bad checkpoint: beta size mismatch");
  m.head.bias = j.at("bias").get<double>();
  m.head.nonneg = m.config.nonneg_beta;
  m.bn.running_mean = j.at("bn_running_mean").get<std::vector<double>>();
  m.bn.running_var = j.at("bn_running_var").get<std::vector<double>>();
  m.bn.momentum = m.config.bn_momentum;
  m.bn.eps = m.config.bn_eps;
  if (metadata && j.contains("metadata"))
    *metadata = j["metadata"].get<CheckpointMeta>();
  return m;
}

void checkpoint_save(const CCNNModel& model, const std::string& path,
                     const CheckpointMeta& metadata) {
  write_file(path, checkpoint_serialize(model, metadata));
}

CCNNModel checkpoint_load(const std::string& path, CheckpointMeta* metadata) {
  return checkpoint_deserialize(read_file(path), metadata);
}

}  // namespace ccnn
