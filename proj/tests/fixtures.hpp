#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hakg/hakg.hpp"
#include "oracle.hpp"

namespace fixtures {

/// 3 users, 3 items, 4 attribute entities, 2 relations; relation 0 links
/// items to attributes, relation 1 links attributes to each other.
inline hakg::Dataset toy_dataset() {
  hakg::InteractionSplit split;
  split.train = {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 0}, {2, 2}};
  split.test = {{0, 2}, {1, 0}, {2, 1}};
  const std::vector<hakg::Triplet> kg = {{0, 0, 3}, {1, 0, 3}, {2, 0, 4}, {3, 1, 5}, {4, 1, 5}, {5, 1, 6}};
  hakg::PrepConfig prep;
  prep.hops = 0;
  return hakg::assemble_dataset(split, kg, prep);
}

inline hakg::ModelConfig toy_model_config(std::size_t layers = 1) {
  hakg::ModelConfig cfg;
  cfg.dim = 4;
  cfg.layers = layers;
  cfg.angle_weight = 0.5;
  return cfg;
}

/// Uniform entries in [-scale, scale].
inline hakg::ModelParams random_params(const hakg::ModelShape& shape, std::uint64_t seed, double scale = 0.6) {
  hakg::ModelParams p(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto* t : p.tensors()) {
    for (auto& x : t->data) x = u(rng);
  }
  return p;
}

inline oracle::RawParams to_raw(const hakg::ModelParams& p) {
  auto rows = [](const hakg::Table<double>& t) {
    std::vector<oracle::V> out;
    for (std::size_t i = 0; i < t.rows; ++i) out.push_back(t.row(i));
    return out;
  };
  return {rows(p.user), rows(p.collab_item), rows(p.entity), rows(p.relation), rows(p.gate_w1), rows(p.gate_w2)};
}

/// Configuration for the synthetic training smoke runs.
struct SmokeConfig {
  hakg::ModelConfig model;
  hakg::TrainConfig train;
};

inline SmokeConfig smoke_config(std::size_t epochs = 200) {
  SmokeConfig c;
  c.model.dim = 16;
  c.model.layers = 2;
  c.model.angle_weight = 1e-3;
  c.train.learning_rate = 0.01;
  c.train.num_negatives = 16;
  c.train.margin = 0.6;
  c.train.max_epochs = epochs;
  c.train.patience = epochs;
  c.train.eval_k = 5;
  return c;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hakg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
