#pragma once

// Small synthetic dataset with a planted hierarchy, for smoke tests and
// demos. Items hang off subcategories (relation 0, item -> subcategory),
// subcategories hang off top categories (relation 1). Each user prefers one
// top category and interacts with its items with a probability that decays
// geometrically with the item's popularity rank, plus occasional
// out-of-category noise.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <vector>

#include "hakg/data.hpp"

namespace hakg {

struct SyntheticSpec {
  std::size_t num_users = 30;
  std::size_t num_items = 20;
  std::size_t num_top = 3;          // top categories
  std::size_t subs_per_top = 4;     // subcategories per top category
  double head_prob = 0.98;          // in-category probability for the most popular item
  double prob_decay = 0.6;          // ratio per popularity rank
  double noise_prob = 0.05;         // any out-of-category item
  std::uint64_t seed = 7;
};

struct SyntheticData {
  std::vector<Interaction> interactions;
  std::vector<Triplet> kg;  // canonical, file id space: items first
  std::vector<std::size_t> item_category;
};

inline SyntheticData make_synthetic(const SyntheticSpec& spec = {}) {
  SyntheticData out;
  const std::size_t n_sub = spec.num_top * spec.subs_per_top;
  const auto sub_id = [&](std::size_t s) { return static_cast<Id>(spec.num_items + s); };
  const auto top_id = [&](std::size_t c) { return static_cast<Id>(spec.num_items + n_sub + c); };

  std::vector<std::size_t> rank_in_cat(spec.num_items);
  std::vector<std::size_t> seen(spec.num_top, 0);
  out.item_category.resize(spec.num_items);
  for (std::size_t i = 0; i < spec.num_items; ++i) {
    const std::size_t c = i * spec.num_top / spec.num_items;
    out.item_category[i] = c;
    rank_in_cat[i] = seen[c]++;
    const std::size_t s = c * spec.subs_per_top + rank_in_cat[i] % spec.subs_per_top;
    out.kg.push_back({static_cast<Id>(i), 0, sub_id(s)});
  }
  for (std::size_t s = 0; s < n_sub; ++s) out.kg.push_back({sub_id(s), 1, top_id(s / spec.subs_per_top)});

  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    const std::size_t pref = u % spec.num_top;
    for (std::size_t i = 0; i < spec.num_items; ++i) {
      const double p = out.item_category[i] == pref
                           ? spec.head_prob * std::pow(spec.prob_decay, static_cast<double>(rank_in_cat[i]))
                           : spec.noise_prob;
      if (uniform() < p) out.interactions.push_back({static_cast<Id>(u), static_cast<Id>(i)});
    }
  }
  return out;
}

/// Splits per user and assembles the dense dataset.
inline Dataset synthetic_dataset(const SyntheticSpec& spec = {}, const PrepConfig& prep = {}) {
  const auto raw = make_synthetic(spec);
  return assemble_dataset(split_interactions(raw.interactions, prep.ratios, prep.seed), raw.kg, prep);
}

/// Writes train.txt / valid.txt / test.txt / kg_final.txt into `dir`.
inline void write_synthetic(const std::filesystem::path& dir, const SyntheticSpec& spec = {},
                            const PrepConfig& prep = {}) {
  std::filesystem::create_directories(dir);
  const auto raw = make_synthetic(spec);
  const auto split = split_interactions(raw.interactions, prep.ratios, prep.seed);
  auto write_pairs = [&](const char* name, const std::vector<Interaction>& pairs) {
    std::map<Id, std::vector<Id>> by_user;
    for (std::size_t u = 0; u < spec.num_users; ++u) by_user[static_cast<Id>(u)];
    for (const auto& p : pairs) by_user[p.user].push_back(p.item);
    std::ofstream out(dir / name);
    for (const auto& [u, items] : by_user) {
      out << u;
      for (Id i : items) out << ' ' << i;
      out << '\n';
    }
  };
  write_pairs("train.txt", split.train);
  write_pairs("valid.txt", split.valid);
  write_pairs("test.txt", split.test);
  std::ofstream kg(dir / "kg_final.txt");
  for (const auto& t : raw.kg) kg << t.head << ' ' << t.relation << ' ' << t.tail << '\n';
}

}  // namespace hakg
