#pragma once

// Interaction graph and knowledge graph: loading, cleaning, splitting,
// re-indexing and hierarchical-relation tagging.
//
// Id layout after `build_dataset`: users are dense in [0, num_users); items
// are dense in [0, num_items) and occupy the same ids in the entity space;
// the remaining KG entities follow at [num_items, num_entities). Relation ids
// keep their file values r in [0, R); inverse relations are r + R.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hakg/error.hpp"

namespace hakg {

using Id = std::uint32_t;

struct Interaction {
  Id user = 0;
  Id item = 0;
  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

struct Triplet {
  Id head = 0;
  Id relation = 0;
  Id tail = 0;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

struct KgEdge {
  Id relation = 0;
  Id tail = 0;
  friend auto operator<=>(const KgEdge&, const KgEdge&) = default;
};

struct HierPair {
  Id item = 0;
  Id entity = 0;
  friend auto operator<=>(const HierPair&, const HierPair&) = default;
};

struct InteractionGraph {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<Interaction> train, valid, test;
  std::vector<std::vector<Id>> user_items;  // N_u over train, sorted
  std::vector<std::vector<Id>> item_users;  // N~_i over train, sorted

  /// Rebuilds both adjacency lists from `train`.
  void index() {
    user_items.assign(num_users, {});
    item_users.assign(num_items, {});
    for (const auto& p : train) {
      user_items[p.user].push_back(p.item);
      item_users[p.item].push_back(p.user);
    }
    for (auto& v : user_items) std::sort(v.begin(), v.end());
    for (auto& v : item_users) std::sort(v.begin(), v.end());
  }

  bool in_train(Id user, Id item) const {
    const auto& items = user_items[user];
    return std::binary_search(items.begin(), items.end(), item);
  }
};

struct KnowledgeGraph {
  std::size_t num_entities = 0;
  std::size_t num_items = 0;
  std::size_t num_relations = 0;  // canonical R
  std::vector<Triplet> triplets;  // canonical followed by inverse
  std::size_t num_canonical = 0;
  std::vector<std::vector<KgEdge>> neighbors;  // N_x, sorted
  std::vector<bool> hierarchical;               // per canonical relation
  std::vector<HierPair> hier_pairs;             // H, sorted and unique

  std::size_t num_relations_with_inverse() const noexcept { return 2 * num_relations; }

  void index() {
    neighbors.assign(num_entities, {});
    for (const auto& t : triplets) neighbors[t.head].push_back({t.relation, t.tail});
    for (auto& v : neighbors) std::sort(v.begin(), v.end());
  }
};

struct Dataset {
  InteractionGraph interactions;
  KnowledgeGraph kg;
  std::vector<Id> user_original_ids;    // dense -> file id
  std::vector<Id> entity_original_ids;  // dense -> file id (items first)
};

struct DatasetStats {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_interactions = 0;  // all splits
  std::size_t num_train = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // canonical
  std::size_t num_triplets = 0;   // canonical
  std::size_t num_hier_pairs = 0;
  std::vector<std::size_t> item_popularity;  // train degree
  std::vector<std::size_t> user_degree;      // train degree
};

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline Id parse_id(std::string_view tok, const std::string& path, std::size_t line) {
  if (!tok.empty() && tok.front() == '-') {
    throw ParseError(path, line, "negative id '" + std::string(tok) + "'");
  }
  std::uint64_t v = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || v > std::numeric_limits<Id>::max()) {
    throw ParseError(path, line, "expected a non-negative integer, got '" + std::string(tok) + "'");
  }
  return static_cast<Id>(v);
}

template <class F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) f(++n, line);
}

}  // namespace detail

/// Lines "user item item ...". Duplicate pairs are dropped; order of first
/// occurrence is kept.
inline std::vector<Interaction> load_interactions(const std::filesystem::path& path) {
  std::vector<Interaction> pairs;
  std::set<Interaction> seen;
  const std::string p = path.string();
  detail::for_each_line(path, [&](std::size_t n, const std::string& line) {
    const auto toks = detail::split_ws(line);
    if (toks.empty()) return;
    const Id user = detail::parse_id(toks[0], p, n);
    for (std::size_t k = 1; k < toks.size(); ++k) {
      const Interaction x{user, detail::parse_id(toks[k], p, n)};
      if (seen.insert(x).second) pairs.push_back(x);
    }
  });
  return pairs;
}

/// Lines "head relation tail". Duplicates dropped, file order kept.
inline std::vector<Triplet> load_kg(const std::filesystem::path& path) {
  std::vector<Triplet> out;
  std::set<Triplet> seen;
  const std::string p = path.string();
  detail::for_each_line(path, [&](std::size_t n, const std::string& line) {
    const auto toks = detail::split_ws(line);
    if (toks.empty()) return;
    if (toks.size() != 3) {
      throw ParseError(p, n, "expected 'head relation tail', got " + std::to_string(toks.size()) +
                                 " fields");
    }
    const Triplet t{detail::parse_id(toks[0], p, n), detail::parse_id(toks[1], p, n),
                    detail::parse_id(toks[2], p, n)};
    if (seen.insert(t).second) out.push_back(t);
  });
  return out;
}

/// One canonical relation id per line.
inline std::vector<Id> load_relation_list(const std::filesystem::path& path) {
  std::vector<Id> out;
  const std::string p = path.string();
  detail::for_each_line(path, [&](std::size_t n, const std::string& line) {
    const auto toks = detail::split_ws(line);
    if (toks.empty()) return;
    if (toks.size() != 1) throw ParseError(p, n, "expected a single relation id");
    out.push_back(detail::parse_id(toks[0], p, n));
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Cleaning

/// Appends (t, r + R, h) for every (h, r, t).
inline std::vector<Triplet> add_inverse_relations(const std::vector<Triplet>& triplets,
                                                  std::size_t num_canonical_relations) {
  std::vector<Triplet> out;
  out.reserve(2 * triplets.size());
  for (const auto& t : triplets) {
    if (t.relation >= num_canonical_relations) {
      throw ContractViolation("add_inverse_relations: relation " + std::to_string(t.relation) +
                              " is not below R = " + std::to_string(num_canonical_relations));
    }
    out.push_back(t);
  }
  const auto R = static_cast<Id>(num_canonical_relations);
  for (const auto& t : triplets) out.push_back({t.tail, t.relation + R, t.head});
  return out;
}

struct FilteredGraphs {
  std::vector<Interaction> pairs;
  std::vector<Triplet> triplets;
};

/// Iterated k-core: drop users and items with fewer than k interactions and
/// non-item entities occurring in fewer than k triplets, until nothing
/// changes. Items are the ids that occur in `pairs`; triplets touching a
/// removed item are dropped with it.
inline FilteredGraphs k_core_filter(std::vector<Interaction> pairs, std::vector<Triplet> triplets,
                                    std::size_t k) {
  if (k == 0) throw ContractViolation("k_core_filter: k must be at least 1");
  std::set<Id> items;
  for (const auto& p : pairs) items.insert(p.item);

  for (bool changed = true; changed;) {
    changed = false;
    std::unordered_map<Id, std::size_t> user_deg, item_deg, entity_deg;
    for (const auto& p : pairs) {
      ++user_deg[p.user];
      ++item_deg[p.item];
    }
    for (const auto& t : triplets) {
      if (!items.contains(t.head)) ++entity_deg[t.head];
      if (t.tail != t.head && !items.contains(t.tail)) ++entity_deg[t.tail];
    }

    const auto n_pairs = pairs.size();
    std::erase_if(pairs, [&](const Interaction& p) {
      return user_deg[p.user] < k || item_deg[p.item] < k;
    });
    changed |= pairs.size() != n_pairs;

    std::set<Id> alive_items;
    for (const auto& p : pairs) alive_items.insert(p.item);
    auto entity_ok = [&](Id e) {
      if (items.contains(e)) return alive_items.contains(e);
      return entity_deg[e] >= k;
    };
    const auto n_trip = triplets.size();
    std::erase_if(triplets, [&](const Triplet& t) { return !entity_ok(t.head) || !entity_ok(t.tail); });
    changed |= triplets.size() != n_trip;
  }
  if (pairs.empty()) throw DataError("k-core filtering removed every interaction: empty dataset");
  return {std::move(pairs), std::move(triplets)};
}

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct InteractionSplit {
  std::vector<Interaction> train, valid, test;
};

/// Per-user split: each user's items are shuffled with one generator seeded
/// by `seed` (users processed in ascending id order), then cut into
/// test / valid / train counts round(n * ratio). At least one item always
/// stays in train.
inline InteractionSplit split_interactions(const std::vector<Interaction>& pairs,
                                           const SplitRatios& ratios, std::uint64_t seed) {
  const double total = ratios.train + ratios.valid + ratios.test;
  if (std::abs(total - 1.0) > 1e-9 || ratios.train <= 0.0 || ratios.valid < 0.0 ||
      ratios.test < 0.0) {
    throw ConfigError("split ratios must be non-negative, with positive train, and sum to 1");
  }
  std::map<Id, std::vector<Id>> by_user;
  for (const auto& p : pairs) by_user[p.user].push_back(p.item);

  std::mt19937_64 rng(seed);
  InteractionSplit out;
  for (auto& [user, items] : by_user) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    std::shuffle(items.begin(), items.end(), rng);
    const std::size_t n = items.size();
    auto n_test = static_cast<std::size_t>(std::lround(static_cast<double>(n) * ratios.test));
    auto n_valid = static_cast<std::size_t>(std::lround(static_cast<double>(n) * ratios.valid));
    while (n_test + n_valid >= n && n_test + n_valid > 0) {
      if (n_test >= n_valid && n_test > 0) {
        --n_test;
      } else {
        --n_valid;
      }
    }
    std::size_t pos = 0;
    for (; pos < n_test; ++pos) out.test.push_back({user, items[pos]});
    for (; pos < n_test + n_valid; ++pos) out.valid.push_back({user, items[pos]});
    for (; pos < n; ++pos) out.train.push_back({user, items[pos]});
  }
  for (auto* v : {&out.train, &out.valid, &out.test}) std::sort(v->begin(), v->end());
  return out;
}

struct KHopGraph {
  std::vector<Triplet> triplets;       // re-indexed
  std::vector<Id> entity_original_ids;  // new id -> old id; items first
  std::size_t num_items = 0;
};

/// Keeps triplets within `hops` relation steps (either direction) of any
/// item and re-indexes entities with the items in [0, item_ids.size()), in
/// ascending order of their old id.
inline KHopGraph collect_k_hop_entities(const std::vector<Triplet>& triplets,
                                        std::vector<Id> item_ids, std::size_t hops) {
  if (hops == 0) throw ContractViolation("collect_k_hop_entities: hops must be at least 1");
  std::sort(item_ids.begin(), item_ids.end());
  item_ids.erase(std::unique(item_ids.begin(), item_ids.end()), item_ids.end());

  std::unordered_map<Id, std::vector<Id>> adj;
  for (const auto& t : triplets) {
    adj[t.head].push_back(t.tail);
    adj[t.tail].push_back(t.head);
  }
  std::unordered_map<Id, std::size_t> depth;
  std::queue<Id> frontier;
  for (Id i : item_ids) {
    depth[i] = 0;
    frontier.push(i);
  }
  while (!frontier.empty()) {
    const Id x = frontier.front();
    frontier.pop();
    const std::size_t dx = depth[x];
    if (dx >= hops) continue;
    for (Id y : adj[x]) {
      if (!depth.contains(y)) {
        depth[y] = dx + 1;
        frontier.push(y);
      }
    }
  }

  KHopGraph out;
  out.num_items = item_ids.size();
  std::vector<Triplet> kept;
  std::set<Id> others;
  for (const auto& t : triplets) {
    const auto h = depth.find(t.head);
    const auto tl = depth.find(t.tail);
    if (h == depth.end() || tl == depth.end()) continue;
    if (std::min(h->second, tl->second) >= hops) continue;
    kept.push_back(t);
  }
  std::unordered_map<Id, Id> remap;
  for (Id i : item_ids) {
    remap[i] = static_cast<Id>(out.entity_original_ids.size());
    out.entity_original_ids.push_back(i);
  }
  for (const auto& t : kept) {
    for (Id e : {t.head, t.tail}) {
      if (!remap.contains(e)) others.insert(e);
    }
  }
  for (Id e : others) {
    remap[e] = static_cast<Id>(out.entity_original_ids.size());
    out.entity_original_ids.push_back(e);
  }
  out.triplets.reserve(kept.size());
  for (const auto& t : kept) out.triplets.push_back({remap[t.head], t.relation, remap[t.tail]});
  return out;
}

// ---------------------------------------------------------------------------
// Hierarchical relations

enum class HierMode { given, item_connected, krackhardt };

inline HierMode parse_hier_mode(std::string_view s) {
  if (s == "given") return HierMode::given;
  if (s == "item_connected") return HierMode::item_connected;
  if (s == "krackhardt") return HierMode::krackhardt;
  throw ConfigError("unknown hierarchical tagging mode '" + std::string(s) + "'");
}

inline std::string to_string(HierMode m) {
  switch (m) {
    case HierMode::given: return "given";
    case HierMode::item_connected: return "item_connected";
    case HierMode::krackhardt: return "krackhardt";
  }
  return "?";
}

/// Krackhardt hierarchy of a directed graph: among unordered node pairs where
/// at least one reaches the other, the fraction that are not mutually
/// reachable. Graphs without any reachable pair score 0.
inline double krackhardt_hierarchy(const std::vector<std::pair<Id, Id>>& edges) {
  std::unordered_map<Id, std::size_t> index;
  for (const auto& [a, b] : edges) {
    index.try_emplace(a, index.size());
    index.try_emplace(b, index.size());
  }
  const std::size_t n = index.size();
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& [a, b] : edges) out[index[a]].push_back(index[b]);

  std::vector<std::vector<std::size_t>> reach(n);
  std::vector<char> seen(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(seen.begin(), seen.end(), 0);
    std::vector<std::size_t> stack(out[s].begin(), out[s].end());
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      if (seen[x]) continue;
      seen[x] = 1;
      for (auto y : out[x]) stack.push_back(y);
    }
    for (std::size_t x = 0; x < n; ++x) {
      if (seen[x] && x != s) reach[s].push_back(x);
    }
  }
  std::size_t one_way = 0, both = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (auto b : reach[a]) {
      const bool back = std::binary_search(reach[b].begin(), reach[b].end(), a);
      if (back) {
        if (a < b) ++both;
      } else {
        ++one_way;
      }
    }
  }
  const std::size_t reachable = one_way + both;
  return reachable == 0 ? 0.0 : static_cast<double>(one_way) / static_cast<double>(reachable);
}

struct HierarchyTags {
  std::vector<bool> hierarchical;  // per canonical relation
  std::vector<HierPair> pairs;     // H
};

struct HierOptions {
  HierMode mode = HierMode::item_connected;
  std::optional<std::vector<Id>> given;  // required for HierMode::given
  double krackhardt_threshold = 0.9;
};

/// `canonical` holds canonical-direction triplets over the dense id layout.
inline HierarchyTags tag_hierarchical_relations(const std::vector<Triplet>& canonical,
                                                std::size_t num_items, std::size_t num_relations,
                                                const HierOptions& opts) {
  HierarchyTags out;
  out.hierarchical.assign(num_relations, false);
  switch (opts.mode) {
    case HierMode::given:
      if (!opts.given) throw ConfigError("hierarchical mode 'given' requires a relation list");
      for (Id r : *opts.given) {
        if (r < num_relations) out.hierarchical[r] = true;
      }
      break;
    case HierMode::item_connected:
      for (const auto& t : canonical) {
        if (t.head < num_items) out.hierarchical[t.relation] = true;
      }
      break;
    case HierMode::krackhardt: {
      std::vector<std::vector<std::pair<Id, Id>>> per_rel(num_relations);
      for (const auto& t : canonical) per_rel[t.relation].emplace_back(t.head, t.tail);
      for (std::size_t r = 0; r < num_relations; ++r) {
        out.hierarchical[r] =
            !per_rel[r].empty() && krackhardt_hierarchy(per_rel[r]) >= opts.krackhardt_threshold;
      }
      break;
    }
  }
  for (const auto& t : canonical) {
    if (t.head < num_items && out.hierarchical[t.relation]) out.pairs.push_back({t.head, t.tail});
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()), out.pairs.end());
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

struct PrepConfig {
  std::size_t core_k = 10;  // applied only when splitting a single interactions file
  std::size_t hops = 2;     // 0 keeps the whole KG
  SplitRatios ratios;
  std::uint64_t seed = 2022;
  HierOptions hier;
};

/// Builds the dense dataset from raw (already split) interactions and
/// canonical triplets. Items are every id that occurs in any split.
inline Dataset assemble_dataset(const InteractionSplit& raw, const std::vector<Triplet>& raw_kg,
                                const PrepConfig& cfg) {
  std::set<Id> users, items;
  for (const auto* split : {&raw.train, &raw.valid, &raw.test}) {
    for (const auto& p : *split) {
      users.insert(p.user);
      items.insert(p.item);
    }
  }
  if (raw.train.empty()) throw DataError("dataset has no training interactions");

  std::size_t num_relations = 0;
  for (const auto& t : raw_kg) num_relations = std::max<std::size_t>(num_relations, t.relation + 1);

  Dataset ds;
  std::vector<Triplet> canonical;
  if (cfg.hops > 0) {
    auto khop = collect_k_hop_entities(raw_kg, {items.begin(), items.end()}, cfg.hops);
    canonical = std::move(khop.triplets);
    ds.entity_original_ids = std::move(khop.entity_original_ids);
  } else {
    std::unordered_map<Id, Id> remap;
    for (Id i : items) {
      remap[i] = static_cast<Id>(ds.entity_original_ids.size());
      ds.entity_original_ids.push_back(i);
    }
    std::set<Id> others;
    for (const auto& t : raw_kg) {
      for (Id e : {t.head, t.tail}) {
        if (!remap.contains(e)) others.insert(e);
      }
    }
    for (Id e : others) {
      remap[e] = static_cast<Id>(ds.entity_original_ids.size());
      ds.entity_original_ids.push_back(e);
    }
    for (const auto& t : raw_kg) canonical.push_back({remap[t.head], t.relation, remap[t.tail]});
  }

  std::unordered_map<Id, Id> user_map, item_map;
  for (Id u : users) {
    user_map[u] = static_cast<Id>(ds.user_original_ids.size());
    ds.user_original_ids.push_back(u);
  }
  {
    Id k = 0;
    for (Id i : items) item_map[i] = k++;
  }

  auto& ig = ds.interactions;
  ig.num_users = users.size();
  ig.num_items = items.size();
  auto remap_pairs = [&](const std::vector<Interaction>& in) {
    std::vector<Interaction> out;
    out.reserve(in.size());
    for (const auto& p : in) out.push_back({user_map[p.user], item_map[p.item]});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  ig.train = remap_pairs(raw.train);
  ig.valid = remap_pairs(raw.valid);
  ig.test = remap_pairs(raw.test);
  // Splits must be disjoint; train wins, then test.
  auto remove_all = [](std::vector<Interaction>& v, const std::vector<Interaction>& ref) {
    std::erase_if(v, [&](const Interaction& p) { return std::binary_search(ref.begin(), ref.end(), p); });
  };
  remove_all(ig.test, ig.train);
  remove_all(ig.valid, ig.train);
  remove_all(ig.valid, ig.test);
  ig.index();

  auto& kg = ds.kg;
  kg.num_entities = ds.entity_original_ids.size();
  kg.num_items = items.size();
  kg.num_relations = num_relations;
  kg.num_canonical = canonical.size();
  kg.triplets = add_inverse_relations(canonical, num_relations);
  kg.index();
  auto tags = tag_hierarchical_relations(canonical, kg.num_items, num_relations, cfg.hier);
  kg.hierarchical = std::move(tags.hierarchical);
  kg.hier_pairs = std::move(tags.pairs);
  return ds;
}

/// Reads a dataset directory. With `train.txt` and `test.txt` present the
/// given split is used verbatim (validation is carved out of train when
/// `valid.txt` is absent); otherwise `interactions.txt` is 2-hop pruned,
/// k-core filtered and split. `kg_final.txt` is optional.
inline Dataset load_dataset(const std::filesystem::path& dir, PrepConfig cfg) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("data directory not found: " + dir.string());
  std::vector<Triplet> kg;
  if (fs::exists(dir / "kg_final.txt")) kg = load_kg(dir / "kg_final.txt");
  if (cfg.hier.mode == HierMode::given && !cfg.hier.given) {
    const auto p = dir / "hier_relations.txt";
    if (!fs::exists(p)) throw ConfigError("hierarchical mode 'given' needs " + p.string());
    cfg.hier.given = load_relation_list(p);
  }

  InteractionSplit split;
  if (fs::exists(dir / "train.txt") && fs::exists(dir / "test.txt")) {
    split.test = load_interactions(dir / "test.txt");
    if (fs::exists(dir / "valid.txt")) {
      split.train = load_interactions(dir / "train.txt");
      split.valid = load_interactions(dir / "valid.txt");
    } else {
      const double tv = cfg.ratios.train + cfg.ratios.valid;
      auto carved = split_interactions(load_interactions(dir / "train.txt"),
                                       {cfg.ratios.train / tv, cfg.ratios.valid / tv, 0.0}, cfg.seed);
      split.train = std::move(carved.train);
      split.valid = std::move(carved.valid);
    }
  } else if (fs::exists(dir / "interactions.txt")) {
    auto pairs = load_interactions(dir / "interactions.txt");
    if (cfg.hops > 0) {
      std::vector<Id> item_ids;
      for (const auto& p : pairs) item_ids.push_back(p.item);
      // Prune in the file's id space; assemble_dataset re-indexes afterwards.
      auto khop = collect_k_hop_entities(kg, item_ids, cfg.hops);
      kg.clear();
      for (const auto& t : khop.triplets) {
        kg.push_back({khop.entity_original_ids[t.head], t.relation, khop.entity_original_ids[t.tail]});
      }
    }
    if (cfg.core_k > 0) {
      auto filtered = k_core_filter(std::move(pairs), std::move(kg), cfg.core_k);
      pairs = std::move(filtered.pairs);
      kg = std::move(filtered.triplets);
    }
    split = split_interactions(pairs, cfg.ratios, cfg.seed);
  } else {
    throw DataError("no train.txt/test.txt or interactions.txt in " + dir.string());
  }
  return assemble_dataset(split, kg, cfg);
}

inline DatasetStats compute_stats(const Dataset& ds) {
  const auto& ig = ds.interactions;
  DatasetStats s;
  s.num_users = ig.num_users;
  s.num_items = ig.num_items;
  s.num_train = ig.train.size();
  s.num_interactions = ig.train.size() + ig.valid.size() + ig.test.size();
  s.num_entities = ds.kg.num_entities;
  s.num_relations = ds.kg.num_relations;
  s.num_triplets = ds.kg.num_canonical;
  s.num_hier_pairs = ds.kg.hier_pairs.size();
  s.item_popularity.resize(ig.num_items);
  for (std::size_t i = 0; i < ig.num_items; ++i) s.item_popularity[i] = ig.item_users[i].size();
  s.user_degree.resize(ig.num_users);
  for (std::size_t u = 0; u < ig.num_users; ++u) s.user_degree[u] = ig.user_items[u].size();
  return s;
}

/// (degree, number of nodes) over users and items of the train graph.
inline std::vector<std::pair<std::size_t, std::size_t>> degree_distribution(const DatasetStats& s) {
  std::map<std::size_t, std::size_t> hist;
  for (auto d : s.user_degree) ++hist[d];
  for (auto d : s.item_popularity) ++hist[d];
  return {hist.begin(), hist.end()};
}

}  // namespace hakg
