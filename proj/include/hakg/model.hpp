#pragma once

// Forward computation of the hierarchy-aware KG recommender.
//
// All trainable tensors live in the tangent space at the origin; hyperbolic
// points are produced with exp0 + projection. Every routine is templated on
// the scalar type so the same code evaluates in double and on the AD tape.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "hakg/data.hpp"
#include "hakg/error.hpp"
#include "hakg/geometry.hpp"

namespace hakg {

/// Dense row-major matrix.
template <class T>
struct Table {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Table() = default;
  Table(std::size_t r, std::size_t c, T fill = T(0.0)) : rows(r), cols(c), data(r * c, fill) {}

  Vec<T> row(std::size_t i) const {
    return Vec<T>(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
                  data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }
  T& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  void set_row(std::size_t i, const Vec<T>& v) {
    for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] = v[j];
  }
  bool same_shape(const Table& o) const { return rows == o.rows && cols == o.cols; }
};

struct ModelShape {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // including inverses
  std::size_t dim = 0;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;

  static ModelShape of(const Dataset& ds, std::size_t dim) {
    return {ds.interactions.num_users, ds.interactions.num_items, ds.kg.num_entities,
            ds.kg.num_relations_with_inverse(), dim};
  }
};

/// Trainable tensors; rows [0, num_items) of `entity` are the knowledge item
/// embeddings.
template <class T>
struct Params {
  Table<T> user;
  Table<T> collab_item;
  Table<T> entity;
  Table<T> relation;
  Table<T> gate_w1;
  Table<T> gate_w2;

  static constexpr std::size_t kTensorCount = 6;

  explicit Params(const ModelShape& s = {})
      : user(s.num_users, s.dim),
        collab_item(s.num_items, s.dim),
        entity(s.num_entities, s.dim),
        relation(s.num_relations, s.dim),
        gate_w1(s.dim, s.dim),
        gate_w2(s.dim, s.dim) {}

  ModelShape shape() const {
    return {user.rows, collab_item.rows, entity.rows, relation.rows, user.cols};
  }

  /// Visits (name, tensor) in a fixed order.
  template <class F>
  void for_each(F&& f) {
    f("user", user);
    f("collab_item", collab_item);
    f("entity", entity);
    f("relation", relation);
    f("gate_w1", gate_w1);
    f("gate_w2", gate_w2);
  }
  template <class F>
  void for_each(F&& f) const {
    f("user", user);
    f("collab_item", collab_item);
    f("entity", entity);
    f("relation", relation);
    f("gate_w1", gate_w1);
    f("gate_w2", gate_w2);
  }

  std::array<Table<T>*, kTensorCount> tensors() {
    return {&user, &collab_item, &entity, &relation, &gate_w1, &gate_w2};
  }
  std::array<const Table<T>*, kTensorCount> tensors() const {
    return {&user, &collab_item, &entity, &relation, &gate_w1, &gate_w2};
  }

  static constexpr std::array<const char*, kTensorCount> kTensorNames = {
      "user", "collab_item", "entity", "relation", "gate_w1", "gate_w2"};

  std::size_t size() const {
    std::size_t n = 0;
    for_each([&](const char*, const Table<T>& t) { n += t.data.size(); });
    return n;
  }
};

using ModelParams = Params<double>;

/// Gate override for testing the two ends of the blend.
enum class GateMode { learned, pinned_one, pinned_zero };

struct ModelConfig {
  std::size_t dim = 64;
  std::size_t layers = 2;  // L; 0 is accepted and returns the layer-0 embeddings
  double mask_prob = 0.5;
  double angle_weight = 1e-3;  // lambda
  std::uint64_t seed = 2022;
  GeometryConfig geometry;
  GateMode gate = GateMode::learned;
  /// Experimental: take the KG log map at the origin instead of at the
  /// centre entity.
  bool kg_log_at_origin = false;

  void validate() const {
    if (dim == 0) throw ConfigError("dim must be positive");
    if (layers > 8) throw ConfigError("layers must be at most 8");
    if (!(mask_prob >= 0.0 && mask_prob < 1.0)) throw ConfigError("mask_prob must lie in [0, 1)");
    if (!(angle_weight >= 0.0)) throw ConfigError("angle weight (lambda) must be non-negative");
    geometry.validate();
  }
};

template <class T>
struct NodeReps {
  std::vector<Vec<T>> user;
  std::vector<Vec<T>> item_collab;  // e~
  std::vector<Vec<T>> entity;       // e, items first
};

template <class T>
struct ForwardResult {
  NodeReps<T> final;
  std::vector<NodeReps<T>> layers;  // only with keep_layers
};

namespace detail {

template <class T>
void add_into(Vec<T>& acc, const Vec<T>& v) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
}

template <class T>
Vec<T> matvec(const Table<T>& w, const Vec<T>& x) {
  Vec<T> out(w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) out[i] = dot(w.row(i), x);
  return out;
}

template <class T>
T sigmoid(const T& x) {
  using std::exp;
  if (value(x) >= 0.0) return 1.0 / (1.0 + exp(-x));
  const T e = exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Aggregators

/// One KG propagation layer. For every entity with neighbours:
///   e_x <- exp0( mean_{(r,t) in N_x} log_{e_x}( e_t (+) e_r ) )
/// Entities without neighbours keep their previous representation.
template <class T>
std::vector<Vec<T>> kg_aggregate_layer(const std::vector<Vec<T>>& prev,
                                       const std::vector<Vec<T>>& relation_points,
                                       const std::vector<std::vector<KgEdge>>& neighbors,
                                       const ModelConfig& cfg) {
  const auto& g = cfg.geometry;
  std::vector<Vec<T>> next(prev.size());
  for (std::size_t x = 0; x < prev.size(); ++x) {
    const auto& nb = neighbors[x];
    if (nb.empty()) {
      next[x] = prev[x];
      continue;
    }
    Vec<T> acc(prev[x].size(), T(0.0));
    const Vec<T> base = cfg.kg_log_at_origin ? Vec<T>(prev[x].size(), T(0.0)) : prev[x];
    for (const auto& e : nb) {
      const Vec<T> context = poincare::mobius_add(prev[e.tail], relation_points[e.relation], g);
      detail::add_into(acc, poincare::log_map(base, context, g));
    }
    next[x] = poincare::exp0(scaled(acc, T(1.0 / static_cast<double>(nb.size()))), g);
  }
  return next;
}

/// Mean of log0 over `members`, mapped back with exp0. Used for both the
/// collaborative item update and the user update.
template <class T>
Vec<T> tangent_mean(const std::vector<Vec<T>>& logs, const std::vector<Id>& members,
                    const GeometryConfig& g) {
  Vec<T> acc(logs[members.front()].size(), T(0.0));
  for (Id m : members) detail::add_into(acc, logs[m]);
  return poincare::exp0(scaled(acc, T(1.0 / static_cast<double>(members.size()))), g);
}

/// e~_i <- exp0( mean_{u in N~_i} log0(e_u) ); items without train users keep
/// their previous representation.
template <class T>
std::vector<Vec<T>> collab_aggregate_layer(const std::vector<Vec<T>>& prev_items,
                                           const std::vector<Vec<T>>& prev_users,
                                           const std::vector<std::vector<Id>>& item_users,
                                           const GeometryConfig& g) {
  std::vector<Vec<T>> user_logs(prev_users.size());
  for (std::size_t u = 0; u < prev_users.size(); ++u) user_logs[u] = poincare::log0(prev_users[u]);
  std::vector<Vec<T>> next(prev_items.size());
  for (std::size_t i = 0; i < prev_items.size(); ++i) {
    next[i] = item_users[i].empty() ? prev_items[i] : tangent_mean(user_logs, item_users[i], g);
  }
  return next;
}

template <class T>
struct Fused {
  Vec<T> point;  // e^_i
  Vec<T> gate;   // g_i
};

/// g = sigmoid(W1 log0(e) + W2 log0(e~)); e^ = exp0(g * log0(e) + (1 - g) * log0(e~)).
template <class T>
Fused<T> gate_fuse(const Vec<T>& knowledge, const Vec<T>& collab, const Table<T>& w1,
                   const Table<T>& w2, GateMode mode, const GeometryConfig& g) {
  const Vec<T> a = poincare::log0(knowledge);
  const Vec<T> b = poincare::log0(collab);
  Fused<T> out;
  out.gate.resize(a.size());
  switch (mode) {
    case GateMode::learned: {
      const Vec<T> wa = detail::matvec(w1, a);
      const Vec<T> wb = detail::matvec(w2, b);
      for (std::size_t k = 0; k < a.size(); ++k) out.gate[k] = detail::sigmoid(wa[k] + wb[k]);
      break;
    }
    case GateMode::pinned_one:
      for (auto& x : out.gate) x = T(1.0);
      break;
    case GateMode::pinned_zero:
      for (auto& x : out.gate) x = T(0.0);
      break;
  }
  Vec<T> blend(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    blend[k] = out.gate[k] * a[k] + (1.0 - out.gate[k]) * b[k];
  }
  out.point = poincare::exp0(blend, g);
  return out;
}

/// e_u <- exp0( mean_{i in N_u} log0(e^_i) ); users without train items keep
/// their previous representation.
template <class T>
std::vector<Vec<T>> user_aggregate_layer(const std::vector<Vec<T>>& prev_users,
                                         const std::vector<Vec<T>>& fused_items,
                                         const std::vector<std::vector<Id>>& user_items,
                                         const GeometryConfig& g) {
  std::vector<Vec<T>> item_logs(fused_items.size());
  for (std::size_t i = 0; i < fused_items.size(); ++i) item_logs[i] = poincare::log0(fused_items[i]);
  std::vector<Vec<T>> next(prev_users.size());
  for (std::size_t u = 0; u < prev_users.size(); ++u) {
    next[u] = user_items[u].empty() ? prev_users[u] : tangent_mean(item_logs, user_items[u], g);
  }
  return next;
}

/// exp0( sum_l log0(rep^(l)) ), per node.
template <class T>
std::vector<Vec<T>> combine_layers(const std::vector<const std::vector<Vec<T>>*>& layers,
                                   const GeometryConfig& g) {
  const std::size_t n = layers.front()->size();
  std::vector<Vec<T>> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    Vec<T> acc = poincare::log0((*layers.front())[x]);
    for (std::size_t l = 1; l < layers.size(); ++l) detail::add_into(acc, poincare::log0((*layers[l])[x]));
    out[x] = poincare::exp0(acc, g);
  }
  return out;
}

template <class T>
std::vector<Vec<T>> materialize(const Table<T>& tangent, const GeometryConfig& g) {
  std::vector<Vec<T>> out(tangent.rows);
  for (std::size_t i = 0; i < tangent.rows; ++i) out[i] = poincare::exp0(tangent.row(i), g);
  return out;
}

template <class T>
ForwardResult<T> forward(const Params<T>& p, const Dataset& ds, const ModelConfig& cfg,
                         bool keep_layers = false) {
  const auto& g = cfg.geometry;
  const auto& ig = ds.interactions;
  const std::vector<Vec<T>> relation_points = materialize(p.relation, g);

  std::vector<NodeReps<T>> layers;
  layers.reserve(cfg.layers + 1);
  layers.push_back({materialize(p.user, g), materialize(p.collab_item, g), materialize(p.entity, g)});

  for (std::size_t l = 1; l <= cfg.layers; ++l) {
    const auto& prev = layers.back();
    NodeReps<T> next;
    next.entity = kg_aggregate_layer(prev.entity, relation_points, ds.kg.neighbors, cfg);
    next.item_collab = collab_aggregate_layer(prev.item_collab, prev.user, ig.item_users, g);
    std::vector<Vec<T>> fused(ig.num_items);
    for (std::size_t i = 0; i < ig.num_items; ++i) {
      fused[i] = gate_fuse(prev.entity[i], prev.item_collab[i], p.gate_w1, p.gate_w2, cfg.gate, g).point;
    }
    next.user = user_aggregate_layer(prev.user, fused, ig.user_items, g);
    layers.push_back(std::move(next));
  }

  std::vector<const std::vector<Vec<T>>*> users, collabs, entities;
  for (const auto& lr : layers) {
    users.push_back(&lr.user);
    collabs.push_back(&lr.item_collab);
    entities.push_back(&lr.entity);
  }
  ForwardResult<T> out;
  out.final.user = combine_layers(users, g);
  out.final.item_collab = combine_layers(collabs, g);
  out.final.entity = combine_layers(entities, g);
  if (keep_layers) out.layers = std::move(layers);
  return out;
}

// ---------------------------------------------------------------------------
// Prediction and hierarchy loss

/// Cosine of the ambient coordinate vectors; 0 when either is the zero vector.
template <class T>
T cosine(const Vec<T>& a, const Vec<T>& b) {
  using std::sqrt;
  const T a2 = squared_norm(a);
  const T b2 = squared_norm(b);
  if (value(a2) == 0.0 || value(b2) == 0.0) return T(0.0);
  return dot(a, b) / (sqrt(a2) * sqrt(b2));
}

/// cos(e_u, e~_i) + cos(e_u, e_i), in [-2, 2].
template <class T>
T predict_score(const Vec<T>& user, const Vec<T>& item_knowledge, const Vec<T>& item_collab) {
  return cosine(user, item_collab) + cosine(user, item_knowledge);
}

template <class T>
T predict_score(const NodeReps<T>& reps, Id user, Id item) {
  return predict_score(reps.user[user], reps.entity[item], reps.item_collab[item]);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Per-dimension keep mask for one hierarchical pair, drawn from a stream
/// keyed by (seed, epoch, pair_index). Each dimension is masked with
/// probability `mask_prob`; an all-masked draw is redrawn.
inline std::vector<bool> subspace_mask(std::uint64_t pair_index, std::uint64_t epoch,
                                       std::uint64_t seed, std::size_t dim, double mask_prob) {
  std::uint64_t state =
      detail::splitmix64(seed ^ detail::splitmix64(epoch ^ detail::splitmix64(pair_index)));
  auto uniform = [&state] {
    state = detail::splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  std::vector<bool> keep(dim);
  for (;;) {
    bool any = false;
    for (std::size_t k = 0; k < dim; ++k) {
      keep[k] = uniform() >= mask_prob;
      any = any || keep[k];
    }
    if (any || dim == 0) return keep;
  }
}

namespace detail {

template <class T>
Vec<T> restrict_to(const Vec<T>& x, const std::vector<bool>& keep) {
  Vec<T> out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (keep[k]) out.push_back(x[k]);
  }
  return out;
}

/// Radially lifts x to norm >= min_norm; the zero vector goes to
/// (min_norm, 0, ..., 0).
template <class T>
Vec<T> lift_norm(const Vec<T>& x, double min_norm) {
  using std::sqrt;
  const T n = sqrt(squared_norm(x));
  note_kink(value(n) - min_norm);
  if (value(n) >= min_norm) return x;
  if (value(n) == 0.0) {
    Vec<T> out(x.size(), T(0.0));
    out[0] = T(min_norm);
    return out;
  }
  return scaled(x, T(min_norm) / n);
}

}  // namespace detail

/// max(angle_{e_t'}(e_i') - psi(e_t'), 0) for one hierarchical pair, on the
/// masked subspace.
template <class T>
T angle_violation(const Vec<T>& item, const Vec<T>& entity, const std::vector<bool>& keep,
                  const GeometryConfig& g) {
  const Vec<T> apex = detail::lift_norm(detail::restrict_to(entity, keep), g.min_cone_norm);
  const Vec<T> member = detail::lift_norm(detail::restrict_to(item, keep), g.min_cone_norm);
  using std::sqrt;
  const T psi = poincare::half_aperture_at_norm(sqrt(squared_norm(apex)), g);
  return hinge(poincare::cone_angle(apex, member) - psi);
}

/// Sum of angle violations over `pairs`; `masks[k]` belongs to `pairs[k]`.
template <class T>
T angle_loss(const std::vector<Vec<T>>& entity_reps, const std::vector<HierPair>& pairs,
             const std::vector<std::vector<bool>>& masks, const GeometryConfig& g) {
  if (masks.size() != pairs.size()) throw ContractViolation("angle_loss: one mask per pair required");
  T total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    total += angle_violation(entity_reps[pairs[k].item], entity_reps[pairs[k].entity], masks[k], g);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Export

/// One line per node: `kind id coord_1 ... coord_d`.
inline void write_embeddings(std::ostream& out, const NodeReps<double>& reps) {
  auto emit = [&out](const char* kind, const std::vector<Vec<double>>& rows) {
    char buf[32];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << kind << ' ' << i;
      for (double c : rows[i]) {
        std::snprintf(buf, sizeof buf, " %.17g", c);
        out << buf;
      }
      out << '\n';
    }
  };
  emit("user", reps.user);
  emit("item_collab", reps.item_collab);
  emit("entity", reps.entity);
}

}  // namespace hakg
