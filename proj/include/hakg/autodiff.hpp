#pragma once

// Minimal reverse-mode automatic differentiation over a Wengert tape.
//
// A `Var` is a double plus the index of the tape node that produced it.
// Constants carry index -1 and never touch the tape, so templated numeric
// code instantiated with `Var` only records the parameter-dependent part of
// a computation. Nodes may have any number of parents; vector reductions
// (dot products, squared norms, sums) are recorded as a single n-ary node.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <vector>

namespace hakg::ad {

class Tape {
 public:
  struct Edge {
    std::int32_t parent;
    double partial;
  };

  Tape() { offsets_.push_back(0); }

  std::int32_t new_leaf() { return push({}); }

  /// Append a node; edges whose parent is a constant (-1) are dropped.
  /// Returns -1 when every edge was dropped.
  std::int32_t push(std::initializer_list<Edge> edges) {
    return push_range(edges.begin(), edges.end(), edges.size() == 0);
  }

  std::int32_t push(const std::vector<Edge>& edges) {
    return push_range(edges.data(), edges.data() + edges.size(), false);
  }

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Adjoint of every node with respect to `output` (seeded with 1).
  std::vector<double> adjoints(std::int32_t output) const {
    std::vector<double> adj(size(), 0.0);
    if (output < 0) return adj;
    adj[static_cast<std::size_t>(output)] = 1.0;
    for (std::size_t n = static_cast<std::size_t>(output) + 1; n-- > 0;) {
      const double a = adj[n];
      if (a == 0.0) continue;
      for (std::uint32_t e = offsets_[n]; e < offsets_[n + 1]; ++e) {
        adj[static_cast<std::size_t>(edges_[e].parent)] += a * edges_[e].partial;
      }
    }
    return adj;
  }

  void clear() {
    offsets_.assign(1, 0);
    edges_.clear();
  }

 private:
  template <class It>
  std::int32_t push_range(It first, It last, bool leaf) {
    const auto before = edges_.size();
    for (It it = first; it != last; ++it) {
      if (it->parent >= 0) edges_.push_back(*it);
    }
    if (!leaf && edges_.size() == before) return -1;
    offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
    return static_cast<std::int32_t>(offsets_.size() - 2);
  }

  std::vector<std::uint32_t> offsets_;
  std::vector<Edge> edges_;
};

inline thread_local Tape* active_tape = nullptr;

/// Routes every `Var` operation on this thread to `tape` for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : previous_(active_tape) { active_tape = &tape; }
  ~TapeScope() { active_tape = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

class Var {
 public:
  Var() = default;
  Var(double v) : value_(v) {}  // NOLINT: constants convert implicitly
  Var(double v, std::int32_t id) : value_(v), id_(id) {}

  static Var leaf(double v) {
    assert(active_tape != nullptr);
    return Var(v, active_tape->new_leaf());
  }

  double value() const noexcept { return value_; }
  std::int32_t id() const noexcept { return id_; }
  bool is_constant() const noexcept { return id_ < 0; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);

 private:
  double value_ = 0.0;
  std::int32_t id_ = -1;
};

namespace detail {

inline Var unary(double v, const Var& a, double da) {
  if (a.is_constant()) return Var(v);
  return Var(v, active_tape->push({{a.id(), da}}));
}

inline Var binary(double v, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant() && b.is_constant()) return Var(v);
  return Var(v, active_tape->push({{a.id(), da}, {b.id(), db}}));
}

inline std::vector<Tape::Edge>& scratch() {
  thread_local std::vector<Tape::Edge> edges;
  edges.clear();
  return edges;
}

}  // namespace detail

inline double value(const Var& x) noexcept { return x.value(); }

inline Var operator+(const Var& a, const Var& b) {
  return detail::binary(a.value() + b.value(), a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::binary(a.value() - b.value(), a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(a.value() * b.value(), a, b.value(), b, a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  return detail::binary(a.value() * inv, a, inv, b, -a.value() * inv * inv);
}
inline Var operator-(const Var& a) { return detail::unary(-a.value(), a, -1.0); }
inline Var operator+(const Var& a) { return a; }

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }

// Derivatives that blow up at the edge of the domain (sqrt at 0, asin/acos at
// +-1) use a zero subgradient there.

inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return detail::unary(s, a, s > 0.0 ? 0.5 / s : 0.0);
}
inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return detail::unary(e, a, e);
}
inline Var log(const Var& a) { return detail::unary(std::log(a.value()), a, 1.0 / a.value()); }
inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return detail::unary(t, a, 1.0 - t * t);
}
inline Var atanh(const Var& a) {
  const double x = a.value();
  return detail::unary(std::atanh(x), a, 1.0 / (1.0 - x * x));
}
inline Var asin(const Var& a) {
  const double x = a.value();
  const double r = 1.0 - x * x;
  return detail::unary(std::asin(x), a, r > 0.0 ? 1.0 / std::sqrt(r) : 0.0);
}
inline Var acos(const Var& a) {
  const double x = a.value();
  const double r = 1.0 - x * x;
  return detail::unary(std::acos(x), a, r > 0.0 ? -1.0 / std::sqrt(r) : 0.0);
}

inline Var dot(const std::vector<Var>& a, const std::vector<Var>& b) {
  assert(a.size() == b.size());
  double v = 0.0;
  auto& edges = detail::scratch();
  for (std::size_t k = 0; k < a.size(); ++k) {
    v += a[k].value() * b[k].value();
    edges.push_back({a[k].id(), b[k].value()});
    edges.push_back({b[k].id(), a[k].value()});
  }
  if (active_tape == nullptr) return Var(v);
  return Var(v, active_tape->push(edges));
}

inline Var squared_norm(const std::vector<Var>& a) {
  double v = 0.0;
  auto& edges = detail::scratch();
  for (const Var& x : a) {
    v += x.value() * x.value();
    edges.push_back({x.id(), 2.0 * x.value()});
  }
  if (active_tape == nullptr) return Var(v);
  return Var(v, active_tape->push(edges));
}

/// Componentwise a*x + b*y recorded as one node per coordinate.
inline std::vector<Var> axpby(const Var& a, const std::vector<Var>& x, const Var& b,
                              const std::vector<Var>& y) {
  assert(x.size() == y.size());
  std::vector<Var> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = a.value() * x[k].value() + b.value() * y[k].value();
    if (a.is_constant() && b.is_constant() && x[k].is_constant() && y[k].is_constant()) {
      out[k] = Var(v);
      continue;
    }
    out[k] = Var(v, active_tape->push({{a.id(), x[k].value()},
                                       {x[k].id(), a.value()},
                                       {b.id(), y[k].value()},
                                       {y[k].id(), b.value()}}));
  }
  return out;
}

/// Gradient of `output` with respect to each of `leaves`.
inline std::vector<double> gradient(const Tape& tape, const Var& output,
                                    const std::vector<Var>& leaves) {
  const auto adj = tape.adjoints(output.id());
  std::vector<double> g(leaves.size(), 0.0);
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    if (!leaves[k].is_constant()) g[k] = adj[static_cast<std::size_t>(leaves[k].id())];
  }
  return g;
}

}  // namespace hakg::ad
