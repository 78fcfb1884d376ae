#pragma once

// Poincare-ball primitives (curvature -1) and entailment-cone geometry.
//
// Two layers:
//  * hakg::poincare  -- unchecked kernels templated on the scalar type, used by
//    the model both with double and with ad::Var;
//  * hakg::{BallPoint, TangentVector, mobius_add, ...} -- the checked public
//    API over doubles.
//
// The exponential/logarithmic maps use the closed forms
//   exp_z(v) = z (+) tanh(|v| / (1 - |z|^2)) v / |v|
//   log_z(y) = (1 - |z|^2) artanh(|-z (+) y|) (-z (+) y) / |-z (+) y|
// i.e. the conformal factor enters without the customary factor 2. The two
// maps are exact inverses of each other, and at the origin they reduce to the
// usual tanh / artanh pair.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hakg/error.hpp"

namespace hakg {

template <class T>
using Vec = std::vector<T>;

inline double value(double x) noexcept { return x; }

template <class T>
T dot(const Vec<T>& a, const Vec<T>& b) {
  T s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

template <class T>
T squared_norm(const Vec<T>& a) {
  T s = 0.0;
  for (const T& x : a) s += x * x;
  return s;
}

template <class T>
Vec<T> axpby(const T& a, const Vec<T>& x, const T& b, const Vec<T>& y) {
  Vec<T> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = a * x[k] + b * y[k];
  return out;
}

template <class T>
Vec<T> scaled(const Vec<T>& x, const T& s) {
  Vec<T> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] * s;
  return out;
}

template <class T>
T norm(const Vec<T>& x) {
  using std::sqrt;
  return sqrt(squared_norm(x));
}

/// Records how close an evaluation came to a non-differentiable point
/// (hinge, clamp, projection boundary). Finite-difference checks use it to
/// skip coordinates whose stencil straddles a kink.
struct KinkLog {
  double min_distance = std::numeric_limits<double>::infinity();
  std::vector<bool> pattern;
};

inline thread_local KinkLog* active_kink_log = nullptr;

/// `signed_distance` is the signed gap between the kink argument and its
/// switching point.
inline void note_kink(double signed_distance) {
  if (active_kink_log == nullptr) return;
  active_kink_log->min_distance = std::min(active_kink_log->min_distance, std::abs(signed_distance));
  active_kink_log->pattern.push_back(signed_distance > 0.0);
}

class KinkScope {
 public:
  explicit KinkScope(KinkLog& log) : previous_(active_kink_log) { active_kink_log = &log; }
  ~KinkScope() { active_kink_log = previous_; }
  KinkScope(const KinkScope&) = delete;
  KinkScope& operator=(const KinkScope&) = delete;

 private:
  KinkLog* previous_;
};

/// Clamp with zero derivative on saturation.
template <class T>
T clamp_scalar(const T& x, double lo, double hi) {
  note_kink(value(x) - lo);
  note_kink(hi - value(x));
  if (value(x) < lo) return T(lo);
  if (value(x) > hi) return T(hi);
  return x;
}

/// max(x, 0) with zero derivative at and below zero.
template <class T>
T hinge(const T& x) {
  note_kink(value(x));
  return value(x) > 0.0 ? x : T(0.0);
}

struct GeometryConfig {
  std::size_t dim = 0;  // 0: not enforced
  double ball_eps = 1e-5;
  double cone_K = 0.1;
  double min_cone_norm = 0.1;
  double arg_clamp_eps = 1e-7;

  void validate() const {
    if (!(ball_eps > 0.0 && ball_eps < 1.0)) throw ConfigError("ball_eps must lie in (0, 1)");
    if (!(cone_K > 0.0)) throw ConfigError("cone_K must be positive");
    if (!(arg_clamp_eps > 0.0 && arg_clamp_eps < 1.0))
      throw ConfigError("arg_clamp_eps must lie in (0, 1)");
    // arcsin argument K(1 - r^2)/r must not exceed 1 at r = min_cone_norm.
    const double r = min_cone_norm;
    if (!(r > 0.0 && r < 1.0 - ball_eps) || cone_K * (1.0 - r * r) / r > 1.0)
      throw ConfigError("min_cone_norm leaves the half-aperture undefined for cone_K");
  }
};

namespace poincare {

inline constexpr double kDenominatorGuard = 1e-15;
/// Cosines within this distance of +-1 are snapped, so collinear
/// configurations give exactly 0 or pi.
inline constexpr double kAcosSnap = 8.0 * std::numeric_limits<double>::epsilon();

template <class T>
Vec<T> negate(const Vec<T>& x) {
  Vec<T> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = -x[k];
  return out;
}

/// Radially rescale onto the closed ball of radius 1 - ball_eps.
template <class T>
Vec<T> project(const Vec<T>& x, const GeometryConfig& g) {
  using std::sqrt;
  const T n = sqrt(squared_norm(x));
  const double limit = 1.0 - g.ball_eps;
  note_kink(limit - value(n));
  if (value(n) <= limit) return x;
  return scaled(x, T(limit) / n);
}

template <class T>
Vec<T> mobius_add(const Vec<T>& x, const Vec<T>& y, const GeometryConfig& g) {
  const T xy = dot(x, y);
  const T x2 = squared_norm(x);
  const T y2 = squared_norm(y);
  const T den = 1.0 + 2.0 * xy + x2 * y2 + kDenominatorGuard;
  const T a = (1.0 + 2.0 * xy + y2) / den;
  const T b = (1.0 - x2) / den;
  return project(axpby(a, x, b, y), g);
}

template <class T>
Vec<T> exp_map(const Vec<T>& z, const Vec<T>& v, const GeometryConfig& g) {
  using std::sqrt;
  using std::tanh;
  const T nv = sqrt(squared_norm(v));
  if (value(nv) == 0.0) return z;
  const T t = tanh(nv / (1.0 - squared_norm(z)));
  return mobius_add(z, scaled(v, t / nv), g);
}

template <class T>
Vec<T> log_map(const Vec<T>& z, const Vec<T>& y, const GeometryConfig& g) {
  using std::atanh;
  using std::sqrt;
  const Vec<T> w = mobius_add(negate(z), y, g);
  const T nw = sqrt(squared_norm(w));
  if (value(nw) == 0.0) return Vec<T>(y.size(), T(0.0));
  const T factor = (1.0 - squared_norm(z)) * atanh(nw) / nw;
  return scaled(w, factor);
}

/// exp_map at the origin, followed by projection.
template <class T>
Vec<T> exp0(const Vec<T>& v, const GeometryConfig& g) {
  using std::sqrt;
  using std::tanh;
  const T nv = sqrt(squared_norm(v));
  if (value(nv) == 0.0) return Vec<T>(v.size(), T(0.0));
  return project(scaled(v, tanh(nv) / nv), g);
}

/// log_map at the origin.
template <class T>
Vec<T> log0(const Vec<T>& y) {
  using std::atanh;
  using std::sqrt;
  const T ny = sqrt(squared_norm(y));
  if (value(ny) == 0.0) return Vec<T>(y.size(), T(0.0));
  return scaled(y, atanh(ny) / ny);
}

/// arcsin(K (1 - r^2) / r) for a cone apex at Euclidean norm r.
template <class T>
T half_aperture_at_norm(const T& r, const GeometryConfig& g) {
  using std::asin;
  const T arg = g.cone_K * (1.0 - r * r) / r;
  return asin(clamp_scalar(arg, -1.0 + g.arg_clamp_eps, 1.0 - g.arg_clamp_eps));
}

/// Angle at x between the ray from the origin through x and the ray x -> y.
/// Returns 0 when y coincides with x.
template <class T>
T cone_angle(const Vec<T>& x, const Vec<T>& y) {
  using std::acos;
  using std::sqrt;
  const T xy = dot(x, y);
  const T x2 = squared_norm(x);
  const T y2 = squared_norm(y);
  Vec<T> diff(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - y[k];
  const T dxy = sqrt(squared_norm(diff));
  if (value(dxy) == 0.0) return T(0.0);
  const T num = xy * (1.0 + x2) - x2 * (1.0 + y2);
  const T den = sqrt(x2) * dxy * sqrt(1.0 + x2 * y2 - 2.0 * xy);
  const T ratio = num / den;
  if (value(ratio) >= 1.0 - kAcosSnap) return T(0.0);
  if (value(ratio) <= -1.0 + kAcosSnap) return T(std::numbers::pi);
  return acos(ratio);
}

}  // namespace poincare

// ---------------------------------------------------------------------------
// Checked public API.

/// A point of the open unit ball. Construction checks finiteness and |x| < 1.
class BallPoint {
 public:
  BallPoint() = default;
  explicit BallPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    double n2 = 0.0;
    for (double c : coords_) {
      if (!std::isfinite(c)) throw ContractViolation("BallPoint: non-finite coordinate");
      n2 += c * c;
    }
    if (!(n2 < 1.0)) throw ContractViolation("BallPoint: point lies outside the open unit ball");
  }

  static BallPoint origin(std::size_t dim) { return BallPoint(std::vector<double>(dim, 0.0)); }

  const std::vector<double>& coords() const noexcept { return coords_; }
  std::size_t dim() const noexcept { return coords_.size(); }
  double norm() const { return hakg::norm(coords_); }

  friend bool operator==(const BallPoint&, const BallPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// A vector in the tangent space at `base`.
class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(std::vector<double> coords, BallPoint base)
      : coords_(std::move(coords)), base_(std::move(base)) {
    for (double c : coords_) {
      if (!std::isfinite(c)) throw ContractViolation("TangentVector: non-finite coordinate");
    }
    if (coords_.size() != base_.dim())
      throw ContractViolation("TangentVector: dimension differs from base point");
  }

  /// Tangent vector at the origin.
  static TangentVector at_origin(std::vector<double> coords) {
    const auto d = coords.size();
    return TangentVector(std::move(coords), BallPoint::origin(d));
  }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const BallPoint& base() const noexcept { return base_; }
  std::size_t dim() const noexcept { return coords_.size(); }

 private:
  std::vector<double> coords_;
  BallPoint base_;
};

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b, const char* op,
                             const GeometryConfig& g) {
  if (a != b) {
    throw ContractViolation(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
  if (g.dim != 0 && a != g.dim) {
    throw ContractViolation(std::string(op) + ": dimension " + std::to_string(a) +
                            " differs from configured " + std::to_string(g.dim));
  }
}

}  // namespace detail

inline BallPoint project_to_ball(std::span<const double> x, const GeometryConfig& g = {}) {
  for (double c : x) {
    if (!std::isfinite(c)) throw ContractViolation("project_to_ball: non-finite input");
  }
  return BallPoint(poincare::project(std::vector<double>(x.begin(), x.end()), g));
}

inline BallPoint mobius_add(const BallPoint& x, const BallPoint& y, const GeometryConfig& g = {}) {
  detail::require_same_dim(x.dim(), y.dim(), "mobius_add", g);
  return BallPoint(poincare::mobius_add(x.coords(), y.coords(), g));
}

inline BallPoint exp_map(const BallPoint& z, const TangentVector& v, const GeometryConfig& g = {}) {
  detail::require_same_dim(z.dim(), v.dim(), "exp_map", g);
  if (!(v.base() == z)) throw ContractViolation("exp_map: tangent vector is based at another point");
  return BallPoint(poincare::exp_map(z.coords(), v.coords(), g));
}

inline TangentVector log_map(const BallPoint& z, const BallPoint& y, const GeometryConfig& g = {}) {
  detail::require_same_dim(z.dim(), y.dim(), "log_map", g);
  return TangentVector(poincare::log_map(z.coords(), y.coords(), g), z);
}

/// Half opening angle of the entailment cone at x, in radians.
inline double half_aperture(const BallPoint& x, const GeometryConfig& g = {}) {
  const double r = x.norm();
  if (r < g.min_cone_norm) {
    throw ContractViolation("half_aperture: |x| = " + std::to_string(r) +
                            " is below min_cone_norm");
  }
  return poincare::half_aperture_at_norm(r, g);
}

inline double cone_angle(const BallPoint& x, const BallPoint& y, const GeometryConfig& g = {}) {
  detail::require_same_dim(x.dim(), y.dim(), "cone_angle", g);
  if (x.norm() == 0.0) throw ContractViolation("cone_angle: apex at the origin");
  if (x == y) throw ContractViolation("cone_angle: y coincides with the apex");
  return poincare::cone_angle(x.coords(), y.coords());
}

/// Hyperbolic distance from the origin, 2 artanh(|x|).
inline double dist_to_origin(const BallPoint& x) { return 2.0 * std::atanh(x.norm()); }

}  // namespace hakg
