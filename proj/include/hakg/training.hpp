#pragma once

// Contrastive training with the weighted angle loss: Xavier initialisation,
// negative sampling, reverse-mode gradients, Adam in tangent coordinates and
// early stopping on recall@K.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hakg/autodiff.hpp"
#include "hakg/data.hpp"
#include "hakg/error.hpp"
#include "hakg/evaluation.hpp"
#include "hakg/model.hpp"

namespace hakg {

enum class MonitorSplit { valid, test };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 4096;
  std::size_t num_negatives = 64;  // |M_u|
  double margin = 0.6;             // m
  std::size_t max_epochs = 400;
  std::size_t patience = 10;
  std::uint64_t seed = 2022;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double angle_sample_fraction = 1.0;  // share of H used per batch
  std::size_t eval_k = 20;
  MonitorSplit monitor = MonitorSplit::valid;
  std::size_t threads = 1;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (num_negatives == 0) throw ConfigError("number of negatives must be at least 1");
    if (!(margin > 0.0 && margin < 2.0)) throw ConfigError("margin must lie in (0, 2)");
    if (patience == 0) throw ConfigError("patience must be at least 1");
    if (!(angle_sample_fraction > 0.0 && angle_sample_fraction <= 1.0))
      throw ConfigError("angle_sample_fraction must lie in (0, 1]");
    if (eval_k == 0) throw ConfigError("K must be at least 1");
  }
};

/// Per-dataset negative count and margin used for the three public benchmarks.
struct NegativePreset {
  const char* dataset;
  std::size_t num_negatives;
  double margin;
};

inline constexpr NegativePreset kNegativePresets[] = {
    {"alibaba-ifashion", 200, 0.6},
    {"yelp2018", 400, 0.8},
    {"last-fm", 400, 0.7},
};

/// Xavier-uniform: embedding rows use fan (1, d), gate matrices (d, d).
inline ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p(shape);
  std::mt19937_64 rng(seed);
  const double d = static_cast<double>(shape.dim);
  auto fill = [&rng](Table<double>& t, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& x : t.data) x = dist(rng);
  };
  const double emb_bound = std::sqrt(6.0 / (1.0 + d));
  const double gate_bound = std::sqrt(6.0 / (d + d));
  fill(p.user, emb_bound);
  fill(p.collab_item, emb_bound);
  fill(p.entity, emb_bound);
  fill(p.relation, emb_bound);
  fill(p.gate_w1, gate_bound);
  fill(p.gate_w2, gate_bound);
  return p;
}

/// `count` items drawn uniformly with replacement among items the user has
/// not trained on. Empty when no such item exists.
template <class Rng>
std::optional<std::vector<Id>> sample_negatives(std::span<const Id> train_items, std::size_t num_items,
                                                std::size_t count, Rng& rng) {
  if (train_items.size() >= num_items) return std::nullopt;
  std::uniform_int_distribution<Id> dist(0, static_cast<Id>(num_items - 1));
  std::vector<Id> out;
  out.reserve(count);
  while (out.size() < count) {
    const Id j = dist(rng);
    if (!std::binary_search(train_items.begin(), train_items.end(), j)) out.push_back(j);
  }
  return out;
}

/// 2 - y_pos + mean_j max(y_neg_j - m, 0).
template <class T>
T contrastive_loss(const T& positive, const std::vector<T>& negatives, double margin) {
  T neg = 0.0;
  for (const auto& y : negatives) neg += hinge(y - margin);
  if (!negatives.empty()) neg = neg / static_cast<double>(negatives.size());
  return 2.0 - positive + neg;
}

struct Batch {
  std::vector<Interaction> positives;
  std::vector<std::vector<Id>> negatives;  // per positive
  std::vector<HierPair> hier_pairs;
  std::vector<std::vector<bool>> masks;  // per hierarchical pair
};

template <class T>
struct LossTerms {
  T total = 0.0;
  T contrastive = 0.0;  // mean over positives
  T angle = 0.0;        // unweighted
};

template <class T>
LossTerms<T> loss_terms(const Params<T>& params, const Dataset& ds, const ModelConfig& cfg, double margin,
                        const Batch& batch) {
  const auto fr = forward(params, ds, cfg);
  LossTerms<T> out;
  for (std::size_t k = 0; k < batch.positives.size(); ++k) {
    const auto& pos = batch.positives[k];
    std::vector<T> neg;
    neg.reserve(batch.negatives[k].size());
    for (Id j : batch.negatives[k]) neg.push_back(predict_score(fr.final, pos.user, j));
    out.contrastive += contrastive_loss(predict_score(fr.final, pos.user, pos.item), neg, margin);
  }
  if (!batch.positives.empty()) out.contrastive = out.contrastive / static_cast<double>(batch.positives.size());
  if (!batch.hier_pairs.empty()) {
    out.angle = angle_loss(fr.final.entity, batch.hier_pairs, batch.masks, cfg.geometry);
  }
  out.total = out.contrastive + cfg.angle_weight * out.angle;
  return out;
}

inline LossTerms<double> total_loss(const ModelParams& params, const Dataset& ds, const ModelConfig& cfg,
                                    double margin, const Batch& batch) {
  return loss_terms(params, ds, cfg, margin, batch);
}

struct GradientResult {
  ModelParams grad;
  LossTerms<double> loss;
};

/// Exact gradient of the batch objective with respect to every tensor.
/// Throws NonFiniteGradient naming the first tensor holding NaN/Inf.
inline GradientResult compute_gradients(const ModelParams& params, const Dataset& ds, const ModelConfig& cfg,
                                        double margin, const Batch& batch) {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  Params<ad::Var> vars(params.shape());
  std::vector<ad::Var> leaves;
  leaves.reserve(params.size());
  const auto from = params.tensors();
  const auto to = vars.tensors();
  for (std::size_t n = 0; n < from.size(); ++n) {
    for (std::size_t k = 0; k < from[n]->data.size(); ++k) {
      to[n]->data[k] = ad::Var::leaf(from[n]->data[k]);
      leaves.push_back(to[n]->data[k]);
    }
  }
  const auto terms = loss_terms(vars, ds, cfg, margin, batch);
  const auto flat = ad::gradient(tape, terms.total, leaves);

  GradientResult out{ModelParams(params.shape()), {terms.total.value(), terms.contrastive.value(), terms.angle.value()}};
  std::size_t offset = 0;
  out.grad.for_each([&](const char* name, Table<double>& t) {
    for (std::size_t k = 0; k < t.data.size(); ++k) {
      const double g = flat[offset + k];
      if (!std::isfinite(g)) throw NonFiniteGradient(name, k);
      t.data[k] = g;
    }
    offset += t.data.size();
  });
  return out;
}

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(const ModelShape& s) : m(s), v(s) {}
};

/// Bias-corrected Adam, applied directly to the tangent-space coordinates.
inline void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state, const TrainConfig& cfg) {
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const auto p = params.tensors();
  const auto g = grad.tensors();
  const auto m = state.m.tensors();
  const auto v = state.v.tensors();
  for (std::size_t n = 0; n < p.size(); ++n) {
    auto& pd = p[n]->data;
    const auto& gd = g[n]->data;
    auto& md = m[n]->data;
    auto& vd = v[n]->data;
    for (std::size_t k = 0; k < pd.size(); ++k) {
      md[k] = cfg.beta1 * md[k] + (1.0 - cfg.beta1) * gd[k];
      vd[k] = cfg.beta2 * vd[k] + (1.0 - cfg.beta2) * gd[k] * gd[k];
      const double mhat = md[k] / c1;
      const double vhat = vd[k] / c2;
      pd[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

struct TrainState {
  std::uint64_t epoch = 0;
  AdamState adam;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::uint64_t best_epoch = 0;
  std::uint64_t epochs_since_best = 0;
  std::mt19937_64 rng;
};

struct EpochRecord {
  std::uint64_t epoch = 0;
  double total = 0.0;
  double contrastive = 0.0;
  double angle = 0.0;
  double metric = 0.0;  // recall@K on the monitor split
  double seconds = 0.0;
};

enum class StopReason { max_epochs, early_stopped, diverged };

struct TrainResult {
  ModelParams params;  // best epoch
  ModelParams last_params;
  TrainState state;
  std::vector<EpochRecord> history;
  StopReason reason = StopReason::max_epochs;
  std::string message;
};

/// Builds the batches of one epoch: shuffled positives, fresh negatives per
/// positive and the hierarchical pairs with this epoch's masks.
class BatchPlanner {
 public:
  BatchPlanner(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg)
      : ds_(ds), mcfg_(mcfg), tcfg_(tcfg) {}

  std::vector<Batch> plan_epoch(std::uint64_t epoch, std::mt19937_64& rng, std::size_t* skipped = nullptr) const {
    const auto& ig = ds_.interactions;
    std::vector<Interaction> positives = ig.train;
    std::shuffle(positives.begin(), positives.end(), rng);

    const auto& H = ds_.kg.hier_pairs;
    std::vector<std::vector<bool>> masks(H.size());
    for (std::size_t k = 0; k < H.size(); ++k) {
      masks[k] = subspace_mask(k, epoch, tcfg_.seed, mcfg_.dim, mcfg_.mask_prob);
    }

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < positives.size(); start += tcfg_.batch_size) {
      Batch b;
      const std::size_t end = std::min(positives.size(), start + tcfg_.batch_size);
      for (std::size_t k = start; k < end; ++k) {
        const auto& p = positives[k];
        auto neg = sample_negatives(std::span<const Id>(ig.user_items[p.user]), ig.num_items, tcfg_.num_negatives, rng);
        if (!neg) {
          if (skipped) ++*skipped;
          continue;
        }
        b.positives.push_back(p);
        b.negatives.push_back(std::move(*neg));
      }
      if (tcfg_.angle_sample_fraction >= 1.0) {
        b.hier_pairs = H;
        b.masks = masks;
      } else {
        std::bernoulli_distribution take(tcfg_.angle_sample_fraction);
        for (std::size_t k = 0; k < H.size(); ++k) {
          if (take(rng)) {
            b.hier_pairs.push_back(H[k]);
            b.masks.push_back(masks[k]);
          }
        }
      }
      batches.push_back(std::move(b));
    }
    return batches;
  }

 private:
  const Dataset& ds_;
  const ModelConfig& mcfg_;
  const TrainConfig& tcfg_;
};

/// Updates the early-stopping counters; true when `epoch` becomes the best
/// one. Without a monitor metric every epoch counts as the best.
inline bool record_metric(TrainState& st, std::uint64_t epoch, std::optional<double> metric) {
  if (metric && !(*metric > st.best_metric)) {
    ++st.epochs_since_best;
    return false;
  }
  if (metric) st.best_metric = *metric;
  st.best_epoch = epoch;
  st.epochs_since_best = 0;
  return true;
}

inline bool should_stop(const TrainState& st, const TrainConfig& cfg) {
  return st.epochs_since_best >= cfg.patience;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

inline TrainState initial_state(const ModelShape& shape, const TrainConfig& cfg) {
  TrainState st;
  st.adam = AdamState(shape);
  st.rng.seed(cfg.seed ^ 0x5DEECE66Dull);
  return st;
}

/// Epoch loop with early stopping. Resumes from `resume` when given.
inline TrainResult train(const Dataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg,
                         const EpochCallback& on_epoch = {},
                         std::optional<std::pair<ModelParams, TrainState>> resume = std::nullopt) {
  mcfg.validate();
  tcfg.validate();
  const auto shape = ModelShape::of(ds, mcfg.dim);
  TrainResult res;
  ModelParams params = resume ? resume->first : init_params(shape, tcfg.seed);
  res.state = resume ? resume->second : initial_state(shape, tcfg);
  res.params = params;
  if (!(params.shape() == shape)) throw CheckpointError("resume parameters do not match the dataset shape");

  const auto& monitor = tcfg.monitor == MonitorSplit::valid ? ds.interactions.valid : ds.interactions.test;
  BatchPlanner planner(ds, mcfg, tcfg);
  std::size_t skipped = 0;

  while (res.state.epoch < tcfg.max_epochs) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t epoch = ++res.state.epoch;
    const auto batches = planner.plan_epoch(epoch, res.state.rng, &skipped);
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      for (const auto& b : batches) {
        const auto gr = compute_gradients(params, ds, mcfg, tcfg.margin, b);
        if (!std::isfinite(gr.loss.total)) throw DataError("loss became non-finite");
        rec.total += gr.loss.total;
        rec.contrastive += gr.loss.contrastive;
        rec.angle += gr.loss.angle;
        adam_step(params, gr.grad, res.state.adam, tcfg);
      }
    } catch (const NonFiniteGradient& e) {
      res.reason = StopReason::diverged;
      res.message = e.what();
      break;
    } catch (const DataError& e) {
      res.reason = StopReason::diverged;
      res.message = e.what();
      break;
    }
    const double nb = static_cast<double>(std::max<std::size_t>(1, batches.size()));
    rec.total /= nb;
    rec.contrastive /= nb;
    rec.angle /= nb;

    std::optional<double> metric;
    if (!monitor.empty()) metric = evaluate(params, ds, mcfg, tcfg.eval_k, monitor, tcfg.threads).recall;
    rec.metric = metric.value_or(std::numeric_limits<double>::quiet_NaN());
    if (record_metric(res.state, epoch, metric)) res.params = params;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (should_stop(res.state, tcfg)) {
      res.reason = StopReason::early_stopped;
      break;
    }
  }
  if (skipped > 0) {
    std::cerr << "warning: skipped " << skipped
              << " positive pairs whose user has interacted with every item\n";
  }
  res.last_params = std::move(params);
  return res;
}

}  // namespace hakg
