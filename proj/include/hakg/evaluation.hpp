#pragma once

// All-ranking top-K evaluation: every item outside the user's training set
// is scored and ranked; recall@K and ndcg@K are macro-averaged over users
// with a non-empty held-out set.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hakg/data.hpp"
#include "hakg/error.hpp"
#include "hakg/model.hpp"

namespace hakg {

/// Item ids not in `excluded` (sorted), by descending score; ties go to the
/// lower id.
inline std::vector<Id> rank_by_scores(std::span<const double> scores, std::span<const Id> excluded) {
  std::vector<Id> cand;
  cand.reserve(scores.size());
  for (Id i = 0; i < scores.size(); ++i) {
    if (!std::binary_search(excluded.begin(), excluded.end(), i)) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](Id a, Id b) { return scores[a] > scores[b]; });
  return cand;
}

inline std::vector<double> score_all_items(const NodeReps<double>& reps, Id user) {
  std::vector<double> s(reps.item_collab.size());
  for (Id i = 0; i < s.size(); ++i) s[i] = predict_score(reps, user, i);
  return s;
}

inline std::vector<Id> rank_items(const NodeReps<double>& reps, Id user, std::span<const Id> train_items) {
  const auto s = score_all_items(reps, user);
  return rank_by_scores(s, train_items);
}

/// |top-K ∩ test| / |test|. `test` must be sorted and non-empty.
inline double recall_at_k(std::span<const Id> ranked, std::span<const Id> test, std::size_t k) {
  if (test.empty()) throw ContractViolation("recall_at_k: empty test set");
  if (k == 0) throw ContractViolation("recall_at_k: K must be at least 1");
  std::size_t hits = 0;
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t p = 0; p < n; ++p) hits += std::binary_search(test.begin(), test.end(), ranked[p]);
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

/// Binary-relevance nDCG with 1/log2(p + 1) discount, p 1-based.
inline double ndcg_at_k(std::span<const Id> ranked, std::span<const Id> test, std::size_t k) {
  if (test.empty()) throw ContractViolation("ndcg_at_k: empty test set");
  if (k == 0) throw ContractViolation("ndcg_at_k: K must be at least 1");
  double dcg = 0.0;
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t p = 0; p < n; ++p) {
    if (std::binary_search(test.begin(), test.end(), ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t p = 0; p < std::min(test.size(), k); ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

struct EvalReport {
  std::size_t k = 20;
  std::vector<Id> users;  // evaluated users, ascending
  std::vector<double> user_recall;
  std::vector<double> user_ndcg;
  double recall = 0.0;
  double ndcg = 0.0;
  std::size_t num_users() const noexcept { return users.size(); }
};

/// Held-out items per user, sorted.
inline std::vector<std::vector<Id>> group_by_user(const std::vector<Interaction>& pairs, std::size_t num_users) {
  std::vector<std::vector<Id>> out(num_users);
  for (const auto& p : pairs) out[p.user].push_back(p.item);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

/// Ranks for every user with held-out items; `threads` workers split the
/// users into contiguous blocks, the reduction runs in user order.
inline EvalReport evaluate_reps(const NodeReps<double>& reps, const InteractionGraph& ig,
                                const std::vector<Interaction>& held_out, std::size_t k,
                                std::size_t threads = 1) {
  if (k == 0) throw ConfigError("K must be at least 1");
  const auto truth = group_by_user(held_out, ig.num_users);
  EvalReport rep;
  rep.k = k;
  for (Id u = 0; u < ig.num_users; ++u) {
    if (!truth[u].empty()) rep.users.push_back(u);
  }
  if (rep.users.empty()) throw DataError("no user has held-out interactions to evaluate");
  rep.user_recall.assign(rep.users.size(), 0.0);
  rep.user_ndcg.assign(rep.users.size(), 0.0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const Id u = rep.users[n];
      const auto scores = score_all_items(reps, u);
      const auto& excluded = ig.user_items[u];
      std::vector<Id> cand;
      cand.reserve(scores.size());
      for (Id i = 0; i < scores.size(); ++i) {
        if (!std::binary_search(excluded.begin(), excluded.end(), i)) cand.push_back(i);
      }
      const std::size_t top = std::min(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(top), cand.end(),
                        [&](Id a, Id b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
      cand.resize(top);
      rep.user_recall[n] = recall_at_k(cand, truth[u], k);
      rep.user_ndcg[n] = ndcg_at_k(cand, truth[u], k);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, rep.users.size()));
  if (threads == 1) {
    work(0, rep.users.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (rep.users.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(rep.users.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t n = 0; n < rep.users.size(); ++n) {
    rep.recall += rep.user_recall[n];
    rep.ndcg += rep.user_ndcg[n];
  }
  rep.recall /= static_cast<double>(rep.users.size());
  rep.ndcg /= static_cast<double>(rep.users.size());
  return rep;
}

inline EvalReport evaluate(const ModelParams& params, const Dataset& ds, const ModelConfig& cfg,
                           std::size_t k, const std::vector<Interaction>& held_out,
                           std::size_t threads = 1) {
  const auto fr = forward(params, ds, cfg);
  return evaluate_reps(fr.final, ds.interactions, held_out, k, threads);
}

/// Test-split evaluation.
inline EvalReport evaluate(const ModelParams& params, const Dataset& ds, const ModelConfig& cfg,
                           std::size_t k = 20, std::size_t threads = 1) {
  return evaluate(params, ds, cfg, k, ds.interactions.test, threads);
}

/// Expected recall@K of a uniformly random ranking, macro-averaged:
/// min(K, n_candidates) / n_candidates per user.
inline double random_recall_baseline(const InteractionGraph& ig, const std::vector<Interaction>& held_out,
                                     std::size_t k) {
  const auto truth = group_by_user(held_out, ig.num_users);
  double total = 0.0;
  std::size_t users = 0;
  for (Id u = 0; u < ig.num_users; ++u) {
    if (truth[u].empty()) continue;
    const double cand = static_cast<double>(ig.num_items - ig.user_items[u].size());
    total += std::min(static_cast<double>(k), cand) / cand;
    ++users;
  }
  return users == 0 ? 0.0 : total / static_cast<double>(users);
}

/// `metric=<name>@K K=<K> value=<v> users=<n>`, one line per metric.
inline void write_report(std::ostream& out, const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "metric=recall@%zu K=%zu value=%.6f users=%zu\n", r.k, r.k, r.recall,
                r.num_users());
  out << buf;
  std::snprintf(buf, sizeof buf, "metric=ndcg@%zu K=%zu value=%.6f users=%zu\n", r.k, r.k, r.ndcg,
                r.num_users());
  out << buf;
}

}  // namespace hakg
