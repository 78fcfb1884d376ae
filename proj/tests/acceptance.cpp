// Acceptance suite: prints one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]...

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "hakg/hakg.hpp"
#include "oracle.hpp"

namespace {

namespace pc = hakg::poincare;
using hakg::Id;
using hakg::Vec;

const hakg::GeometryConfig kGeo{};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs_diff(const Vec<double>& a, const Vec<double>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

Vec<double> random_in_shell(std::mt19937_64& rng, std::size_t d, double lo, double hi) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> r(lo, hi);
  Vec<double> v(d);
  for (auto& x : v) x = n01(rng);
  const double s = r(rng) / hakg::norm(v);
  for (auto& x : v) x *= s;
  return v;
}

// ---------------------------------------------------------------------------

Outcome geometry_suite() {
  std::mt19937_64 rng(1001);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t d = 2 + n % 7;
    const auto x = random_in_shell(rng, d, 0.0, 0.9);
    const auto y = random_in_shell(rng, d, 0.0, 0.9);
    const Vec<double> zero(d, 0.0);
    const double lam = 1.0 - hakg::squared_norm(x);
    auto v = random_in_shell(rng, d, 0.0, 3.0);
    for (auto& c : v) c *= lam;
    worst = std::max({worst, max_abs_diff(pc::mobius_add(zero, x, kGeo), x),
                      max_abs_diff(pc::mobius_add(x, zero, kGeo), x),
                      max_abs_diff(pc::mobius_add(pc::negate(x), x, kGeo), zero),
                      max_abs_diff(pc::mobius_add(pc::negate(x), pc::mobius_add(x, y, kGeo), kGeo), y),
                      max_abs_diff(pc::exp_map(x, pc::log_map(x, y, kGeo), kGeo), y),
                      max_abs_diff(pc::log_map(x, pc::exp_map(x, v, kGeo), kGeo), v)});
  }
  const auto m = hakg::mobius_add(hakg::BallPoint({0.3, 0.0}), hakg::BallPoint({0.4, 0.0}));
  const auto e = hakg::exp_map(hakg::BallPoint::origin(2), hakg::TangentVector::at_origin({0.5, 0.0}));
  const auto l = hakg::log_map(hakg::BallPoint::origin(2), hakg::BallPoint({0.462117, 0.0}));
  auto six = [](double got, double want) { return std::abs(got - want) < 5e-7; };
  const bool examples = six(m.coords()[0], 0.625) && m.coords()[1] == 0.0 && six(e.coords()[0], 0.462117) &&
                        e.coords()[1] == 0.0 && six(l.coords()[0], 0.5) && l.coords()[1] == 0.0;
  return {worst < 1e-6 && examples,
          fmt("1000 cases, max identity/round-trip error %.3g (tol 1e-6); examples %s", worst,
              examples ? "match" : "MISMATCH")};
}

Vec<double> sample_in_cone(std::mt19937_64& rng, const Vec<double>& x) {
  const std::size_t d = x.size();
  const double r = hakg::norm(x);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double alpha = pc::half_aperture_at_norm(r, kGeo) * u01(rng);
  Vec<double> xhat(d), w = random_in_shell(rng, d, 1.0, 1.0);
  for (std::size_t k = 0; k < d; ++k) xhat[k] = x[k] / r;
  const double proj = hakg::dot(w, xhat);
  for (std::size_t k = 0; k < d; ++k) w[k] -= proj * xhat[k];
  const double wn = hakg::norm(w);
  const double len = (1 - r * r) * (0.05 + 1.45 * u01(rng));
  Vec<double> v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = len * (std::cos(alpha) * xhat[k] + std::sin(alpha) * w[k] / wn);
  return pc::exp_map(x, v, kGeo);
}

Outcome cone_suite() {
  const double psi = hakg::half_aperture(hakg::BallPoint({0.5, 0.0}));
  const bool aperture = std::abs(psi - 0.150568) <= 1e-6;
  const double a0 = hakg::cone_angle(hakg::BallPoint({0.5, 0.0}), hakg::BallPoint({0.7, 0.0}));
  const double api = hakg::cone_angle(hakg::BallPoint({0.5, 0.0}), hakg::BallPoint({0.3, 0.0}));
  const bool collinear = a0 == 0.0 && api == std::numbers::pi;
  std::mt19937_64 rng(1002);
  int violations = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto x = random_in_shell(rng, 3, 0.1, 0.9);
    const auto y = sample_in_cone(rng, x);
    const auto z = sample_in_cone(rng, y);
    if (pc::cone_angle(x, z) > pc::half_aperture_at_norm(hakg::norm(x), kGeo) + 1e-6) ++violations;
  }
  return {aperture && collinear && violations == 0,
          fmt("psi(0.5)=%.9f; collinear angles %.17g and %.17g; transitivity violations %d/1000", psi, a0, api,
              violations)};
}

Outcome gradient_check() {
  const auto ds = fixtures::toy_dataset();
  const auto cfg = fixtures::toy_model_config(1);
  const auto p = fixtures::random_params(hakg::ModelShape::of(ds, 4), 2718);
  const auto batch = gradcheck::full_batch(ds, cfg, 3, 2718);
  const auto rep = gradcheck::check(p, ds, cfg, 0.6, batch);
  return {rep.pass_fraction() >= 0.99 && rep.checked > 0,
          fmt("%zu coordinates checked, %zu excluded near kinks, %.2f%% within 1e-4 (worst %.3g at %s)", rep.checked,
              rep.excluded, 100.0 * rep.pass_fraction(), rep.worst_rel, rep.worst_where.c_str())};
}

Outcome forward_oracle() {
  const auto ds = fixtures::toy_dataset();
  const auto cfg = fixtures::toy_model_config(1);
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = fixtures::random_params(hakg::ModelShape::of(ds, 4), seed);
    const auto fr = hakg::forward(p, ds, cfg);
    const auto o = oracle::forward_one_layer(fixtures::to_raw(p), ds);
    for (std::size_t u = 0; u < 3; ++u) worst = std::max(worst, max_abs_diff(fr.final.user[u], o.user[u]));
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, max_abs_diff(fr.final.item_collab[i], o.collab[i]));
    for (std::size_t x = 0; x < 7; ++x) worst = std::max(worst, max_abs_diff(fr.final.entity[x], o.entity[x]));
    for (Id u = 0; u < 3; ++u) {
      for (Id i = 0; i < 3; ++i) worst = std::max(worst, std::abs(hakg::predict_score(fr.final, u, i) - o.score[u][i]));
    }
  }
  return {worst <= 1e-9, fmt("5 random toy models, max deviation %.3g (tol 1e-9)", worst)};
}

Outcome metric_oracle() {
  std::mt19937_64 rng(1005);
  int mismatches = 0, instances = 0;
  for (int n = 0; n < 500; ++n) {
    const std::size_t items = 1 + rng() % 50;
    std::vector<double> scores(items);
    for (auto& s : scores) s = double(rng() % 9) / 9.0;
    std::vector<Id> train, test;
    for (Id i = 0; i < items; ++i) {
      const auto r = rng() % 4;
      if (r == 0) train.push_back(i);
      if (r == 1) test.push_back(i);
    }
    if (test.empty()) continue;
    ++instances;
    // brute force: every candidate's rank is 1 + the number of candidates ahead of it
    std::vector<Id> cand;
    for (Id i = 0; i < items; ++i) {
      if (std::find(train.begin(), train.end(), i) == train.end()) cand.push_back(i);
    }
    const auto ranked = hakg::rank_by_scores(scores, train);
    std::vector<std::size_t> ahead_of_hit;
    for (Id i : test) {
      if (std::find(train.begin(), train.end(), i) != train.end()) continue;
      std::size_t ahead = 0;
      for (Id j : cand) ahead += scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
      ahead_of_hit.push_back(ahead);
    }
    std::sort(ahead_of_hit.begin(), ahead_of_hit.end());
    for (std::size_t k = 1; k <= items; ++k) {
      double hits = 0, dcg = 0, idcg = 0;
      for (std::size_t a : ahead_of_hit) {
        if (a >= k) break;
        hits += 1;
        dcg += 1.0 / std::log2(double(a) + 2.0);
      }
      for (std::size_t p = 0; p < std::min(k, test.size()); ++p) idcg += 1.0 / std::log2(double(p) + 2.0);
      if (hakg::recall_at_k(ranked, test, k) != hits / double(test.size())) ++mismatches;
      if (hakg::ndcg_at_k(ranked, test, k) != dcg / idcg) ++mismatches;
    }
  }
  const std::vector<Id> r{5, 3, 9};
  const std::vector<Id> t{3};
  const double g = hakg::ndcg_at_k(r, t, 20);
  const bool example = std::abs(g - 1.0 / std::log2(3.0)) <= 1e-12;
  return {mismatches == 0 && example,
          fmt("%d instances (<= 50 items, all K), %d mismatches; rank-2 ndcg %.15f", instances, mismatches, g)};
}

// Shared 200-epoch run on the synthetic dataset.
struct SmokeRun {
  hakg::Dataset ds;
  fixtures::SmokeConfig cfg;
  hakg::TrainResult result;
};

const SmokeRun& smoke_run() {
  static const SmokeRun run = [] {
    SmokeRun r;
    r.ds = hakg::synthetic_dataset();
    r.cfg = fixtures::smoke_config(200);
    r.result = hakg::train(r.ds, r.cfg.model, r.cfg.train);
    return r;
  }();
  return run;
}

Outcome training_smoke() {
  const auto& run = smoke_run();
  const auto& h = run.result.history;
  if (h.size() < 200) return {false, fmt("only %zu epochs ran (%s)", h.size(), run.result.message.c_str())};
  const double ratio = h[199].total / h[0].total;
  const auto& ig = run.ds.interactions;
  const auto rep = hakg::evaluate(run.result.params, run.ds, run.cfg.model, 5, ig.test);
  const double baseline = hakg::random_recall_baseline(ig, ig.test, 5);
  return {ratio <= 0.5 && rep.recall > 2 * baseline,
          fmt("loss epoch 1 %.4f -> epoch 200 %.4f (ratio %.3f, need <= 0.5); test recall@5 %.4f vs 2x baseline %.4f",
              h[0].total, h[199].total, ratio, rep.recall, 2 * baseline)};
}

Outcome angle_loss_behavior() {
  const std::vector<bool> keep{true, true};
  const double contained = hakg::angle_violation<double>({0.7, 0.0}, {0.5, 0.0}, keep, kGeo);
  const double violated = hakg::angle_violation<double>({0.3, 0.0}, {0.5, 0.0}, keep, kGeo);
  const double hand = std::numbers::pi - 0.15056827277668602;  // pi - asin(0.1 * 0.75 / 0.5)
  const bool values = contained == 0.0 && std::abs(violated - hand) <= 1e-9;

  const auto ds = hakg::synthetic_dataset();
  auto cfg = fixtures::smoke_config(10);
  cfg.model.angle_weight = 0.0;
  const auto off = hakg::train(ds, cfg.model, cfg.train);
  cfg.model.angle_weight = 0.01;
  const auto on = hakg::train(ds, cfg.model, cfg.train);
  double diff = 0;
  const auto a = off.last_params.tensors(), b = on.last_params.tensors();
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t k = 0; k < a[n]->data.size(); ++k) diff = std::max(diff, std::abs(a[n]->data[k] - b[n]->data[k]));
  }

  // the angle term alone must reach the entity table
  hakg::Batch only_angle;
  only_angle.hier_pairs = ds.kg.hier_pairs;
  for (std::size_t k = 0; k < only_angle.hier_pairs.size(); ++k) {
    only_angle.masks.push_back(hakg::subspace_mask(k, 1, 1, cfg.model.dim, cfg.model.mask_prob));
  }
  const auto p = hakg::init_params(hakg::ModelShape::of(ds, cfg.model.dim), 3);
  const auto g = hakg::compute_gradients(p, ds, cfg.model, 0.6, only_angle);
  double gnorm = 0;
  for (double x : g.grad.entity.data) gnorm += x * x;
  gnorm = std::sqrt(gnorm);

  return {values && diff > 0.0 && gnorm > 0.0,
          fmt("containment %.3g; violation %.12f vs hand %.12f; lambda 0 vs 0.01 max param gap %.3g; "
              "angle-only entity gradient norm %.3g (angle term %.4f)",
              contained, violated, hand, diff, gnorm, g.loss.angle)};
}

Outcome gate_invariance() {
  const auto ds = fixtures::toy_dataset();
  const auto shape = hakg::ModelShape::of(ds, 4);
  const auto p = fixtures::random_params(shape, 808);
  std::mt19937_64 rng(809);
  std::normal_distribution<double> n01(0.0, 0.3);

  struct Gap {
    double users = 0, scores = 0;
  };
  auto compare = [&](hakg::GateMode mode, const hakg::ModelParams& q) {
    auto cfg = fixtures::toy_model_config(2);
    cfg.gate = mode;
    const auto a = hakg::forward(p, ds, cfg);
    const auto b = hakg::forward(q, ds, cfg);
    Gap g;
    for (std::size_t u = 0; u < 3; ++u) g.users = std::max(g.users, max_abs_diff(a.final.user[u], b.final.user[u]));
    for (Id u = 0; u < 3; ++u) {
      for (Id i = 0; i < 3; ++i) {
        g.scores = std::max(g.scores, std::abs(hakg::predict_score(a.final, u, i) - hakg::predict_score(b.final, u, i)));
      }
    }
    return g;
  };
  auto collab = p;
  for (auto& x : collab.collab_item.data) x += n01(rng);
  const Gap one = compare(hakg::GateMode::pinned_one, collab);
  auto knowledge = p;
  for (auto& x : knowledge.entity.data) x += n01(rng);
  for (auto& x : knowledge.relation.data) x += n01(rng);
  const Gap zero = compare(hakg::GateMode::pinned_zero, knowledge);

  const bool pass = one.users == 0.0 && one.scores == 0.0 && zero.users == 0.0 && zero.scores == 0.0;
  return {pass, fmt("gate=1, collab perturbed: user gap %.3g, score gap %.3g; gate=0, knowledge perturbed: "
                    "user gap %.3g, score gap %.3g (all must be exactly 0)",
                    one.users, one.scores, zero.users, zero.scores)};
}

Outcome data_pipeline() {
  // crafted fixture: dense 20x20 block, sparse fringe, attributes of mixed degree
  std::vector<hakg::Interaction> pairs;
  std::vector<hakg::Triplet> trip;
  std::mt19937_64 rng(99);
  std::bernoulli_distribution dense(0.9), sparse(0.15);
  for (Id u = 0; u < 40; ++u) {
    for (Id i = 0; i < 30; ++i) {
      if ((u < 20 && i < 20) ? dense(rng) : sparse(rng)) pairs.push_back({u, i});
    }
  }
  for (Id i = 0; i < 30; ++i) {
    trip.push_back({i, 0, Id(100 + i % 2)});
    trip.push_back({i, 1, Id(200 + i % 6)});
    if (i % 3 == 0) trip.push_back({i, 2, 300});
  }
  const auto f = hakg::k_core_filter(pairs, trip, 10);
  const auto g = hakg::k_core_filter(f.pairs, f.triplets, 10);
  const bool idempotent = g.pairs == f.pairs && g.triplets == f.triplets;
  std::set<Id> items;
  for (const auto& p : pairs) items.insert(p.item);
  std::map<Id, std::size_t> ud, id, ed;
  for (const auto& p : f.pairs) {
    ++ud[p.user];
    ++id[p.item];
  }
  for (const auto& t : f.triplets) {
    if (!items.contains(t.head)) ++ed[t.head];
    if (t.tail != t.head && !items.contains(t.tail)) ++ed[t.tail];
  }
  std::size_t low = 0;
  for (const auto* m : {&ud, &id, &ed}) {
    for (auto [node, d] : *m) low += d < 10;
  }

  const auto closed = hakg::add_inverse_relations(trip, 3);
  const bool doubled = closed.size() == 2 * trip.size();

  const auto s1 = hakg::split_interactions(pairs, {}, 42);
  const auto s2 = hakg::split_interactions(pairs, {}, 42);
  const bool deterministic = s1.train == s2.train && s1.valid == s2.valid && s1.test == s2.test;

  return {idempotent && low == 0 && doubled && deterministic && !f.pairs.empty(),
          fmt("10-core kept %zu/%zu pairs, %zu/%zu triplets, %zu nodes below degree 10, idempotent %s; "
              "inverse closure %zu -> %zu; split deterministic %s",
              f.pairs.size(), pairs.size(), f.triplets.size(), trip.size(), low, idempotent ? "yes" : "no",
              trip.size(), closed.size(), deterministic ? "yes" : "no")};
}

Outcome ball_safety() {
  const auto& run = smoke_run();
  std::size_t bad_params = 0;
  for (const auto* params : {&run.result.params, &run.result.last_params}) {
    for (const auto* t : params->tensors()) {
      for (double x : t->data) bad_params += !std::isfinite(x);
    }
  }
  double worst = 0;
  std::size_t points = 0;
  for (const auto* params : {&run.result.params, &run.result.last_params}) {
    const auto fr = hakg::forward(*params, run.ds, run.cfg.model, true);
    auto visit = [&](const std::vector<Vec<double>>& v) {
      for (const auto& x : v) {
        worst = std::max(worst, hakg::norm(x));
        ++points;
      }
    };
    for (const auto& l : fr.layers) {
      visit(l.user);
      visit(l.item_collab);
      visit(l.entity);
    }
    visit(fr.final.user);
    visit(fr.final.item_collab);
    visit(fr.final.entity);
    visit(hakg::materialize(params->relation, run.cfg.model.geometry));
  }
  const double limit = 1.0 - 1e-5;
  return {worst <= limit && bad_params == 0 && run.result.history.size() >= 200,
          fmt("%zu epochs; %zu points, max norm %.12f (limit %.12f); %zu non-finite parameters",
              run.result.history.size(), points, worst, limit, bad_params)};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k] / n;
    my += y[k] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Items without train interactions have no log-popularity and are skipped.
double popularity_correlation(const SmokeRun& run, const hakg::ModelParams& params, std::size_t& n_items) {
  const auto fr = hakg::forward(params, run.ds, run.cfg.model);
  const auto stats = hakg::compute_stats(run.ds);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < stats.num_items; ++i) {
    if (stats.item_popularity[i] == 0) continue;
    x.push_back(std::log(double(stats.item_popularity[i])));
    y.push_back(hakg::dist_to_origin(hakg::BallPoint(fr.final.item_collab[i])));
  }
  n_items = x.size();
  return pearson(x, y);
}

Outcome hierarchy_export() {
  const auto& run = smoke_run();
  std::size_t n = 0;
  const double r = popularity_correlation(run, run.result.params, n);
  const double r_last = popularity_correlation(run, run.result.last_params, n);
  return {r < -0.2, fmt("Pearson(log popularity, dist_to_origin) over %zu items = %.4f for the exported "
                        "(best epoch %llu) model, need < -0.2; %.4f after the last epoch",
                        n, r, (unsigned long long)run.result.state.best_epoch, r_last)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "geometry suite", geometry_suite},
      {2, "cone suite", cone_suite},
      {3, "gradient check", gradient_check},
      {4, "forward oracle", forward_oracle},
      {5, "metric oracle", metric_oracle},
      {6, "training smoke", training_smoke},
      {7, "angle-loss behavior", angle_loss_behavior},
      {8, "gate invariance", gate_invariance},
      {9, "data pipeline", data_pipeline},
      {10, "ball safety", ball_safety},
      {11, "hierarchy export sanity", hierarchy_export},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--criterion") == 0 && a + 1 < argc) {
      selected.insert(std::atoi(argv[++a]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d [%s]: %s (%s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
