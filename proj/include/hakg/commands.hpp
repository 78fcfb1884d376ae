#pragma once

// The four CLI commands. Each writes its outputs under `out_dir` through
// `OutputSet`, which stages files as `<name>.partial` and only renames them
// into place once the command has succeeded.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hakg/checkpoint.hpp"
#include "hakg/config.hpp"
#include "hakg/data.hpp"
#include "hakg/evaluation.hpp"
#include "hakg/geometry.hpp"
#include "hakg/model.hpp"
#include "hakg/training.hpp"

namespace hakg {

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) std::filesystem::remove(staged(f), ec);
  }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream out(staged(name));
    if (!out) throw DataError("cannot write " + staged(name).string());
    return out;
  }

  std::filesystem::path staged(const std::string& name) const { return dir_ / (name + ".partial"); }
  std::filesystem::path final_path(const std::string& name) const { return dir_ / name; }

  void commit() {
    for (const auto& f : files_) std::filesystem::rename(staged(f), final_path(f));
    committed_ = true;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

inline Dataset load_run_dataset(const RunConfig& cfg) { return load_dataset(cfg.data_dir, cfg.prep); }

inline std::string format_epoch(const EpochRecord& r, std::size_t k) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "epoch=%llu total=%.9g contrastive=%.9g angle=%.9g recall@%zu=%.6f time=%.3fs",
                static_cast<unsigned long long>(r.epoch), r.total, r.contrastive, r.angle, k, r.metric, r.seconds);
  return buf;
}

inline DatasetStats cmd_stats(const RunConfig& cfg, std::ostream& log) {
  const auto ds = load_run_dataset(cfg);
  const auto s = compute_stats(ds);
  log << "users " << s.num_users << '\n'
      << "items " << s.num_items << '\n'
      << "interactions " << s.num_interactions << '\n'
      << "train_interactions " << s.num_train << '\n'
      << "entities " << s.num_entities << '\n'
      << "relations " << s.num_relations << '\n'
      << "triplets " << s.num_triplets << '\n'
      << "hierarchical_pairs " << s.num_hier_pairs << '\n';
  OutputSet outs(cfg.out_dir);
  {
    auto csv = outs.open("degree_distribution.csv");
    csv << "degree,count\n";
    for (const auto& [deg, count] : degree_distribution(s)) csv << deg << ',' << count << '\n';
  }
  {
    auto rc = outs.open("resolved_config.txt");
    write_resolved_config(rc, cfg);
  }
  outs.commit();
  return s;
}

inline EvalReport cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto ds = load_run_dataset(cfg);
  OutputSet outs(cfg.out_dir);
  {
    auto rc = outs.open("resolved_config.txt");
    write_resolved_config(rc, cfg);
  }
  auto train_log = outs.open("train_log.txt");
  const auto result = train(ds, cfg.model, cfg.train, [&](const EpochRecord& r) {
    const auto line = format_epoch(r, cfg.train.eval_k);
    train_log << line << '\n';
    log << line << '\n';
  });
  if (result.reason == StopReason::diverged) {
    train_log << "diverged: " << result.message << '\n';
    throw DataError("training diverged: " + result.message);
  }
  train_log << "stopped=" << (result.reason == StopReason::early_stopped ? "early" : "max_epochs")
            << " best_epoch=" << result.state.best_epoch << '\n';

  {
    auto ck = outs.open("checkpoint.txt");
    write_checkpoint(ck, {result.params, result.state});
  }
  const auto report = evaluate(result.params, ds, cfg.model, cfg.train.eval_k, cfg.train.threads);
  {
    auto er = outs.open("eval_report.txt");
    write_report(er, report);
  }
  write_report(train_log, report);
  write_report(log, report);
  train_log.close();
  outs.commit();
  if (!cfg.checkpoint.empty() && cfg.checkpoint != outs.final_path("checkpoint.txt")) {
    std::filesystem::copy_file(outs.final_path("checkpoint.txt"), cfg.checkpoint,
                               std::filesystem::copy_options::overwrite_existing);
  }
  return report;
}

inline Checkpoint load_compatible_checkpoint(const RunConfig& cfg, const Dataset& ds) {
  auto ck = load_checkpoint(cfg.checkpoint_path());
  require_compatible(ck, ModelShape::of(ds, cfg.model.dim));
  return ck;
}

inline EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto ds = load_run_dataset(cfg);
  const auto ck = load_compatible_checkpoint(cfg, ds);
  const auto report = evaluate(ck.params, ds, cfg.model, cfg.train.eval_k, cfg.train.threads);
  write_report(log, report);
  OutputSet outs(cfg.out_dir);
  {
    auto er = outs.open("evaluate_report.txt");
    write_report(er, report);
  }
  outs.commit();
  return report;
}

/// Writes embeddings.txt and norm_vs_popularity.csv (users use their final
/// representation, items their final collaborative representation).
inline void cmd_export(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto ds = load_run_dataset(cfg);
  const auto ck = load_compatible_checkpoint(cfg, ds);
  const auto fr = forward(ck.params, ds, cfg.model);
  const auto stats = compute_stats(ds);
  OutputSet outs(cfg.out_dir);
  {
    auto emb = outs.open("embeddings.txt");
    write_embeddings(emb, fr.final);
  }
  {
    auto csv = outs.open("norm_vs_popularity.csv");
    csv << "kind,id,popularity,dist_to_origin\n";
    char buf[64];
    for (std::size_t u = 0; u < ds.interactions.num_users; ++u) {
      std::snprintf(buf, sizeof buf, "%.17g", dist_to_origin(BallPoint(fr.final.user[u])));
      csv << "user," << u << ',' << stats.user_degree[u] << ',' << buf << '\n';
    }
    for (std::size_t i = 0; i < ds.interactions.num_items; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", dist_to_origin(BallPoint(fr.final.item_collab[i])));
      csv << "item," << i << ',' << stats.item_popularity[i] << ',' << buf << '\n';
    }
  }
  outs.commit();
  log << "wrote " << outs.final_path("embeddings.txt").string() << " and "
      << outs.final_path("norm_vs_popularity.csv").string() << '\n';
}

}  // namespace hakg
