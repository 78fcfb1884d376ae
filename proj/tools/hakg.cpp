// hakg: command-line driver (stats / train / evaluate / export).

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hakg/hakg.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--data-dir", "data_dir", "Dataset directory"},
    {"--out-dir", "out_dir", "Output directory"},
    {"--checkpoint", "checkpoint", "Checkpoint path (default <out-dir>/checkpoint.txt)"},
    {"--seed", "seed", "Random seed"},
    {"--lr", "lr", "Adam learning rate"},
    {"--layers", "layers", "Propagation layers L"},
    {"--dim", "dim", "Embedding dimension"},
    {"--lambda", "lambda", "Angle-loss weight"},
    {"--margin", "margin", "Contrastive margin m"},
    {"--negatives", "negatives", "Negatives per positive"},
    {"--k", "k", "Top-K cutoff for recall/ndcg"},
    {"--epochs", "epochs", "Maximum epochs"},
    {"--patience", "patience", "Early-stopping patience"},
    {"--hier-mode", "hier_mode", "given | item_connected | krackhardt"},
    {"--threads", "threads", "Evaluation worker threads"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchy-aware knowledge-graph recommender in the Poincare ball"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const auto& f : kFlags) {
      sub->add_option_function<std::string>(
          f.flag, [&overrides, key = std::string(f.key)](const std::string& v) { overrides[key] = v; }, f.help);
    }
  };
  auto* stats = app.add_subcommand("stats", "Dataset statistics and degree distribution");
  auto* train = app.add_subcommand("train", "Train, checkpoint and evaluate");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on the test split");
  auto* exp = app.add_subcommand("export", "Export embeddings and the norm-vs-popularity table");
  for (auto* s : {stats, train, evaluate, exp}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    hakg::RunConfig cfg;
    if (!config_path.empty()) hakg::apply_config_file(cfg, config_path);
    for (const auto& [key, value] : overrides) hakg::set_config_value(cfg, key, value);
    cfg.propagate_seed();
    cfg.validate();

    if (stats->parsed()) {
      hakg::cmd_stats(cfg, std::cout);
    } else if (train->parsed()) {
      hakg::cmd_train(cfg, std::cout);
    } else if (evaluate->parsed()) {
      hakg::cmd_evaluate(cfg, std::cout);
    } else if (exp->parsed()) {
      hakg::cmd_export(cfg, std::cout);
    }
  } catch (const hakg::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
