#pragma once

// Run configuration: a `key = value` file (with `#` comments) plus command
// line overrides. Unknown keys and unparsable values are rejected before any
// work starts.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hakg/data.hpp"
#include "hakg/error.hpp"
#include "hakg/model.hpp"
#include "hakg/training.hpp"

namespace hakg {

struct RunConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  std::filesystem::path checkpoint;  // empty: <out_dir>/checkpoint.txt
  std::uint64_t seed = 2022;
  PrepConfig prep;
  ModelConfig model;
  TrainConfig train;

  std::filesystem::path checkpoint_path() const {
    return checkpoint.empty() ? out_dir / "checkpoint.txt" : checkpoint;
  }

  /// Copies the shared seed into every component.
  void propagate_seed() {
    prep.seed = seed;
    model.seed = seed;
    train.seed = seed;
  }

  void validate() const {
    model.validate();
    train.validate();
    const auto& r = prep.ratios;
    if (std::abs(r.train + r.valid + r.test - 1.0) > 1e-9 || r.train <= 0.0 || r.valid < 0.0 || r.test < 0.0)
      throw ConfigError("split ratios must be non-negative, with positive train, and sum to 1");
    if (!(prep.hier.krackhardt_threshold >= 0.0 && prep.hier.krackhardt_threshold <= 1.0))
      throw ConfigError("krackhardt_threshold must lie in [0, 1]");
  }
};

namespace detail {

template <class U>
U parse_number(std::string_view key, std::string_view s) {
  U v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(s) + "' for key '" + std::string(key) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(s) + "' for key '" + std::string(key) + "'");
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ConfigKey {
  const char* name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class U, class Member>
ConfigKey number_key(const char* name, Member member) {
  return {name,
          [name, member](RunConfig& c, std::string_view v) { member(c) = parse_number<U>(name, v); },
          [member](const RunConfig& c) {
            RunConfig copy = c;
            if constexpr (std::is_floating_point_v<U>) {
              return fmt_double(member(copy));
            } else {
              return std::to_string(member(copy));
            }
          }};
}

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back({"data_dir", [](RunConfig& c, std::string_view v) { c.data_dir = std::string(v); },
                 [](const RunConfig& c) { return c.data_dir.string(); }});
    k.push_back({"out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
                 [](const RunConfig& c) { return c.out_dir.string(); }});
    k.push_back({"checkpoint", [](RunConfig& c, std::string_view v) { c.checkpoint = std::string(v); },
                 [](const RunConfig& c) { return c.checkpoint_path().string(); }});
    k.push_back(number_key<std::uint64_t>("seed", [](RunConfig& c) -> auto& { return c.seed; }));
    k.push_back(number_key<std::size_t>("dim", [](RunConfig& c) -> auto& { return c.model.dim; }));
    k.push_back(number_key<std::size_t>("layers", [](RunConfig& c) -> auto& { return c.model.layers; }));
    k.push_back(number_key<double>("lambda", [](RunConfig& c) -> auto& { return c.model.angle_weight; }));
    k.push_back(number_key<double>("mask_prob", [](RunConfig& c) -> auto& { return c.model.mask_prob; }));
    k.push_back(number_key<double>("cone_k", [](RunConfig& c) -> auto& { return c.model.geometry.cone_K; }));
    k.push_back(number_key<double>("ball_eps", [](RunConfig& c) -> auto& { return c.model.geometry.ball_eps; }));
    k.push_back(
        number_key<double>("min_cone_norm", [](RunConfig& c) -> auto& { return c.model.geometry.min_cone_norm; }));
    k.push_back({"kg_log_at_origin",
                 [](RunConfig& c, std::string_view v) { c.model.kg_log_at_origin = parse_bool("kg_log_at_origin", v); },
                 [](const RunConfig& c) { return std::string(c.model.kg_log_at_origin ? "true" : "false"); }});
    k.push_back(number_key<double>("lr", [](RunConfig& c) -> auto& { return c.train.learning_rate; }));
    k.push_back(number_key<std::size_t>("batch_size", [](RunConfig& c) -> auto& { return c.train.batch_size; }));
    k.push_back(number_key<std::size_t>("negatives", [](RunConfig& c) -> auto& { return c.train.num_negatives; }));
    k.push_back(number_key<double>("margin", [](RunConfig& c) -> auto& { return c.train.margin; }));
    k.push_back(number_key<std::size_t>("epochs", [](RunConfig& c) -> auto& { return c.train.max_epochs; }));
    k.push_back(number_key<std::size_t>("patience", [](RunConfig& c) -> auto& { return c.train.patience; }));
    k.push_back(number_key<std::size_t>("k", [](RunConfig& c) -> auto& { return c.train.eval_k; }));
    k.push_back(number_key<std::size_t>("threads", [](RunConfig& c) -> auto& { return c.train.threads; }));
    k.push_back(number_key<double>("angle_sample_fraction",
                                   [](RunConfig& c) -> auto& { return c.train.angle_sample_fraction; }));
    k.push_back({"monitor",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "valid") {
                     c.train.monitor = MonitorSplit::valid;
                   } else if (v == "test") {
                     c.train.monitor = MonitorSplit::test;
                   } else {
                     throw ConfigError("monitor must be 'valid' or 'test'");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.train.monitor == MonitorSplit::valid ? "valid" : "test");
                 }});
    k.push_back({"hier_mode", [](RunConfig& c, std::string_view v) { c.prep.hier.mode = parse_hier_mode(v); },
                 [](const RunConfig& c) { return to_string(c.prep.hier.mode); }});
    k.push_back(number_key<double>("krackhardt_threshold",
                                   [](RunConfig& c) -> auto& { return c.prep.hier.krackhardt_threshold; }));
    k.push_back(number_key<std::size_t>("core_k", [](RunConfig& c) -> auto& { return c.prep.core_k; }));
    k.push_back(number_key<std::size_t>("hops", [](RunConfig& c) -> auto& { return c.prep.hops; }));
    k.push_back(number_key<double>("train_ratio", [](RunConfig& c) -> auto& { return c.prep.ratios.train; }));
    k.push_back(number_key<double>("valid_ratio", [](RunConfig& c) -> auto& { return c.prep.ratios.valid; }));
    k.push_back(number_key<double>("test_ratio", [](RunConfig& c) -> auto& { return c.prep.ratios.test; }));
    return k;
  }();
  return keys;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Sets one key; throws ConfigError for unknown keys or bad values.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : detail::config_keys()) {
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

/// Applies a `key = value` file onto `cfg`.
inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    try {
      set_config_value(cfg, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

/// Every key with its effective value, in a fixed order; re-reading the
/// output with apply_config_file reproduces `cfg`.
inline void write_resolved_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& k : detail::config_keys()) out << k.name << " = " << k.get(cfg) << '\n';
}

}  // namespace hakg
