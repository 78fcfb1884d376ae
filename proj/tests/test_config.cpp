#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "hakg/config.hpp"

TEST(Config, FileValuesAndComments) {
  const auto dir = fixtures::temp_dir("config");
  fixtures::write_file(dir / "run.cfg",
                       "# toy run\n"
                       "data_dir = /tmp/data\n"
                       "dim = 16   # small\n"
                       "lambda = 0.01\n"
                       "lr=0.005\n"
                       "\n"
                       "hier_mode = krackhardt\n"
                       "monitor = test\n"
                       "kg_log_at_origin = true\n");
  hakg::RunConfig cfg;
  hakg::apply_config_file(cfg, dir / "run.cfg");
  EXPECT_EQ(cfg.data_dir, "/tmp/data");
  EXPECT_EQ(cfg.model.dim, 16u);
  EXPECT_EQ(cfg.model.angle_weight, 0.01);
  EXPECT_EQ(cfg.train.learning_rate, 0.005);
  EXPECT_EQ(cfg.prep.hier.mode, hakg::HierMode::krackhardt);
  EXPECT_EQ(cfg.train.monitor, hakg::MonitorSplit::test);
  EXPECT_TRUE(cfg.model.kg_log_at_origin);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  hakg::RunConfig cfg;
  EXPECT_THROW(hakg::set_config_value(cfg, "learning_rate", "0.1"), hakg::ConfigError);
  EXPECT_THROW(hakg::set_config_value(cfg, "dim", "sixteen"), hakg::ConfigError);
  EXPECT_THROW(hakg::set_config_value(cfg, "dim", "-3"), hakg::ConfigError);
  EXPECT_THROW(hakg::set_config_value(cfg, "monitor", "train"), hakg::ConfigError);
  EXPECT_THROW(hakg::set_config_value(cfg, "kg_log_at_origin", "maybe"), hakg::ConfigError);

  const auto dir = fixtures::temp_dir("config_bad");
  fixtures::write_file(dir / "a.cfg", "dim = 8\nbogus = 1\n");
  try {
    hakg::apply_config_file(cfg, dir / "a.cfg");
    FAIL() << "expected ConfigError";
  } catch (const hakg::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  fixtures::write_file(dir / "b.cfg", "dim 8\n");
  EXPECT_THROW(hakg::apply_config_file(cfg, dir / "b.cfg"), hakg::ConfigError);
  EXPECT_THROW(hakg::apply_config_file(cfg, dir / "missing.cfg"), hakg::ConfigError);
}

TEST(Config, ValidationCatchesBadFields) {
  hakg::RunConfig cfg;
  hakg::set_config_value(cfg, "lambda", "-0.5");
  EXPECT_THROW(cfg.validate(), hakg::ConfigError);
  cfg = {};
  hakg::set_config_value(cfg, "train_ratio", "0.9");
  EXPECT_THROW(cfg.validate(), hakg::ConfigError);
  cfg = {};
  hakg::set_config_value(cfg, "margin", "0");
  EXPECT_THROW(cfg.validate(), hakg::ConfigError);
  cfg = {};
  hakg::set_config_value(cfg, "krackhardt_threshold", "1.5");
  EXPECT_THROW(cfg.validate(), hakg::ConfigError);
}

TEST(Config, ResolvedConfigRoundTrips) {
  hakg::RunConfig cfg;
  hakg::set_config_value(cfg, "dim", "24");
  hakg::set_config_value(cfg, "lr", "0.0003");
  hakg::set_config_value(cfg, "mask_prob", "0.3");
  hakg::set_config_value(cfg, "hier_mode", "given");
  hakg::set_config_value(cfg, "seed", "99");
  std::ostringstream first;
  hakg::write_resolved_config(first, cfg);

  const auto dir = fixtures::temp_dir("config_rt");
  fixtures::write_file(dir / "resolved.cfg", first.str());
  hakg::RunConfig back;
  hakg::apply_config_file(back, dir / "resolved.cfg");
  std::ostringstream second;
  hakg::write_resolved_config(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.model.dim, 24u);
  EXPECT_EQ(back.train.learning_rate, 0.0003);
  EXPECT_NE(first.str().find("seed = 99"), std::string::npos);
}

TEST(Config, SeedPropagation) {
  hakg::RunConfig cfg;
  cfg.seed = 5;
  cfg.propagate_seed();
  EXPECT_EQ(cfg.prep.seed, 5u);
  EXPECT_EQ(cfg.model.seed, 5u);
  EXPECT_EQ(cfg.train.seed, 5u);
  EXPECT_EQ(cfg.checkpoint_path(), std::filesystem::path("out") / "checkpoint.txt");
}
