#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cody/config.hpp"

using cody::Ablation;
using cody::ConfigError;
using cody::TrainConfig;

TEST_CASE("defaults match the shared hyperparameter table") {
  TrainConfig cfg;
  REQUIRE(cfg.replay_capacity == 100000);
  REQUIRE(cfg.init_steps == 1000);
  REQUIRE(cfg.q_ema == 0.01);
  REQUIRE(cfg.critic_target_update_freq == 2);
  REQUIRE(cfg.lr_actor == 1e-3);
  REQUIRE(cfg.lr_critic == 1e-3);
  REQUIRE(cfg.lr_encoder == 1e-5);
  REQUIRE(cfg.encoder_ema == 0.05);
  REQUIRE(cfg.discount == 0.99);
  REQUIRE(cfg.init_temperature == 0.1);
  REQUIRE(cfg.lambda_tmi == 100.0);
  REQUIRE(cfg.eta_pred == 1000.0);
  REQUIRE(cfg.image_size == 84);
  REQUIRE(cfg.frame_stack == 3);
  REQUIRE(cfg.max_shift == 4);
  REQUIRE(cfg.embed_dim == 50);
  REQUIRE(cfg.action_embed_dim == 16);
  REQUIRE(cfg.action_hidden == 512);
  REQUIRE(cfg.transition_hidden == 1024);
  REQUIRE(cfg.critic_hidden == 1024);
  REQUIRE(cfg.conv_channels == 32);
  REQUIRE(cfg.eval_interval == 10000);
  REQUIRE(cfg.eval_episodes == 10);
  REQUIRE(cfg.ablation == Ablation::full);
  REQUIRE_NOTHROW(cfg.validate());
}

TEST_CASE("config round-trips through a key=value file") {
  TrainConfig cfg;
  cfg.env_name = "pendulum";
  cfg.seed = 42;
  cfg.lambda_tmi = 7.5;
  cfg.ablation = Ablation::non_pred;
  cfg.conv_strides = {2, 2, 1, 1};
  const std::string path = (std::filesystem::temp_directory_path() / "cody_cfg_test.cfg").string();
  cfg.save(path);
  const TrainConfig loaded = TrainConfig::load(path);
  REQUIRE(loaded.env_name == "pendulum");
  REQUIRE(loaded.seed == 42);
  REQUIRE(loaded.lambda_tmi == 7.5);
  REQUIRE(loaded.ablation == Ablation::non_pred);
  REQUIRE(loaded.conv_strides == std::vector<int>{2, 2, 1, 1});
  std::remove(path.c_str());
}

TEST_CASE("file parsing handles comments and blanks") {
  TrainConfig cfg;
  std::istringstream is("# a comment\n\nseed = 9\nlambda=3.5 # trailing\n");
  cfg.merge(is);
  REQUIRE(cfg.seed == 9);
  REQUIRE(cfg.lambda_tmi == 3.5);
}

TEST_CASE("invariant violations are rejected") {
  TrainConfig cfg;
  cfg.discount = 1.0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 1;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lambda_tmi = -1;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.max_shift = 50;  // >= image_size / 2
  cfg.image_size = 84;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.encoder_ema = 1.5;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("unknown keys and ablations are usage errors") {
  TrainConfig cfg;
  REQUIRE_THROWS_AS(cfg.set("no_such_key", "1"), ConfigError);
  REQUIRE_THROWS_AS(cody::ablation_from_string("bogus"), ConfigError);
}
