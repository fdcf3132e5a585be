#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cody/common.hpp"

namespace cody {

enum class Ablation { full, non_tem, non_pred, non_mv };

inline std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::non_tem: return "non_tem";
    case Ablation::non_pred: return "non_pred";
    case Ablation::non_mv: return "non_mv";
  }
  return "full";
}

inline Ablation ablation_from_string(const std::string& s) {
  if (s == "full") return Ablation::full;
  if (s == "non_tem") return Ablation::non_tem;
  if (s == "non_pred") return Ablation::non_pred;
  if (s == "non_mv") return Ablation::non_mv;
  throw ConfigError("unknown ablation: " + s + " (expected full|non_tem|non_pred|non_mv)");
}

/// All run hyperparameters. Defaults follow the shared- and per-task tables;
/// everything can be overridden from a flat key=value file or CLI flags.
struct TrainConfig {
  std::string env_name = "point_mass";
  std::uint64_t seed = 1;
  long total_env_steps = 100000;
  long init_steps = 1000;
  int batch_size = 256;
  int action_repeat = 4;
  int image_size = 84;
  int frame_stack = 3;
  double discount = 0.99;
  double lr_actor = 1e-3;
  double lr_critic = 1e-3;
  double lr_encoder = 1e-5;
  double q_ema = 0.01;
  double encoder_ema = 0.05;
  int critic_target_update_freq = 2;
  double init_temperature = 0.1;
  double lambda_tmi = 100.0;
  double eta_pred = 1000.0;
  Ablation ablation = Ablation::full;
  long eval_interval = 10000;
  int eval_episodes = 10;

  // Architecture (defaults per the reference setup).
  int embed_dim = 50;
  int action_embed_dim = 16;
  int action_hidden = 512;
  int transition_hidden = 1024;
  int critic_hidden = 1024;
  int conv_channels = 32;
  std::vector<int> conv_strides = {1, 1, 1, 1};
  int conv_pad = 0;
  bool encoder_tanh = false;

  // Augmentation / SAC plumbing.
  int max_shift = 4;
  double temperature_lr = 1e-4;
  bool learn_temperature = true;
  bool checkpoint_with_buffer = false;
  long replay_capacity = 100000;

  void validate() const {
    if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("discount must be in (0,1)");
    if (!(q_ema >= 0.0 && q_ema < 1.0) && q_ema != 1.0)
      throw ConfigError("q_ema must be in [0,1]");
    if (!(encoder_ema >= 0.0 && encoder_ema < 1.0) && encoder_ema != 1.0)
      throw ConfigError("encoder_ema must be in [0,1]");
    if (lambda_tmi < 0.0 || eta_pred < 0.0) throw ConfigError("lambda/eta must be >= 0");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (in-batch negatives)");
    if (frame_stack < 1) throw ConfigError("frame_stack must be >= 1");
    if (image_size < 8) throw ConfigError("image_size too small");
    if (!(max_shift >= 0 && max_shift < image_size / 2))
      throw ConfigError("max_shift must satisfy 0 <= max_shift < image_size/2");
    if (action_repeat < 1) throw ConfigError("action_repeat must be >= 1");
    if (replay_capacity < 1) throw ConfigError("replay_capacity must be >= 1");
    if (conv_strides.size() != 4) throw ConfigError("conv_strides needs 4 entries");
    if (conv_pad < 0 || conv_pad > 1) throw ConfigError("conv_pad must be 0 or 1");
    if (init_steps < 0 || total_env_steps < 0) throw ConfigError("negative step counts");
    if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  }

  std::map<std::string, std::string> to_kv() const {
    std::map<std::string, std::string> kv;
    auto put = [&](const std::string& k, auto v) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      kv[k] = os.str();
    };
    put("env_name", env_name);
    put("seed", seed);
    put("total_env_steps", total_env_steps);
    put("init_steps", init_steps);
    put("batch_size", batch_size);
    put("action_repeat", action_repeat);
    put("image_size", image_size);
    put("frame_stack", frame_stack);
    put("discount", discount);
    put("lr_actor", lr_actor);
    put("lr_critic", lr_critic);
    put("lr_encoder", lr_encoder);
    put("q_ema", q_ema);
    put("encoder_ema", encoder_ema);
    put("critic_target_update_freq", critic_target_update_freq);
    put("init_temperature", init_temperature);
    put("lambda", lambda_tmi);
    put("eta", eta_pred);
    put("ablation", to_string(ablation));
    put("eval_interval", eval_interval);
    put("eval_episodes", eval_episodes);
    put("embed_dim", embed_dim);
    put("action_embed_dim", action_embed_dim);
    put("action_hidden", action_hidden);
    put("transition_hidden", transition_hidden);
    put("critic_hidden", critic_hidden);
    put("conv_channels", conv_channels);
    put("conv_pad", conv_pad);
    {
      std::ostringstream os;
      for (std::size_t i = 0; i < conv_strides.size(); ++i)
        os << (i ? "," : "") << conv_strides[i];
      kv["conv_strides"] = os.str();
    }
    put("encoder_tanh", encoder_tanh ? 1 : 0);
    put("max_shift", max_shift);
    put("temperature_lr", temperature_lr);
    put("learn_temperature", learn_temperature ? 1 : 0);
    put("checkpoint_with_buffer", checkpoint_with_buffer ? 1 : 0);
    put("replay_capacity", replay_capacity);
    return kv;
  }

  void set(const std::string& key, const std::string& value) {
    auto as_long = [&] { return std::stol(value); };
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };
    auto as_bool = [&] { return value == "1" || value == "true" || value == "on"; };
    if (key == "env_name") env_name = value;
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "total_env_steps") total_env_steps = as_long();
    else if (key == "init_steps") init_steps = as_long();
    else if (key == "batch_size") batch_size = as_int();
    else if (key == "action_repeat") action_repeat = as_int();
    else if (key == "image_size") image_size = as_int();
    else if (key == "frame_stack") frame_stack = as_int();
    else if (key == "discount") discount = as_double();
    else if (key == "lr_actor") lr_actor = as_double();
    else if (key == "lr_critic") lr_critic = as_double();
    else if (key == "lr_encoder") lr_encoder = as_double();
    else if (key == "q_ema") q_ema = as_double();
    else if (key == "encoder_ema") encoder_ema = as_double();
    else if (key == "critic_target_update_freq") critic_target_update_freq = as_int();
    else if (key == "init_temperature") init_temperature = as_double();
    else if (key == "lambda") lambda_tmi = as_double();
    else if (key == "eta") eta_pred = as_double();
    else if (key == "ablation") ablation = ablation_from_string(value);
    else if (key == "eval_interval") eval_interval = as_long();
    else if (key == "eval_episodes") eval_episodes = as_int();
    else if (key == "embed_dim") embed_dim = as_int();
    else if (key == "action_embed_dim") action_embed_dim = as_int();
    else if (key == "action_hidden") action_hidden = as_int();
    else if (key == "transition_hidden") transition_hidden = as_int();
    else if (key == "critic_hidden") critic_hidden = as_int();
    else if (key == "conv_channels") conv_channels = as_int();
    else if (key == "conv_pad") conv_pad = as_int();
    else if (key == "conv_strides") {
      conv_strides.clear();
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) conv_strides.push_back(std::stoi(tok));
    } else if (key == "encoder_tanh") encoder_tanh = as_bool();
    else if (key == "max_shift") max_shift = as_int();
    else if (key == "temperature_lr") temperature_lr = as_double();
    else if (key == "learn_temperature") learn_temperature = as_bool();
    else if (key == "checkpoint_with_buffer") checkpoint_with_buffer = as_bool();
    else if (key == "replay_capacity") replay_capacity = as_long();
    else throw ConfigError("unknown config key: " + key);
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    check(os.good(), "cannot write config: " + path);
    for (const auto& [k, v] : to_kv()) os << k << " = " << v << "\n";
  }

  static TrainConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is.good()) throw ConfigError("cannot read config: " + path);
    TrainConfig cfg;
    cfg.merge(is);
    return cfg;
  }

  void merge(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!key.empty()) set(key, value);
    }
  }
};

}  // namespace cody
