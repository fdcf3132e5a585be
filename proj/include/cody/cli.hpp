#pragma once

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cody/evalbench.hpp"
#include "cody/report.hpp"
#include "cody/trainer.hpp"

namespace cody::cli {

using Real = float;

inline std::string make_run_dir(const std::string& out_root, const TrainConfig& cfg,
                                const std::string& kind) {
  namespace fs = std::filesystem;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
  std::ostringstream base;
  base << stamp << '_' << kind << '_' << cfg.env_name << '_' << to_string(cfg.ablation) << "_seed"
       << cfg.seed;
  fs::path dir = fs::path(out_root) / base.str();
  int suffix = 1;
  while (fs::exists(dir)) dir = fs::path(out_root) / (base.str() + "_" + std::to_string(++suffix));
  fs::create_directories(dir);
  return dir.string();
}

struct CommonTrainFlags {
  std::optional<std::string> env, ablation, config_file;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::optional<double> lambda, eta;
  std::optional<int> image_size, batch_size, action_repeat;
  std::vector<std::string> sets;
  std::string out_root = "runs";

  void attach(CLI::App* cmd) {
    cmd->add_option("--env", env, "environment name");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--steps", steps, "total env steps");
    cmd->add_option("--ablation", ablation, "full|non_tem|non_pred|non_mv");
    cmd->add_option("--lambda", lambda, "temporal loss weight");
    cmd->add_option("--eta", eta, "prediction loss weight");
    cmd->add_option("--image-size", image_size, "rendered image side");
    cmd->add_option("--batch-size", batch_size, "minibatch size");
    cmd->add_option("--action-repeat", action_repeat, "underlying steps per agent step");
    cmd->add_option("--config", config_file, "flat key=value config file");
    cmd->add_option("--set", sets, "extra key=value overrides")->take_all();
    cmd->add_option("--out", out_root, "output root directory");
  }

  TrainConfig build() const {
    TrainConfig cfg;
    if (config_file) cfg = TrainConfig::load(*config_file);
    if (env) cfg.env_name = *env;
    if (seed) cfg.seed = *seed;
    if (steps) cfg.total_env_steps = *steps;
    if (ablation) cfg.ablation = ablation_from_string(*ablation);
    if (lambda) cfg.lambda_tmi = *lambda;
    if (eta) cfg.eta_pred = *eta;
    if (image_size) cfg.image_size = *image_size;
    if (batch_size) cfg.batch_size = *batch_size;
    if (action_repeat) cfg.action_repeat = *action_repeat;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    make_env(cfg.env_name, EnvOptions{});  // reject unknown env names as a usage error
    return cfg;
  }
};

inline int cmd_train(const CommonTrainFlags& flags) {
  const TrainConfig cfg = flags.build();
  const std::string run_dir = make_run_dir(flags.out_root, cfg, "train");
  std::cout << "run_dir: " << run_dir << std::endl;
  TrainSession<Real> session(cfg);
  session.train_loop(run_dir);
  std::cout << "done: " << session.env_steps() << " env steps, " << session.grad_steps()
            << " gradient steps" << std::endl;
  return 0;
}

inline int cmd_transfer(const CommonTrainFlags& flags, const std::string& source_ckpt,
                        bool with_scratch) {
  namespace fs = std::filesystem;
  if (!fs::exists(source_ckpt)) throw ConfigError("missing checkpoint: " + source_ckpt);
  const TrainConfig cfg = flags.build();

  const std::string transfer_dir = make_run_dir(flags.out_root, cfg, "transfer");
  std::cout << "run_dir: " << transfer_dir << std::endl;
  auto session = make_transfer_session<Real>(source_ckpt, cfg);
  session->train_loop(transfer_dir);

  if (with_scratch) {
    const std::string scratch_dir = make_run_dir(flags.out_root, cfg, "scratch");
    std::cout << "scratch_dir: " << scratch_dir << std::endl;
    TrainSession<Real> scratch(cfg);
    scratch.train_loop(scratch_dir);

    const MetricsLog tlog = MetricsLog::read((fs::path(transfer_dir) / "metrics.csv").string());
    const MetricsLog slog = MetricsLog::read((fs::path(scratch_dir) / "metrics.csv").string());
    LinePlot plot("transfer vs scratch: " + cfg.env_name, "env steps", "mean return");
    auto to_series = [](const MetricsLog& log, const std::string& label) {
      LinePlot::Series s;
      s.label = label;
      for (const auto& r : log.evals) {
        s.x.push_back(static_cast<double>(r.env_step));
        s.y.push_back(r.mean_return);
      }
      return s;
    };
    plot.add_series(to_series(tlog, "frozen-encoder transfer"));
    plot.add_series(to_series(slog, "from scratch"));
    plot.save((fs::path(transfer_dir) / "transfer_vs_scratch.svg").string());
  }
  return 0;
}

inline int cmd_report(const std::vector<std::string>& run_roots, const std::string& marks_csv,
                      const std::string& out_dir) {
  std::vector<long> marks;
  std::stringstream ss(marks_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) marks.push_back(std::stol(tok));
  check(!marks.empty(), "report: no step marks given");
  const auto runs = discover_runs(run_roots);
  if (runs.empty()) throw std::runtime_error("report: no runs found under the given directories");
  write_report(runs, marks, out_dir);
  std::cout << "report written to " << out_dir << std::endl;
  return 0;
}

inline int cmd_export(const std::string& ckpt, std::optional<std::string> env_name, int n,
                      int grid_rows, int grid_cols, const std::string& out_dir,
                      std::uint64_t seed) {
  auto session = TrainSession<Real>::restore(ckpt);
  TrainConfig cfg = session->config();
  if (env_name) cfg.env_name = *env_name;
  EnvOptions eopts;
  eopts.image_size = cfg.image_size;
  eopts.frame_stack = cfg.frame_stack;
  eopts.action_repeat = cfg.action_repeat;
  auto env = make_env(cfg.env_name, eopts);
  Rng rng = Rng::substream(seed, "export");
  auto dump = export_embeddings(session->policy(), session->encoder(), *env, n, rng);
  const auto proj = pca_project_2d(dump.embeddings);
  const auto cells = grid_assign(proj, grid_rows, grid_cols);
  save_embedding_dump(dump, out_dir, &cells, grid_rows, grid_cols);
  std::cout << "embedding dump written to " << out_dir << std::endl;
  return 0;
}

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 usage error, 2 runtime failure.
inline int run(std::vector<std::string> args) {
  CLI::App app{"CoDy: contrastive-dynamics representation learning with SAC on pixels"};
  app.require_subcommand(1);

  CommonTrainFlags train_flags;
  auto* train = app.add_subcommand("train", "train an agent");
  train_flags.attach(train);

  CommonTrainFlags transfer_flags;
  std::string source_ckpt;
  bool with_scratch = false;
  auto* transfer = app.add_subcommand("transfer", "frozen-encoder transfer to a target task");
  transfer_flags.attach(transfer);
  transfer->add_option("--source-ckpt", source_ckpt, "source checkpoint")->required();
  transfer->add_flag("--with-scratch", with_scratch, "also run a from-scratch baseline and plot");

  std::vector<std::string> report_roots;
  std::string marks = "10000,30000";
  std::string report_out = "report";
  auto* report = app.add_subcommand("report", "aggregate seeds into tables and curves");
  report->add_option("--runs", report_roots, "run directories or roots")->required()->take_all();
  report->add_option("--marks", marks, "comma-separated step marks");
  report->add_option("--out", report_out, "report output directory");

  std::string export_ckpt, export_out = "embeddings";
  std::optional<std::string> export_env;
  int export_n = 400, grid_rows = 30, grid_cols = 20;
  std::uint64_t export_seed = 1;
  auto* exp = app.add_subcommand("export", "export embeddings with aligned states + thumbnails");
  exp->add_option("--ckpt", export_ckpt, "trained checkpoint")->required();
  exp->add_option("--env", export_env, "override env name");
  exp->add_option("--n", export_n, "number of observations");
  exp->add_option("--grid-rows", grid_rows, "grid rows for quantization");
  exp->add_option("--grid-cols", grid_cols, "grid cols for quantization");
  exp->add_option("--seed", export_seed, "rollout seed");
  exp->add_option("--out", export_out, "output directory");

  std::vector<char*> argv;
  std::vector<std::string> storage = std::move(args);
  storage.insert(storage.begin(), "cody");
  argv.reserve(storage.size());
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*train) return cmd_train(train_flags);
    if (*transfer) return cmd_transfer(transfer_flags, source_ckpt, with_scratch);
    if (*report) return cmd_report(report_roots, marks, report_out);
    if (*exp)
      return cmd_export(export_ckpt, export_env, export_n, grid_rows, grid_cols, export_out,
                        export_seed);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 1;
}

}  // namespace cody::cli
