#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cody/codyloss.hpp"
#include "cody/common.hpp"

namespace cody {

struct EvalRecord {
  long env_step = 0;
  double mean_return = 0.0;
  double return_std = 0.0;
  double wallclock_ms_per_1k = 0.0;
};

/// Append-only CSV with one fixed schema shared by train and eval rows.
/// Train rows leave episode_return empty; eval rows leave the losses empty.
/// Each row is written with a single unbuffered call so concurrent readers
/// never see a torn line.
class MetricsWriter {
 public:
  static constexpr const char* kHeader =
      "step,episode_return,l_pred,l_tmi,l_mvmi,l_cody,critic_loss,actor_loss,temperature,"
      "wallclock_ms_per_1k_steps";

  MetricsWriter() = default;
  explicit MetricsWriter(const std::string& path) { open(path); }

  void open(const std::string& path) {
    os_.open(path, std::ios::app);
    check(os_.good(), "metrics: cannot open " + path);
    os_.seekp(0, std::ios::end);
    if (os_.tellp() == 0) {
      os_ << kHeader << "\n";
      os_.flush();
    }
  }

  bool is_open() const { return os_.is_open(); }

  template <typename S>
  void train_row(long step, const LossBundle<S>& b) {
    if (!os_.is_open()) return;
    std::ostringstream line;
    line << step << ",," << fmt(b.pred) << ',' << fmt(b.tmi) << ',' << fmt(b.mvmi) << ','
         << fmt(b.cody) << ',' << fmt(b.critic) << ',' << fmt(b.actor) << ','
         << fmt(b.temperature) << ",\n";
    os_ << line.str();
  }

  void eval_row(const EvalRecord& r) {
    if (!os_.is_open()) return;
    std::ostringstream line;
    line << r.env_step << ',' << fmt(r.mean_return) << ",,,,,,,," << fmt(r.wallclock_ms_per_1k)
         << "\n";
    os_ << line.str();
    os_.flush();
  }

  void flush() {
    if (os_.is_open()) os_.flush();
  }

 private:
  template <typename T>
  static std::string fmt(T v) {
    std::ostringstream os;
    os << std::setprecision(9) << static_cast<double>(v);
    return os.str();
  }

  std::ofstream os_;
};

/// Parsed view of a metrics CSV, used by evaluation and reporting.
struct MetricsLog {
  struct TrainRow {
    long step;
    double pred, tmi, mvmi, cody, critic, actor, temperature;
  };
  std::vector<TrainRow> train;
  std::vector<EvalRecord> evals;

  static MetricsLog read(const std::string& path) {
    std::ifstream is(path);
    check(is.good(), "metrics: cannot read " + path);
    MetricsLog log;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      cells.resize(10);
      if (!cells[1].empty()) {
        EvalRecord r;
        r.env_step = std::stol(cells[0]);
        r.mean_return = std::stod(cells[1]);
        r.wallclock_ms_per_1k = cells[9].empty() ? 0.0 : std::stod(cells[9]);
        log.evals.push_back(r);
      } else if (!cells[2].empty()) {
        TrainRow r{};
        r.step = std::stol(cells[0]);
        r.pred = std::stod(cells[2]);
        r.tmi = std::stod(cells[3]);
        r.mvmi = std::stod(cells[4]);
        r.cody = std::stod(cells[5]);
        r.critic = std::stod(cells[6]);
        r.actor = std::stod(cells[7]);
        r.temperature = std::stod(cells[8]);
        log.train.push_back(r);
      }
    }
    return log;
  }
};

}  // namespace cody
