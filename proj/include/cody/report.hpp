#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cody/common.hpp"
#include "cody/config.hpp"
#include "cody/metrics.hpp"
#include "cody/plot.hpp"

namespace cody {

/// One discovered run directory: its config plus parsed metrics.
struct RunInfo {
  std::string dir;
  TrainConfig config;
  MetricsLog log;
};

inline std::vector<RunInfo> discover_runs(const std::vector<std::string>& roots) {
  namespace fs = std::filesystem;
  std::vector<RunInfo> runs;
  auto try_add = [&](const fs::path& dir) {
    const auto cfg = dir / "config.cfg";
    const auto csv = dir / "metrics.csv";
    if (fs::exists(cfg) && fs::exists(csv)) {
      RunInfo r;
      r.dir = dir.string();
      r.config = TrainConfig::load(cfg.string());
      r.log = MetricsLog::read(csv.string());
      runs.push_back(std::move(r));
    }
  };
  for (const auto& root : roots) {
    if (!fs::exists(root)) continue;
    try_add(root);
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_directory()) try_add(e.path());
  }
  return runs;
}

/// Eval return at a step mark: the last eval record at or before the mark.
inline bool eval_at_mark(const MetricsLog& log, long mark, double* out) {
  bool found = false;
  for (const auto& r : log.evals)
    if (r.env_step <= mark) {
      *out = r.mean_return;
      found = true;
    }
  return found;
}

struct ScoreCell {
  int seeds = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Aggregates runs by (env, ablation) and reports mean +- standard error of
/// the eval return at each step mark.
struct ReportTable {
  std::vector<long> marks;
  // key: env name -> ablation -> mark index -> cell
  std::map<std::string, std::map<std::string, std::vector<ScoreCell>>> rows;

  static ReportTable build(const std::vector<RunInfo>& runs, const std::vector<long>& marks) {
    ReportTable t;
    t.marks = marks;
    std::map<std::string, std::map<std::string, std::vector<std::vector<double>>>> samples;
    for (const auto& run : runs) {
      auto& vecs = samples[run.config.env_name][to_string(run.config.ablation)];
      vecs.resize(marks.size());
      for (std::size_t mi = 0; mi < marks.size(); ++mi) {
        double v = 0;
        if (eval_at_mark(run.log, marks[mi], &v)) vecs[mi].push_back(v);
      }
    }
    for (auto& [env, by_abl] : samples)
      for (auto& [abl, vecs] : by_abl) {
        auto& cells = t.rows[env][abl];
        cells.resize(marks.size());
        for (std::size_t mi = 0; mi < marks.size(); ++mi) {
          const auto& v = vecs[mi];
          if (v.empty()) continue;
          ScoreCell c;
          c.seeds = static_cast<int>(v.size());
          for (double x : v) c.mean += x;
          c.mean /= static_cast<double>(v.size());
          double ss = 0;
          for (double x : v) ss += (x - c.mean) * (x - c.mean);
          c.stderr_ = v.size() > 1
                          ? std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                                std::sqrt(static_cast<double>(v.size()))
                          : 0.0;
          cells[mi] = c;
        }
      }
    return t;
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& [env, by_abl] : rows) {
      os << "== " << env << " ==\n";
      os << "steps";
      for (const auto& [abl, cells] : by_abl) os << "\t" << abl;
      os << "\n";
      for (std::size_t mi = 0; mi < marks.size(); ++mi) {
        os << marks[mi];
        for (const auto& [abl, cells] : by_abl) {
          if (mi < cells.size() && cells[mi].seeds > 0) {
            os << "\t" << std::round(cells[mi].mean * 10) / 10 << " +- "
               << std::round(cells[mi].stderr_ * 10) / 10 << " (" << cells[mi].seeds << ")";
          } else {
            os << "\t-";
          }
        }
        os << "\n";
      }
    }
    return os.str();
  }

  void save_csv(const std::string& path) const {
    std::ofstream os(path);
    check(os.good(), "report: cannot write " + path);
    os << "env,ablation,steps,seeds,mean_return,stderr\n";
    for (const auto& [env, by_abl] : rows)
      for (const auto& [abl, cells] : by_abl)
        for (std::size_t mi = 0; mi < marks.size(); ++mi)
          if (mi < cells.size() && cells[mi].seeds > 0)
            os << env << ',' << abl << ',' << marks[mi] << ',' << cells[mi].seeds << ','
               << cells[mi].mean << ',' << cells[mi].stderr_ << "\n";
  }
};

/// Mean learning curve with a +-1 standard error band across seeds, linearly
/// interpolating each seed's eval curve onto the union of eval steps.
struct CurveStats {
  std::vector<double> steps, mean, lo, hi;
};

inline CurveStats aggregate_curves(const std::vector<const MetricsLog*>& logs) {
  std::set<long> step_set;
  for (const auto* log : logs)
    for (const auto& r : log->evals) step_set.insert(r.env_step);
  CurveStats out;
  for (long s : step_set) {
    std::vector<double> vals;
    for (const auto* log : logs) {
      double v = 0;
      if (eval_at_mark(*log, s, &v)) vals.push_back(v);
    }
    if (vals.empty()) continue;
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double ss = 0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double se = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) /
                                            std::sqrt(static_cast<double>(vals.size()))
                                      : 0.0;
    out.steps.push_back(static_cast<double>(s));
    out.mean.push_back(mean);
    out.lo.push_back(mean - se);
    out.hi.push_back(mean + se);
  }
  return out;
}

/// Emits per-env learning-curve plots (one series per ablation, mean +- SE
/// band over seeds) plus the score table.
inline void write_report(const std::vector<RunInfo>& runs, const std::vector<long>& marks,
                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  check(!runs.empty(), "report: no runs found");

  const ReportTable table = ReportTable::build(runs, marks);
  table.save_csv((fs::path(out_dir) / "table.csv").string());
  std::ofstream txt((fs::path(out_dir) / "table.txt").string());
  txt << table.to_text();

  std::map<std::string, std::map<std::string, std::vector<const MetricsLog*>>> grouped;
  for (const auto& run : runs)
    grouped[run.config.env_name][to_string(run.config.ablation)].push_back(&run.log);
  for (const auto& [env, by_abl] : grouped) {
    LinePlot plot("eval return: " + env, "env steps", "mean return");
    for (const auto& [abl, logs] : by_abl) {
      const CurveStats c = aggregate_curves(logs);
      if (c.steps.empty()) continue;
      LinePlot::Series s;
      s.label = abl + " (" + std::to_string(logs.size()) + " seeds)";
      s.x = c.steps;
      s.y = c.mean;
      s.band_lo = c.lo;
      s.band_hi = c.hi;
      plot.add_series(std::move(s));
    }
    plot.save((fs::path(out_dir) / ("curves_" + env + ".svg")).string());
  }
}

}  // namespace cody
