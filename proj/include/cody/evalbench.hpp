#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cody/common.hpp"
#include "cody/rollout.hpp"
#include "cody/trainer.hpp"

namespace cody {

/// Frozen-encoder transfer: load the encoder from a source checkpoint, keep
/// it fixed (no gradient, no EMA), train fresh critics/policy/temperature on
/// the target task with the auxiliary losses disabled.
template <typename S>
std::unique_ptr<TrainSession<S>> make_transfer_session(const std::string& source_ckpt,
                                                       TrainConfig target_cfg) {
  auto session = std::make_unique<TrainSession<S>>(std::move(target_cfg), /*transfer_mode=*/true);
  session->load_frozen_encoder(source_ckpt);
  return session;
}

inline void write_thumbnail(const Frame& frame, ObsBatch& out, int row, int thumb) {
  // Box-filtered grayscale downscale.
  for (int ty = 0; ty < thumb; ++ty)
    for (int tx = 0; tx < thumb; ++tx) {
      const int y0 = ty * frame.height / thumb, y1 = std::max(y0 + 1, (ty + 1) * frame.height / thumb);
      const int x0 = tx * frame.width / thumb, x1 = std::max(x0 + 1, (tx + 1) * frame.width / thumb);
      long acc = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          acc += (frame.at(0, y, x) + frame.at(1, y, x) + frame.at(2, y, x)) / 3;
      out.at(row, 0, ty, tx) =
          static_cast<std::uint8_t>(acc / ((y1 - y0) * (x1 - x0)));
    }
}

/// Aligned arrays collected from policy rollouts: embeddings, the true
/// (internal) env states, and a small grayscale thumbnail of the newest frame.
template <typename S>
struct EmbeddingDump {
  Matrix<S> embeddings;       // (N, d)
  Matrix<double> states;      // (N, state_dim)
  ObsBatch thumbnails;        // (N, 1, thumb, thumb)
  int thumb_size = 16;
};

/// Rolls the (stochastic) policy and encodes every observation seen.
template <typename S>
EmbeddingDump<S> export_embeddings(const GaussianPolicy<S>& policy, const StateEncoder<S>& encoder,
                                   PixelEnv& env, int n, Rng& rng, int thumb_size = 16) {
  EmbeddingDump<S> dump;
  dump.thumb_size = thumb_size;
  const int d = encoder.embed_dim();
  const int sdim = static_cast<int>(env.internal_state().size());
  dump.embeddings.resize(n, d);
  dump.states.resize(n, sdim);
  dump.thumbnails.resize(n, 1, thumb_size, thumb_size);

  Observation obs = env.reset(rng);
  for (int i = 0; i < n; ++i) {
    const Matrix<S> z = encoder.forward(to_feature_map<S>(obs));
    dump.embeddings.row(i) = z.row(0);
    const auto st = env.internal_state();
    for (int k = 0; k < sdim; ++k) dump.states(i, k) = st[static_cast<std::size_t>(k)];
    write_thumbnail(env.render(), dump.thumbnails, i, thumb_size);

    auto s = policy.sample(z, rng);
    std::vector<double> act(static_cast<std::size_t>(s.action.cols()));
    for (Eigen::Index k = 0; k < s.action.cols(); ++k) act[static_cast<std::size_t>(k)] = s.action(0, k);
    StepResult sr = env.step(act);
    obs = sr.done ? env.reset(rng) : std::move(sr.obs);
  }
  return dump;
}

/// Default 2D projector for visualization: top-2 principal components.
template <typename S>
Matrix<double> pca_project_2d(const Matrix<S>& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Matrix<double> xd = x.template cast<double>();
  Eigen::RowVectorXd mean = xd.colwise().mean();
  xd.rowwise() -= mean;
  Eigen::MatrixXd cov = (xd.transpose() * xd) / std::max<double>(1.0, static_cast<double>(n - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Matrix<double> out(n, 2);
  // Eigenvalues ascend; take the last two columns.
  out.col(0) = xd * es.eigenvectors().col(d - 1);
  out.col(1) = d >= 2 ? Matrix<double>(xd * es.eigenvectors().col(d - 2)) : Matrix<double>::Zero(n, 1);
  return out;
}

/// Quantizes N projected points onto an R x C grid (one point per cell) by
/// greedy sorted-cost matching on squared displacement. Returns (row, col)
/// per point. A visualization aid; optimal transport is overkill here.
inline std::vector<std::pair<int, int>> grid_assign(const Matrix<double>& points2d, int rows,
                                                    int cols) {
  const Eigen::Index n = points2d.rows();
  check(n <= static_cast<Eigen::Index>(rows) * cols,
        "grid_assign: more points than grid cells");
  // Normalize points into [0, cols-1] x [0, rows-1]; degenerate ranges map to 0.
  Matrix<double> p = points2d;
  for (int k = 0; k < 2; ++k) {
    const double lo = p.col(k).minCoeff(), hi = p.col(k).maxCoeff();
    const double span = hi - lo;
    const double scale = (k == 0 ? cols - 1 : rows - 1);
    if (span > 0)
      p.col(k) = (p.col(k).array() - lo) / span * scale;
    else
      p.col(k).setZero();
  }
  struct Cand {
    double cost;
    int point, cell;
  };
  std::vector<Cand> cands;
  cands.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(rows) * cols);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double dx = p(i, 0) - c, dy = p(i, 1) - r;
        cands.push_back({dx * dx + dy * dy, static_cast<int>(i), r * cols + c});
      }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.point != b.point) return a.point < b.point;
    return a.cell < b.cell;
  });
  std::vector<std::pair<int, int>> assign(static_cast<std::size_t>(n), {-1, -1});
  std::vector<bool> point_done(static_cast<std::size_t>(n), false);
  std::vector<bool> cell_done(static_cast<std::size_t>(rows) * cols, false);
  Eigen::Index placed = 0;
  for (const Cand& c : cands) {
    if (placed == n) break;
    if (point_done[static_cast<std::size_t>(c.point)] || cell_done[static_cast<std::size_t>(c.cell)]) continue;
    point_done[static_cast<std::size_t>(c.point)] = true;
    cell_done[static_cast<std::size_t>(c.cell)] = true;
    assign[static_cast<std::size_t>(c.point)] = {c.cell / cols, c.cell % cols};
    ++placed;
  }
  return assign;
}

inline double grid_assignment_cost(const Matrix<double>& points2d,
                                   const std::vector<std::pair<int, int>>& assign, int rows,
                                   int cols) {
  Matrix<double> p = points2d;
  for (int k = 0; k < 2; ++k) {
    const double lo = p.col(k).minCoeff(), hi = p.col(k).maxCoeff();
    const double span = hi - lo;
    const double scale = (k == 0 ? cols - 1 : rows - 1);
    if (span > 0)
      p.col(k) = (p.col(k).array() - lo) / span * scale;
    else
      p.col(k).setZero();
  }
  double cost = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double dx = p(i, 0) - assign[static_cast<std::size_t>(i)].second;
    const double dy = p(i, 1) - assign[static_cast<std::size_t>(i)].first;
    cost += dx * dx + dy * dy;
  }
  return cost;
}

namespace detail {

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

struct SmoothnessResult {
  double spearman = 0.0;   // NaN when the embedding is degenerate
  bool degenerate = false;
};

/// Spearman rank correlation between pairwise true-state distances and
/// pairwise embedding distances over `pairs` sampled index pairs.
template <typename S>
SmoothnessResult smoothness_probe(const Matrix<S>& embeddings, const Matrix<double>& states,
                                  int pairs, Rng& rng) {
  check_shape(embeddings.rows() == states.rows(), "smoothness_probe: row mismatch");
  const int n = static_cast<int>(embeddings.rows());
  check(n >= 2, "smoothness_probe: need at least 2 rows");
  std::vector<double> ds, de;
  ds.reserve(static_cast<std::size_t>(pairs));
  de.reserve(static_cast<std::size_t>(pairs));
  for (int p = 0; p < pairs; ++p) {
    const int i = rng.uniform_int(0, n - 1);
    int j = rng.uniform_int(0, n - 2);
    if (j >= i) ++j;
    ds.push_back((states.row(i) - states.row(j)).norm());
    de.push_back((embeddings.row(i) - embeddings.row(j)).template cast<double>().norm());
  }
  SmoothnessResult out;
  const auto ra = detail::ranks(ds);
  const auto rb = detail::ranks(de);
  out.spearman = detail::pearson(ra, rb);
  if (std::isnan(out.spearman)) {
    out.degenerate = true;
    out.spearman = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

/// Null distribution for the probe: shuffle the embedding rows relative to
/// the states and recompute. Returns the requested percentile.
template <typename S>
double smoothness_null_percentile(const Matrix<S>& embeddings, const Matrix<double>& states,
                                  int pairs, int permutations, double percentile, Rng& rng) {
  std::vector<double> null;
  null.reserve(static_cast<std::size_t>(permutations));
  Matrix<S> shuffled = embeddings;
  std::vector<int> perm(static_cast<std::size_t>(embeddings.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  for (int p = 0; p < permutations; ++p) {
    for (int i = static_cast<int>(perm.size()) - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    for (Eigen::Index i = 0; i < embeddings.rows(); ++i)
      shuffled.row(i) = embeddings.row(perm[static_cast<std::size_t>(i)]);
    const auto r = smoothness_probe(shuffled, states, pairs, rng);
    if (!r.degenerate) null.push_back(r.spearman);
  }
  check(!null.empty(), "smoothness_null_percentile: all permutations degenerate");
  std::sort(null.begin(), null.end());
  const double pos = percentile / 100.0 * static_cast<double>(null.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, null.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return null[lo] * (1.0 - frac) + null[hi] * frac;
}

/// Writes the dump as one binary tensor container plus a JSON manifest.
template <typename S>
void save_embedding_dump(const EmbeddingDump<S>& dump, const std::string& dir,
                         const std::vector<std::pair<int, int>>* grid = nullptr,
                         int grid_rows = 0, int grid_cols = 0) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string bin_path = (fs::path(dir) / "embeddings.bin").string();
  std::ofstream os(bin_path, std::ios::binary);
  check(os.good(), "save_embedding_dump: cannot write " + bin_path);

  nlohmann::json manifest;
  manifest["format"] = "cody-embedding-dump";
  manifest["version"] = 1;
  std::size_t offset = 0;
  auto add_tensor = [&](const std::string& name, const std::string& dtype,
                        std::vector<long> shape, const char* data, std::size_t bytes) {
    os.write(data, static_cast<std::streamsize>(bytes));
    manifest["tensors"].push_back(
        {{"name", name}, {"dtype", dtype}, {"shape", shape}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  };
  {
    Matrix<float> emb = dump.embeddings.template cast<float>();
    add_tensor("embeddings", "f32", {emb.rows(), emb.cols()},
               reinterpret_cast<const char*>(emb.data()), sizeof(float) * static_cast<std::size_t>(emb.size()));
    add_tensor("states", "f64", {dump.states.rows(), dump.states.cols()},
               reinterpret_cast<const char*>(dump.states.data()),
               sizeof(double) * static_cast<std::size_t>(dump.states.size()));
    add_tensor("thumbnails", "u8",
               {dump.thumbnails.n, dump.thumbnails.height, dump.thumbnails.width},
               reinterpret_cast<const char*>(dump.thumbnails.pixels.data()),
               dump.thumbnails.pixels.size());
    if (grid) {
      std::vector<std::int32_t> cells;
      cells.reserve(grid->size() * 2);
      for (const auto& [r, c] : *grid) {
        cells.push_back(r);
        cells.push_back(c);
      }
      add_tensor("grid_cells", "i32", {static_cast<long>(grid->size()), 2},
                 reinterpret_cast<const char*>(cells.data()), cells.size() * 4);
      manifest["grid"] = {{"rows", grid_rows}, {"cols", grid_cols}};
    }
  }
  std::ofstream mos((fs::path(dir) / "manifest.json").string());
  mos << manifest.dump(2) << "\n";
}

}  // namespace cody
