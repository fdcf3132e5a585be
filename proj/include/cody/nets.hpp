#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cody/common.hpp"
#include "cody/nn.hpp"
#include "cody/param.hpp"
#include "cody/replay.hpp"
#include "cody/rng.hpp"

namespace cody {

/// Converts a uint8 observation batch to float features in [0, 1] laid out
/// for convolution.
template <typename S>
FeatureMap<S> to_feature_map(const ObsBatch& b) {
  FeatureMap<S> f;
  f.resize(b.n, b.channels, b.height, b.width);
  constexpr S inv = S(1) / S(255);
  for (int ni = 0; ni < b.n; ++ni)
    for (int c = 0; c < b.channels; ++c)
      for (int y = 0; y < b.height; ++y) {
        const std::uint8_t* src =
            b.pixels.data() + ((static_cast<std::size_t>(ni) * b.channels + c) * b.height + y) * b.width;
        const Eigen::Index row = (static_cast<Eigen::Index>(ni) * b.height + y) * b.width;
        for (int x = 0; x < b.width; ++x) f.m(row + x, c) = static_cast<S>(src[x]) * inv;
      }
  return f;
}

template <typename S>
FeatureMap<S> to_feature_map(const Observation& o) {
  ObsBatch b;
  b.resize(1, o.channels, o.height, o.width);
  b.set_row(0, o);
  return to_feature_map<S>(b);
}

struct EncoderArch {
  int image_size = 84;
  int in_channels = 9;  // 3 * frame_stack
  int conv_channels = 32;
  std::array<int, 4> strides = {1, 1, 1, 1};
  int conv_pad = 0;
  int embed_dim = 50;
  bool tanh_out = false;
};

/// Pixel state encoder: four 3x3 convolutions with ReLU, one fully connected
/// layer, then layer normalization of the embedding.
template <typename S>
class StateEncoder {
 public:
  struct Cache {
    std::vector<FeatureMap<S>> acts;  // input + post-ReLU output of each conv
    Matrix<S> flat;                   // (B, flat_dim), view of acts.back()
    typename LayerNorm<S>::Cache ln;
    Matrix<S> z;  // post-norm (pre-tanh kept implicitly; z is the output)
  };

  void init(const EncoderArch& arch, Rng& rng) {
    arch_ = arch;
    int side = arch.image_size;
    for (int i = 0; i < 4; ++i) {
      conv_[i].init(i == 0 ? arch.in_channels : arch.conv_channels, arch.conv_channels, 3,
                    arch.strides[static_cast<std::size_t>(i)], rng, arch.conv_pad);
      side = conv_[i].out_dim(side);
      check(side >= 1, "StateEncoder: image collapsed below 1px; reduce strides");
    }
    side_out_ = side;
    fc_.init(flat_dim(), arch.embed_dim, rng);
    ln_.init(arch.embed_dim);
  }

  const EncoderArch& arch() const { return arch_; }
  int flat_dim() const { return arch_.conv_channels * side_out_ * side_out_; }
  int embed_dim() const { return arch_.embed_dim; }

  void collect(Params<S>& out, const std::string& prefix) {
    for (int i = 0; i < 4; ++i) conv_[i].collect(out, prefix + ".conv" + std::to_string(i));
    fc_.collect(out, prefix + ".fc");
    ln_.collect(out, prefix + ".ln");
  }

  Matrix<S> forward(const FeatureMap<S>& pixels, Cache* cache = nullptr) const {
    check_shape(pixels.c == arch_.in_channels && pixels.h == arch_.image_size &&
                    pixels.w == arch_.image_size,
                "StateEncoder: input shape mismatch");
    Cache local;
    Cache& c = cache ? *cache : local;
    c.acts.clear();
    c.acts.push_back(pixels);
    for (int i = 0; i < 4; ++i) {
      FeatureMap<S> y = conv_[i].forward(c.acts.back());
      y.m = relu(y.m);
      c.acts.push_back(std::move(y));
    }
    const FeatureMap<S>& top = c.acts.back();
    c.flat = Eigen::Map<const Matrix<S>>(top.m.data(), top.n,
                                         static_cast<Eigen::Index>(top.c) * top.h * top.w);
    Matrix<S> pre = fc_.forward(c.flat);
    Matrix<S> z = ln_.forward(pre, &c.ln);
    if (arch_.tanh_out) z = z.array().tanh().matrix();
    c.z = z;
    if (!all_finite(z)) throw NumericError("StateEncoder: non-finite activations");
    return z;
  }

  /// Backpropagates dz into the parameters. Input gradients (pixels) are not
  /// produced; nothing upstream needs them.
  void backward(const Cache& cache, const Matrix<S>& dz_in, bool accum_params = true) {
    Matrix<S> dz = dz_in;
    if (arch_.tanh_out)
      dz = (dz.array() * (S(1) - cache.z.array().square())).matrix();
    Matrix<S> dpre = ln_.backward(cache.ln, dz, accum_params);
    Matrix<S> dflat = fc_.backward(cache.flat, dpre, accum_params);
    const FeatureMap<S>& top = cache.acts.back();
    FeatureMap<S> dfm;
    dfm.n = top.n;
    dfm.c = top.c;
    dfm.h = top.h;
    dfm.w = top.w;
    dfm.m = Eigen::Map<const Matrix<S>>(dflat.data(), top.m.rows(), top.m.cols());
    for (int i = 3; i >= 0; --i) {
      dfm.m = relu_backward(cache.acts[static_cast<std::size_t>(i) + 1].m, dfm.m);
      // Pixel gradients are never needed below the first convolution.
      dfm = conv_[i].backward(cache.acts[static_cast<std::size_t>(i)], dfm.m, accum_params,
                              /*need_dx=*/i > 0);
    }
  }

 private:
  EncoderArch arch_;
  Conv2d<S> conv_[4];
  Linear<S> fc_;
  LayerNorm<S> ln_;
  int side_out_ = 0;
};

/// Maps raw actions to a feature vector: two FC layers, ReLU between.
template <typename S>
class ActionEncoder {
 public:
  using Cache = typename Mlp<S>::Cache;

  void init(int action_dim, int hidden, int out_dim, Rng& rng) {
    mlp_.init({action_dim, hidden, out_dim}, rng);
    out_dim_ = out_dim;
  }
  int out_dim() const { return out_dim_; }
  void collect(Params<S>& out, const std::string& prefix) { mlp_.collect(out, prefix); }

  Matrix<S> forward(const Matrix<S>& actions, Cache* cache = nullptr) const {
    return mlp_.forward(actions, cache);
  }
  Matrix<S> backward(const Cache& cache, const Matrix<S>& dc, bool accum_params = true) {
    return mlp_.backward(cache, dc, accum_params);
  }

 private:
  Mlp<S> mlp_;
  int out_dim_ = 0;
};

/// Latent transition model: predicts the next embedding from the
/// concatenated state- and action-embeddings. Three FC layers.
template <typename S>
class TransitionModel {
 public:
  using Cache = typename Mlp<S>::Cache;

  void init(int embed_dim, int action_embed_dim, int hidden, Rng& rng) {
    d_ = embed_dim;
    n_ = action_embed_dim;
    mlp_.init({embed_dim + action_embed_dim, hidden, hidden, embed_dim}, rng);
  }
  void collect(Params<S>& out, const std::string& prefix) { mlp_.collect(out, prefix); }

  /// Concatenation order is (z, c).
  Matrix<S> forward(const Matrix<S>& z, const Matrix<S>& c, Cache* cache = nullptr) const {
    check_shape(z.cols() == d_ && c.cols() == n_ && z.rows() == c.rows(),
                "TransitionModel: input shape mismatch");
    Matrix<S> in(z.rows(), d_ + n_);
    in << z, c;
    Matrix<S> out = mlp_.forward(in, cache);
    if (!all_finite(out)) throw NumericError("TransitionModel: non-finite outputs");
    return out;
  }

  /// Returns (dz, dc).
  std::pair<Matrix<S>, Matrix<S>> backward(const Cache& cache, const Matrix<S>& dout,
                                           bool accum_params = true) {
    Matrix<S> din = mlp_.backward(cache, dout, accum_params);
    return {din.leftCols(d_), din.rightCols(n_)};
  }

 private:
  Mlp<S> mlp_;
  int d_ = 0, n_ = 0;
};

/// Scalar state-action value head on the embedding.
template <typename S>
class QFunction {
 public:
  using Cache = typename Mlp<S>::Cache;

  void init(int embed_dim, int action_dim, int hidden, Rng& rng) {
    d_ = embed_dim;
    a_ = action_dim;
    mlp_.init({embed_dim + action_dim, hidden, hidden, 1}, rng);
  }
  void collect(Params<S>& out, const std::string& prefix) { mlp_.collect(out, prefix); }

  Vector<S> forward(const Matrix<S>& z, const Matrix<S>& a, Cache* cache = nullptr) const {
    check_shape(z.cols() == d_ && a.cols() == a_ && z.rows() == a.rows(),
                "QFunction: input shape mismatch");
    Matrix<S> in(z.rows(), d_ + a_);
    in << z, a;
    return mlp_.forward(in, cache).col(0);
  }

  /// Returns (dz, da) for per-row output gradients dq.
  std::pair<Matrix<S>, Matrix<S>> backward(const Cache& cache, const Vector<S>& dq,
                                           bool accum_params = true) {
    Matrix<S> dout(dq.size(), 1);
    dout.col(0) = dq;
    Matrix<S> din = mlp_.backward(cache, dout, accum_params);
    return {din.leftCols(d_), din.rightCols(a_)};
  }

 private:
  Mlp<S> mlp_;
  int d_ = 0, a_ = 0;
};

/// tanh-squashed diagonal Gaussian policy. log-std is soft-clamped to
/// [-10, 2] through a tanh reparameterization so gradients stay smooth.
template <typename S>
class GaussianPolicy {
 public:
  static constexpr S kLogStdMin = S(-10);
  static constexpr S kLogStdMax = S(2);
  static constexpr S kSquashEps = S(1e-6);

  struct Cache {
    typename Mlp<S>::Cache trunk;
    Matrix<S> raw_log_std;  // pre-clamp outputs
    Matrix<S> mu, log_std, eps, action;
  };

  void init(int embed_dim, int action_dim, int hidden, Rng& rng) {
    d_ = embed_dim;
    a_ = action_dim;
    mlp_.init({embed_dim, hidden, hidden, 2 * action_dim}, rng);
  }
  int action_dim() const { return a_; }
  void collect(Params<S>& out, const std::string& prefix) { mlp_.collect(out, prefix); }

  struct Sample {
    Matrix<S> action;    // (B, A), always in [-1, 1]
    Vector<S> log_prob;  // (B)
  };

  /// Reparameterized sample; the cache allows backprop through the draw.
  Sample sample(const Matrix<S>& z, Rng& rng, Cache* cache = nullptr) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    dist(z, c);
    const Eigen::Index B = z.rows();
    c.eps.resize(B, a_);
    for (Eigen::Index i = 0; i < B; ++i)
      for (int k = 0; k < a_; ++k) c.eps(i, k) = static_cast<S>(rng.normal());
    const Matrix<S> std = c.log_std.array().exp().matrix();
    const Matrix<S> u = c.mu + std.cwiseProduct(c.eps);
    c.action = u.array().tanh().matrix();
    Sample s;
    s.action = c.action;
    s.log_prob = log_prob_from(c.log_std, c.eps, c.action);
    return s;
  }

  /// Deterministic (mean) action used for evaluation.
  Matrix<S> mean_action(const Matrix<S>& z) const {
    Cache c;
    dist(z, c);
    return c.mu.array().tanh().matrix();
  }

  /// Log-density of a given squashed action under the current policy.
  Vector<S> log_prob(const Matrix<S>& z, const Matrix<S>& a) const {
    Cache c;
    dist(z, c);
    const Matrix<S> std = c.log_std.array().exp().matrix();
    // u = atanh(a); eps = (u - mu) / std
    Matrix<S> u = a.array().min(S(1) - S(1e-7)).max(S(-1) + S(1e-7)).atanh().matrix();
    Matrix<S> eps = (u - c.mu).cwiseQuotient(std);
    return log_prob_from(c.log_std, eps, a);
  }

  /// Backprop through a cached sample given gradients on (mu, log_std).
  /// Returns dz (callers typically discard it: the actor path is detached).
  Matrix<S> backward_sample(const Cache& cache, const Matrix<S>& dmu, const Matrix<S>& dlog_std,
                            bool accum_params = true) {
    // Soft-clamp chain rule: log_std = min + 0.5*(max-min)*(tanh(raw)+1).
    const Matrix<S> t = cache.raw_log_std.array().tanh().matrix();
    const Matrix<S> draw =
        (dlog_std.array() * S(0.5) * (kLogStdMax - kLogStdMin) * (S(1) - t.array().square()))
            .matrix();
    Matrix<S> dout(dmu.rows(), 2 * a_);
    dout << dmu, draw;
    return mlp_.backward(cache.trunk, dout, accum_params);
  }

  void dist(const Matrix<S>& z, Cache& c) const {
    check_shape(z.cols() == d_, "GaussianPolicy: embedding dim mismatch");
    Matrix<S> out = mlp_.forward(z, &c.trunk);
    c.mu = out.leftCols(a_);
    c.raw_log_std = out.rightCols(a_);
    c.log_std = (kLogStdMin +
                 S(0.5) * (kLogStdMax - kLogStdMin) * (c.raw_log_std.array().tanh() + S(1)))
                    .matrix();
  }

 private:
  static Vector<S> log_prob_from(const Matrix<S>& log_std, const Matrix<S>& eps,
                                 const Matrix<S>& action) {
    const S half_log_2pi = S(0.5) * std::log(S(2) * static_cast<S>(M_PI));
    Vector<S> lp =
        (-S(0.5) * eps.array().square() - log_std.array() - half_log_2pi).rowwise().sum();
    lp -= (S(1) - action.array().square() + kSquashEps).log().rowwise().sum().matrix();
    return lp;
  }

  Mlp<S> mlp_;
  int d_ = 0, a_ = 0;
};

/// Learned log-bilinear classifier weights for the two InfoNCE objectives.
template <typename S>
struct ClassifierWeights {
  Param<S> w1;  // (d + n, d): temporal score
  Param<S> w2;  // (d, d): multi-view score

  void init(int embed_dim, int action_embed_dim, Rng& rng) {
    w1.resize(embed_dim + action_embed_dim, embed_dim);
    w2.resize(embed_dim, embed_dim);
    orthogonal_init(w1.value, rng);
    orthogonal_init(w2.value, rng);
  }
  void collect(Params<S>& out, const std::string& prefix) {
    out.push_back({prefix + ".w1", &w1});
    out.push_back({prefix + ".w2", &w2});
  }
};

}  // namespace cody
