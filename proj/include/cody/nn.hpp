#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cody/common.hpp"
#include "cody/param.hpp"
#include "cody/rng.hpp"

namespace cody {

/// Batch of feature maps stored as one row-major matrix of shape
/// (n*h*w, c). Row index ((ni*h) + y)*w + x holds the c channel values of
/// pixel (y, x) of sample ni. This layout keeps convolutions as plain GEMMs.
template <typename S>
struct FeatureMap {
  int n = 0, c = 0, h = 0, w = 0;
  Matrix<S> m;

  void resize(int n_, int c_, int h_, int w_) {
    n = n_;
    c = c_;
    h = h_;
    w = w_;
    m.setZero(static_cast<Eigen::Index>(n) * h * w, c);
  }
  S& at(int ni, int ci, int y, int x) {
    return m((static_cast<Eigen::Index>(ni) * h + y) * w + x, ci);
  }
  S at(int ni, int ci, int y, int x) const {
    return m((static_cast<Eigen::Index>(ni) * h + y) * w + x, ci);
  }
};

/// Fills `w` (rows x cols) with a (semi-)orthogonal matrix, as used for all
/// layer weights here: reproducible and scale-preserving at init.
template <typename S>
void orthogonal_init(Matrix<S>& w, Rng& rng) {
  const Eigen::Index r = w.rows(), c = w.cols();
  const bool tall = r >= c;
  Matrix<S> a(tall ? r : c, tall ? c : r);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = static_cast<S>(rng.normal());
  Eigen::HouseholderQR<Matrix<S>> qr(a);
  Matrix<S> q = qr.householderQ() * Matrix<S>::Identity(a.rows(), a.cols());
  // Fix signs so the factorization is unique.
  Matrix<S> rmat = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (rmat(j, j) < S(0)) q.col(j) = -q.col(j);
  w = tall ? q : Matrix<S>(q.transpose());
}

template <typename S>
struct Linear {
  Param<S> w;  // (out, in)
  Param<S> b;  // (1, out)

  void init(int in, int out, Rng& rng) {
    w.resize(out, in);
    b.resize(1, out);
    orthogonal_init(w.value, rng);
  }
  void collect(Params<S>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w});
    out.push_back({prefix + ".b", &b});
  }

  Matrix<S> forward(const Matrix<S>& x) const {
    return (x * w.value.transpose()).rowwise() + b.value.row(0);
  }
  /// Accumulates parameter grads (unless accum_params=false) and returns dx.
  Matrix<S> backward(const Matrix<S>& x, const Matrix<S>& dy, bool accum_params = true) {
    if (accum_params) {
      w.grad.noalias() += dy.transpose() * x;
      b.grad.row(0) += dy.colwise().sum();
    }
    return dy * w.value;
  }
};

template <typename S>
inline Matrix<S> relu(const Matrix<S>& x) {
  return x.cwiseMax(S(0));
}

/// dx = dy masked by the post-activation output y (y > 0).
template <typename S>
inline Matrix<S> relu_backward(const Matrix<S>& y, const Matrix<S>& dy) {
  return (y.array() > S(0)).template cast<S>() * dy.array();
}

/// 2D convolution, kernel k x k, configurable stride and zero padding.
template <typename S>
struct Conv2d {
  Param<S> w;  // (out_c, in_c * k * k)
  Param<S> b;  // (1, out_c)
  int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 0;

  void init(int in_channels, int out_channels, int kernel, int stride_, Rng& rng, int pad_ = 0) {
    in_c = in_channels;
    out_c = out_channels;
    k = kernel;
    stride = stride_;
    pad = pad_;
    w.resize(out_c, static_cast<Eigen::Index>(in_c) * k * k);
    b.resize(1, out_c);
    orthogonal_init(w.value, rng);
  }
  void collect(Params<S>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w});
    out.push_back({prefix + ".b", &b});
  }

  int out_dim(int in) const { return (in + 2 * pad - k) / stride + 1; }

  /// Gathers sliding patches: rows follow the output pixel order of
  /// FeatureMap, columns are (ci*k + ky)*k + kx. Out-of-range reads are zero.
  Matrix<S> im2col(const FeatureMap<S>& x) const {
    const int oh = out_dim(x.h), ow = out_dim(x.w);
    Matrix<S> p(static_cast<Eigen::Index>(x.n) * oh * ow, static_cast<Eigen::Index>(in_c) * k * k);
    Eigen::Index r = 0;
    for (int ni = 0; ni < x.n; ++ni)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox, ++r) {
          Eigen::Index col = 0;
          for (int ci = 0; ci < in_c; ++ci)
            for (int ky = 0; ky < k; ++ky) {
              const int y = oy * stride + ky - pad;
              if (y < 0 || y >= x.h) {
                for (int kx = 0; kx < k; ++kx, ++col) p(r, col) = S(0);
                continue;
              }
              const Eigen::Index src = (static_cast<Eigen::Index>(ni) * x.h + y) * x.w;
              for (int kx = 0; kx < k; ++kx, ++col) {
                const int xx = ox * stride + kx - pad;
                p(r, col) = (xx < 0 || xx >= x.w) ? S(0) : x.m(src + xx, ci);
              }
            }
        }
    return p;
  }

  FeatureMap<S> forward(const FeatureMap<S>& x) const {
    check_shape(x.c == in_c, "Conv2d: channel mismatch");
    FeatureMap<S> y;
    y.n = x.n;
    y.c = out_c;
    y.h = out_dim(x.h);
    y.w = out_dim(x.w);
    const Matrix<S> p = im2col(x);
    y.m = (p * w.value.transpose()).rowwise() + b.value.row(0);
    return y;
  }

  /// dy is in the output FeatureMap layout. Recomputes im2col of the cached
  /// input rather than storing the patch matrix.
  FeatureMap<S> backward(const FeatureMap<S>& x, const Matrix<S>& dy, bool accum_params = true,
                         bool need_dx = true) {
    const int oh = out_dim(x.h), ow = out_dim(x.w);
    if (accum_params) {
      const Matrix<S> p = im2col(x);
      w.grad.noalias() += dy.transpose() * p;
      b.grad.row(0) += dy.colwise().sum();
    }
    FeatureMap<S> dx;
    if (!need_dx) return dx;
    Matrix<S> dp = dy * w.value;  // (n*oh*ow, in_c*k*k)
    dx.resize(x.n, x.c, x.h, x.w);
    Eigen::Index r = 0;
    for (int ni = 0; ni < x.n; ++ni)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox, ++r) {
          Eigen::Index col = 0;
          for (int ci = 0; ci < in_c; ++ci)
            for (int ky = 0; ky < k; ++ky) {
              const int y = oy * stride + ky - pad;
              if (y < 0 || y >= x.h) {
                col += k;
                continue;
              }
              const Eigen::Index dst = (static_cast<Eigen::Index>(ni) * x.h + y) * x.w;
              for (int kx = 0; kx < k; ++kx, ++col) {
                const int xx = ox * stride + kx - pad;
                if (xx >= 0 && xx < x.w) dx.m(dst + xx, ci) += dp(r, col);
              }
            }
        }
    return dx;
  }
};

/// Row-wise layer normalization with learnable gain and bias.
template <typename S>
struct LayerNorm {
  Param<S> g;  // (1, dim)
  Param<S> b;  // (1, dim)
  S eps = S(1e-5);

  struct Cache {
    Matrix<S> xhat;
    Vector<S> inv_std;
  };

  void init(int dim) {
    g.resize(1, dim);
    b.resize(1, dim);
    g.value.setOnes();
  }
  void collect(Params<S>& out, const std::string& prefix) {
    out.push_back({prefix + ".g", &g});
    out.push_back({prefix + ".b", &b});
  }

  Matrix<S> forward(const Matrix<S>& x, Cache* cache = nullptr) const {
    const Eigen::Index d = x.cols();
    Matrix<S> xhat(x.rows(), d);
    Vector<S> inv_std(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const S mu = x.row(i).mean();
      const S var = (x.row(i).array() - mu).square().mean();
      const S is = S(1) / std::sqrt(var + eps);
      xhat.row(i) = (x.row(i).array() - mu) * is;
      inv_std(i) = is;
    }
    if (cache) {
      cache->xhat = xhat;
      cache->inv_std = inv_std;
    }
    return (xhat.array().rowwise() * g.value.row(0).array()).rowwise() + b.value.row(0).array();
  }

  Matrix<S> backward(const Cache& cache, const Matrix<S>& dy, bool accum_params = true) {
    const Eigen::Index d = dy.cols();
    if (accum_params) {
      g.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
      b.grad.row(0) += dy.colwise().sum();
    }
    Matrix<S> dx(dy.rows(), d);
    const S invd = S(1) / static_cast<S>(d);
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
      const auto dxhat = (dy.row(i).array() * g.value.row(0).array()).eval();
      const S m1 = dxhat.mean();
      const S m2 = (dxhat * cache.xhat.row(i).array()).mean();
      dx.row(i) = ((dxhat - m1 - cache.xhat.row(i).array() * m2) * cache.inv_std(i)).matrix();
      (void)invd;
    }
    return dx;
  }
};

/// Fully-connected stack with ReLU between layers (linear output).
template <typename S>
struct Mlp {
  std::vector<Linear<S>> layers;

  struct Cache {
    std::vector<Matrix<S>> inputs;  // input to each linear layer
  };

  void init(const std::vector<int>& dims, Rng& rng) {
    check(dims.size() >= 2, "Mlp: need at least input and output dims");
    layers.resize(dims.size() - 1);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i)
      layers[i].init(dims[i], dims[i + 1], rng);
  }
  void collect(Params<S>& out, const std::string& prefix) {
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers[i].collect(out, prefix + ".fc" + std::to_string(i));
  }

  Matrix<S> forward(const Matrix<S>& x, Cache* cache = nullptr) const {
    Matrix<S> h = x;
    if (cache) cache->inputs.clear();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (cache) cache->inputs.push_back(h);
      h = layers[i].forward(h);
      if (i + 1 < layers.size()) h = relu(h);
    }
    return h;
  }

  Matrix<S> backward(const Cache& cache, const Matrix<S>& dy, bool accum_params = true) {
    Matrix<S> g = dy;
    for (std::size_t i = layers.size(); i-- > 0;) {
      g = layers[i].backward(cache.inputs[i], g, accum_params);
      if (i > 0) {
        // The stored input of layer i is the post-ReLU output of layer i-1.
        g = relu_backward(cache.inputs[i], g);
      }
    }
    return g;
  }
};

}  // namespace cody
