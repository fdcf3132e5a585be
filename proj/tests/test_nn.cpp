#include <catch2/catch_amalgamated.hpp>

#include "cody/nn.hpp"
#include "cody/param.hpp"
#include "cody/rng.hpp"
#include "support/gradcheck.hpp"

using cody::Conv2d;
using cody::FeatureMap;
using cody::LayerNorm;
using cody::Linear;
using cody::Matrix;
using cody::Mlp;
using cody::Params;
using cody::Rng;

namespace {

template <typename S>
FeatureMap<S> random_map(int n, int c, int h, int w, Rng& rng) {
  FeatureMap<S> f;
  f.resize(n, c, h, w);
  for (Eigen::Index i = 0; i < f.m.size(); ++i) f.m.data()[i] = static_cast<S>(rng.normal());
  return f;
}

template <typename S>
Matrix<S> random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix<S> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(rng.normal());
  return m;
}

}  // namespace

TEST_CASE("orthogonal init produces orthonormal rows/columns") {
  Rng rng(3);
  Matrix<double> w(8, 20);
  cody::orthogonal_init(w, rng);
  const Matrix<double> g = w * w.transpose();
  REQUIRE((g - Matrix<double>::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);

  Matrix<double> tall(20, 8);
  cody::orthogonal_init(tall, rng);
  const Matrix<double> g2 = tall.transpose() * tall;
  REQUIRE((g2 - Matrix<double>::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("linear gradients match central differences") {
  Rng rng(11);
  Linear<double> lin;
  lin.init(5, 4, rng);
  const Matrix<double> x = random_matrix<double>(3, 5, rng);
  const Matrix<double> target = random_matrix<double>(3, 4, rng);

  Params<double> ps;
  lin.collect(ps, "lin");
  auto forward = [&] { return 0.5 * (lin.forward(x) - target).squaredNorm(); };
  auto backward = [&] {
    cody::zero_grads(ps);
    const Matrix<double> dy = lin.forward(x) - target;
    lin.backward(x, dy);
  };
  REQUIRE(testsupport::gradcheck_max_err<double>(ps, forward, backward, 1e-6) < 1e-6);
}

TEST_CASE("linear input gradient matches central differences") {
  Rng rng(12);
  Linear<double> lin;
  lin.init(4, 3, rng);
  Matrix<double> x = random_matrix<double>(2, 4, rng);
  const Matrix<double> target = random_matrix<double>(2, 3, rng);

  auto loss = [&] { return 0.5 * (lin.forward(x) - target).squaredNorm(); };
  const Matrix<double> dx = lin.backward(x, lin.forward(x) - target, /*accum_params=*/false);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + 1e-6;
    const double fp = loss();
    x.data()[i] = orig - 1e-6;
    const double fm = loss();
    x.data()[i] = orig;
    REQUIRE(dx.data()[i] == Catch::Approx((fp - fm) / 2e-6).margin(1e-6));
  }
}

TEST_CASE("conv2d forward matches a naive loop") {
  Rng rng(21);
  Conv2d<double> conv;
  conv.init(2, 3, 3, 2, rng);
  const auto x = random_map<double>(2, 2, 9, 9, rng);
  const auto y = conv.forward(x);
  REQUIRE(y.h == 4);
  REQUIRE(y.w == 4);
  for (int ni = 0; ni < 2; ++ni)
    for (int oc = 0; oc < 3; ++oc)
      for (int oy = 0; oy < y.h; ++oy)
        for (int ox = 0; ox < y.w; ++ox) {
          double acc = conv.b.value(0, oc);
          for (int ic = 0; ic < 2; ++ic)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx)
                acc += conv.w.value(oc, (ic * 3 + ky) * 3 + kx) *
                       x.at(ni, ic, oy * 2 + ky, ox * 2 + kx);
          REQUIRE(y.at(ni, oc, oy, ox) == Catch::Approx(acc).margin(1e-12));
        }
}

TEST_CASE("conv2d gradients match central differences") {
  Rng rng(31);
  Conv2d<double> conv;
  conv.init(2, 3, 3, 1, rng);
  const auto x = random_map<double>(2, 2, 6, 6, rng);
  Params<double> ps;
  conv.collect(ps, "conv");

  auto forward = [&] { return 0.5 * conv.forward(x).m.squaredNorm(); };
  auto backward = [&] {
    cody::zero_grads(ps);
    auto y = conv.forward(x);
    conv.backward(x, y.m, true, false);
  };
  REQUIRE(testsupport::gradcheck_max_err<double>(ps, forward, backward, 1e-6) < 1e-6);
}

TEST_CASE("conv2d input gradient matches central differences") {
  Rng rng(32);
  Conv2d<double> conv;
  conv.init(2, 2, 3, 2, rng);
  auto x = random_map<double>(1, 2, 7, 7, rng);

  auto loss = [&] { return 0.5 * conv.forward(x).m.squaredNorm(); };
  auto y = conv.forward(x);
  const auto dx = conv.backward(x, y.m, /*accum_params=*/false, /*need_dx=*/true);
  for (Eigen::Index i = 0; i < x.m.size(); ++i) {
    const double orig = x.m.data()[i];
    x.m.data()[i] = orig + 1e-6;
    const double fp = loss();
    x.m.data()[i] = orig - 1e-6;
    const double fm = loss();
    x.m.data()[i] = orig;
    REQUIRE(dx.m.data()[i] == Catch::Approx((fp - fm) / 2e-6).margin(1e-6));
  }
}

TEST_CASE("layernorm normalizes rows and backprops correctly") {
  Rng rng(41);
  LayerNorm<double> ln;
  ln.init(6);
  ln.g.value.setRandom();
  ln.g.value.array() += 1.5;
  ln.b.value.setRandom();
  Matrix<double> x = random_matrix<double>(4, 6, rng);
  const Matrix<double> target = random_matrix<double>(4, 6, rng);

  LayerNorm<double>::Cache cache;
  const Matrix<double> y = ln.forward(x, &cache);
  // Undo gain/bias: the normalized rows have zero mean, unit variance.
  const Matrix<double> xhat = cache.xhat;
  for (Eigen::Index i = 0; i < 4; ++i) {
    REQUIRE(xhat.row(i).mean() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(xhat.row(i).array().square().mean() == Catch::Approx(1.0).margin(1e-4));
  }

  Params<double> ps;
  ln.collect(ps, "ln");
  auto forward = [&] { return 0.5 * (ln.forward(x) - target).squaredNorm(); };
  auto backward = [&] {
    cody::zero_grads(ps);
    LayerNorm<double>::Cache c2;
    const Matrix<double> y2 = ln.forward(x, &c2);
    ln.backward(c2, y2 - target);
  };
  REQUIRE(testsupport::gradcheck_max_err<double>(ps, forward, backward, 1e-6) < 1e-6);

  // Input gradient.
  LayerNorm<double>::Cache c3;
  const Matrix<double> y3 = ln.forward(x, &c3);
  const Matrix<double> dx = ln.backward(c3, y3 - target, false);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + 1e-6;
    const double fp = 0.5 * (ln.forward(x) - target).squaredNorm();
    x.data()[i] = orig - 1e-6;
    const double fm = 0.5 * (ln.forward(x) - target).squaredNorm();
    x.data()[i] = orig;
    REQUIRE(dx.data()[i] == Catch::Approx((fp - fm) / 2e-6).margin(1e-6));
  }
}

TEST_CASE("mlp gradients match central differences") {
  Rng rng(51);
  Mlp<double> mlp;
  mlp.init({4, 7, 5, 2}, rng);
  const Matrix<double> x = random_matrix<double>(3, 4, rng);
  const Matrix<double> target = random_matrix<double>(3, 2, rng);
  Params<double> ps;
  mlp.collect(ps, "mlp");

  auto forward = [&] { return 0.5 * (mlp.forward(x) - target).squaredNorm(); };
  auto backward = [&] {
    cody::zero_grads(ps);
    typename Mlp<double>::Cache cache;
    const Matrix<double> y = mlp.forward(x, &cache);
    mlp.backward(cache, y - target);
  };
  REQUIRE(testsupport::gradcheck_max_err<double>(ps, forward, backward, 1e-6) < 2e-6);
}
