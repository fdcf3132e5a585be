// Trains a log-bilinear critic on correlated Gaussian pairs and shows the
// InfoNCE mutual-information bound log(B) - L_NCE approaching the analytic
// MI = -0.5 * log(1 - rho^2).

#include <cmath>
#include <iostream>

#include "cody/adam.hpp"
#include "cody/codyloss.hpp"
#include "cody/rng.hpp"

using cody::Matrix;

namespace {

// Quadratic feature map keeps the score log-bilinear in the learned matrix.
Matrix<double> features(const Matrix<double>& x) {
  Matrix<double> f(x.rows(), 3);
  f.col(0) = x.col(0);
  f.col(1) = x.col(0).array().square();
  f.col(2).setOnes();
  return f;
}

}  // namespace

int main() {
  const double rho = 0.9;
  const int B = 128;
  cody::Rng rng(7);

  cody::Param<double> w;
  w.resize(3, 3);
  cody::Adam<double> opt({{"w", &w}}, 1e-2);

  auto draw_batch = [&](Matrix<double>& x1, Matrix<double>& x2) {
    x1.resize(B, 1);
    x2.resize(B, 1);
    for (int i = 0; i < B; ++i) {
      const double a = rng.normal();
      x1(i, 0) = a;
      x2(i, 0) = rho * a + std::sqrt(1.0 - rho * rho) * rng.normal();
    }
  };

  Matrix<double> x1, x2;
  for (int step = 0; step < 3000; ++step) {
    draw_batch(x1, x2);
    const Matrix<double> f1 = features(x1), f2 = features(x2);
    const Matrix<double> scores = f1 * w.value * f2.transpose();
    auto nce = cody::infonce(scores);
    opt.zero_grad();
    w.grad = f1.transpose() * nce.dscores * f2;
    opt.step();
    if (step % 500 == 0)
      std::cout << "step " << step << "  bound " << std::log(B) - nce.loss << "  (true MI "
                << -0.5 * std::log(1 - rho * rho) << ")\n";
  }

  double loss_sum = 0;
  const int eval_batches = 200;
  for (int b = 0; b < eval_batches; ++b) {
    draw_batch(x1, x2);
    const Matrix<double> scores = features(x1) * w.value * features(x2).transpose();
    loss_sum += cody::infonce(scores, /*need_grad=*/false).loss;
  }
  const double bound = std::log(B) - loss_sum / eval_batches;
  std::cout << "final bound over " << eval_batches << " batches: " << bound
            << " <= " << -0.5 * std::log(1 - rho * rho) << "\n";
  return 0;
}
