#pragma once

#include <string>
#include <vector>

#include "cody/common.hpp"

namespace cody {

/// A learnable tensor together with its gradient accumulator.
template <typename S>
struct Param {
  Matrix<S> value;
  Matrix<S> grad;

  void resize(Eigen::Index rows, Eigen::Index cols) {
    value.setZero(rows, cols);
    grad.setZero(rows, cols);
  }
  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

template <typename S>
struct ParamRef {
  std::string name;
  Param<S>* param;
};

template <typename S>
using Params = std::vector<ParamRef<S>>;

template <typename S>
void zero_grads(const Params<S>& ps) {
  for (const auto& p : ps) p.param->zero_grad();
}

template <typename S>
Eigen::Index param_count(const Params<S>& ps) {
  Eigen::Index n = 0;
  for (const auto& p : ps) n += p.param->size();
  return n;
}

/// target <- tau * online + (1 - tau) * target, elementwise. Gradients are
/// untouched; no gradient ever flows through this update.
template <typename S>
void ema_update(const Params<S>& target, const Params<S>& online, S tau) {
  check_shape(target.size() == online.size(), "ema_update: parameter tree size mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto& t = target[i].param->value;
    const auto& o = online[i].param->value;
    check_shape(t.rows() == o.rows() && t.cols() == o.cols(),
                "ema_update: shape mismatch at " + target[i].name);
    t = tau * o + (S(1) - tau) * t;
  }
}

/// Hard copy online -> target (used when constructing target networks).
template <typename S>
void copy_params(const Params<S>& target, const Params<S>& online) {
  ema_update(target, online, S(1));
}

}  // namespace cody
