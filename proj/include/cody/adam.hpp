#pragma once

#include <istream>
#include <ostream>
#include <vector>

#include "cody/common.hpp"
#include "cody/param.hpp"

namespace cody {

/// Adaptive moment estimation over one parameter group. The same Param may
/// be owned by several optimizers (each keeps its own moment state), which is
/// how the encoder receives both the critic-rate and the encoder-rate update.
template <typename S>
class Adam {
 public:
  Adam() = default;
  Adam(Params<S> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    slots_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& v = params_[i].param->value;
      slots_[i].m.setZero(v.rows(), v.cols());
      slots_[i].v.setZero(v.rows(), v.cols());
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  const Params<S>& params() const { return params_; }

  void zero_grad() { zero_grads(params_); }

  void step() {
    ++t_;
    const S b1 = static_cast<S>(beta1_), b2 = static_cast<S>(beta2_);
    const S bias1 = S(1) - static_cast<S>(std::pow(beta1_, t_));
    const S bias2 = S(1) - static_cast<S>(std::pow(beta2_, t_));
    const S alpha = static_cast<S>(lr_) / bias1;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i].param;
      auto& s = slots_[i];
      s.m = b1 * s.m + (S(1) - b1) * p.grad;
      s.v = (b2 * s.v.array() + (S(1) - b2) * p.grad.array().square()).matrix();
      p.value.array() -=
          alpha * s.m.array() / ((s.v.array() / bias2).sqrt() + static_cast<S>(eps_));
    }
  }

  void save(std::ostream& os) const {
    std::uint64_t t = static_cast<std::uint64_t>(t_);
    os.write(reinterpret_cast<const char*>(&t), 8);
    for (const auto& s : slots_) {
      write_mat(os, s.m);
      write_mat(os, s.v);
    }
  }
  void load(std::istream& is) {
    std::uint64_t t = 0;
    is.read(reinterpret_cast<char*>(&t), 8);
    t_ = static_cast<long>(t);
    for (auto& s : slots_) {
      read_mat(is, s.m);
      read_mat(is, s.v);
    }
  }

 private:
  struct Slot {
    Matrix<S> m, v;
  };

  static void write_mat(std::ostream& os, const Matrix<S>& m) {
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(m.size())));
  }
  static void read_mat(std::istream& is, Matrix<S>& m) {
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(m.size())));
  }

  Params<S> params_;
  std::vector<Slot> slots_;
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
};

}  // namespace cody
