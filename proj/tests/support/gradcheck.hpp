#pragma once

// Central-difference gradient oracle shared by the unit and acceptance
// suites. Independent of the analytic backward paths it checks.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cody/param.hpp"

namespace testsupport {

/// Runs `backward()` once (it must zero grads, run the forward and
/// accumulate analytic gradients), then perturbs every entry of every param
/// and compares central differences of `forward()` against the analytic
/// values. Returns the worst normalized error.
template <typename S, typename Forward, typename Backward>
S gradcheck_max_err(const cody::Params<S>& params, Forward&& forward, Backward&& backward, S h) {
  backward();
  std::vector<cody::Matrix<S>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.param->grad);

  S worst = 0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& v = params[pi].param->value;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      S* entry = v.data() + i;
      const S orig = *entry;
      *entry = orig + h;
      const S fp = forward();
      *entry = orig - h;
      const S fm = forward();
      *entry = orig;
      const S numeric = (fp - fm) / (2 * h);
      const S ana = analytic[pi].data()[i];
      const S scale = std::max({S(1), std::abs(numeric), std::abs(ana)});
      worst = std::max(worst, std::abs(numeric - ana) / scale);
    }
  }
  return worst;
}

}  // namespace testsupport
