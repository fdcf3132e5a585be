#pragma once

#include <cmath>
#include <vector>

#include "cody/envs.hpp"
#include "cody/metrics.hpp"
#include "cody/nets.hpp"
#include "cody/rng.hpp"

namespace cody {

template <typename S>
Matrix<S> encode_single(const StateEncoder<S>& encoder, const Observation& obs) {
  return encoder.forward(to_feature_map<S>(obs));
}

/// Deterministic-policy evaluation: undiscounted return summed per episode,
/// averaged over `episodes`. Read-only with respect to the networks; the env
/// must be an instance independent of the training one.
template <typename S>
EvalRecord evaluate(const GaussianPolicy<S>& policy, const StateEncoder<S>& encoder, PixelEnv& env,
                    int episodes, Rng& rng) {
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset(rng);
    double ret = 0.0;
    while (true) {
      const Matrix<S> z = encode_single(encoder, obs);
      const Matrix<S> a = policy.mean_action(z);
      std::vector<double> act(static_cast<std::size_t>(a.cols()));
      for (Eigen::Index k = 0; k < a.cols(); ++k) act[static_cast<std::size_t>(k)] = a(0, k);
      StepResult sr = env.step(act);
      ret += sr.reward;
      obs = std::move(sr.obs);
      if (sr.done) break;
    }
    returns.push_back(ret);
  }
  EvalRecord rec;
  double sum = 0.0;
  for (double r : returns) sum += r;
  rec.mean_return = sum / static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - rec.mean_return) * (r - rec.mean_return);
  rec.return_std = std::sqrt(ss / static_cast<double>(returns.size()));
  return rec;
}

/// Mean return of the uniform-random policy, used as the learning baseline.
inline EvalRecord random_policy_baseline(PixelEnv& env, int episodes, Rng& rng) {
  std::vector<double> returns;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(rng);
    double ret = 0.0;
    const int adim = env.spec().action_dim;
    while (true) {
      std::vector<double> act(static_cast<std::size_t>(adim));
      for (auto& a : act) a = rng.uniform(-1.0, 1.0);
      StepResult sr = env.step(act);
      ret += sr.reward;
      if (sr.done) break;
    }
    returns.push_back(ret);
  }
  EvalRecord rec;
  double sum = 0.0;
  for (double r : returns) sum += r;
  rec.mean_return = sum / static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - rec.mean_return) * (r - rec.mean_return);
  rec.return_std = std::sqrt(ss / static_cast<double>(returns.size()));
  return rec;
}

}  // namespace cody
