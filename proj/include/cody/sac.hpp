#pragma once

#include <cmath>

#include "cody/common.hpp"
#include "cody/nets.hpp"
#include "cody/param.hpp"
#include "cody/rng.hpp"

namespace cody {

/// Entropy temperature, stored in log space so it stays positive. The
/// target entropy defaults to -action_dim.
template <typename S>
struct Temperature {
  Param<S> log_alpha;
  S target_entropy = 0;
  bool learnable = true;

  void init(S initial, int action_dim, bool learn) {
    log_alpha.resize(1, 1);
    log_alpha.value(0, 0) = std::log(initial);
    target_entropy = -static_cast<S>(action_dim);
    learnable = learn;
  }
  S value() const { return std::exp(log_alpha.value(0, 0)); }
  void collect(Params<S>& out, const std::string& prefix) {
    out.push_back({prefix + ".log_alpha", &log_alpha});
  }
};

/// Soft Bellman target, fully detached:
///   T = r + gamma * (1 - d) * (min_i Q_targ_i(z', a') - alpha * log pi(a'|z')).
template <typename S>
Vector<S> target_value(const Vector<S>& reward, const Vector<S>& done, const Vector<S>& min_q_next,
                       const Vector<S>& log_prob_next, S alpha, S gamma) {
  return reward.array() +
         gamma * (S(1) - done.array()) * (min_q_next.array() - alpha * log_prob_next.array());
}

template <typename S>
struct CriticLossResult {
  S loss = 0;
  Vector<S> dq1, dq2;
};

/// Bellman error summed over both critics, mean over the batch:
///   L = mean_b (q1 - y)^2 + mean_b (q2 - y)^2.
template <typename S>
CriticLossResult<S> critic_loss(const Vector<S>& q1, const Vector<S>& q2, const Vector<S>& y,
                                bool need_grad = true) {
  check_shape(q1.size() == y.size() && q2.size() == y.size(), "critic_loss: size mismatch");
  CriticLossResult<S> out;
  const Vector<S> e1 = q1 - y, e2 = q2 - y;
  const S invb = S(1) / static_cast<S>(y.size());
  out.loss = (e1.squaredNorm() + e2.squaredNorm()) * invb;
  if (need_grad) {
    out.dq1 = S(2) * invb * e1;
    out.dq2 = S(2) * invb * e2;
  }
  return out;
}

template <typename S>
struct ActorLossResult {
  S loss = 0;
  Vector<S> log_prob;  // fresh-sample log-probs (detached use: temperature loss)
  S entropy_estimate = 0;
};

/// Policy loss L = mean[alpha * log pi(a|z) - min_i Q_i(z, a)] with
/// reparameterized actions. The embedding z must already be detached; this
/// routine only accumulates gradients into the policy. QMin evaluates the
/// twin critics at (z, a) and returns per-row values plus d(minQ)/da, without
/// touching critic parameter gradients.
template <typename S, typename QMin>
ActorLossResult<S> actor_loss(GaussianPolicy<S>& policy, const Matrix<S>& z_detached, QMin&& qmin,
                              S alpha, Rng& rng, bool need_grad = true) {
  typename GaussianPolicy<S>::Cache cache;
  auto sample = policy.sample(z_detached, rng, &cache);
  const Eigen::Index B = z_detached.rows();

  Matrix<S> dmin_da;
  Vector<S> qv = qmin(z_detached, sample.action, need_grad ? &dmin_da : nullptr);

  ActorLossResult<S> out;
  out.loss = (alpha * sample.log_prob.array() - qv.array()).mean();
  out.log_prob = sample.log_prob;
  out.entropy_estimate = -sample.log_prob.mean();

  if (need_grad) {
    const S invb = S(1) / static_cast<S>(B);
    // With eps fixed, d log pi / du_k = 2 a_k (1-a_k^2) / (1-a_k^2+eps) from
    // the tanh correction; da/du = 1 - a^2.
    const Matrix<S>& a = cache.action;
    const auto one_minus_a2 = (S(1) - a.array().square()).eval();
    const auto dlogpi_du =
        (S(2) * a.array() * one_minus_a2 / (one_minus_a2 + GaussianPolicy<S>::kSquashEps)).eval();
    Matrix<S> du = (invb * (alpha * dlogpi_du - dmin_da.array() * one_minus_a2)).matrix();
    Matrix<S> dmu = du;  // du/dmu = 1
    const Matrix<S> sigma = cache.log_std.array().exp().matrix();
    // d log pi / d log_std = -1 (Gaussian part); du/dlog_std = sigma * eps.
    Matrix<S> dlog_std =
        (du.array() * cache.eps.array() * sigma.array() - invb * alpha).matrix();
    policy.backward_sample(cache, dmu, dlog_std, true);
  }
  return out;
}

template <typename S>
struct TemperatureLossResult {
  S loss = 0;
};

/// Dual objective for the learned temperature:
///   L(log alpha) = mean[-alpha * (log pi + target_entropy)],
/// log-probs detached. Accumulates the gradient on log_alpha.
template <typename S>
TemperatureLossResult<S> temperature_loss(Temperature<S>& temp, const Vector<S>& log_prob,
                                          bool need_grad = true) {
  TemperatureLossResult<S> out;
  const S alpha = temp.value();
  const S mean_term = (log_prob.array() + temp.target_entropy).mean();
  out.loss = -alpha * mean_term;
  if (need_grad && temp.learnable) {
    // d/dlog_alpha [-exp(log_alpha) * m] = -alpha * m
    temp.log_alpha.grad(0, 0) += -alpha * mean_term;
  }
  return out;
}

}  // namespace cody
