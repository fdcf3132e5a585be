#pragma once

#include <cmath>
#include <optional>

#include "cody/common.hpp"
#include "cody/config.hpp"
#include "cody/nets.hpp"
#include "cody/param.hpp"

namespace cody {

/// Per-step scalar losses for logging.
template <typename S>
struct LossBundle {
  S pred = 0, tmi = 0, mvmi = 0, cody = 0;
  S critic = 0, actor = 0;
  S temperature = 0;  // current temperature value, not a loss

  bool finite() const {
    return std::isfinite(pred) && std::isfinite(tmi) && std::isfinite(mvmi) &&
           std::isfinite(cody) && std::isfinite(critic) && std::isfinite(actor) &&
           std::isfinite(temperature);
  }
};

struct LossWeights {
  double lambda_tmi = 100.0;
  double eta_pred = 1000.0;
};

template <typename S>
struct InfoNceResult {
  S loss = 0;
  Matrix<S> dscores;  // d loss / d scores, same shape as the input
};

/// Multi-sample InfoNCE over a (B, B) score matrix whose diagonal holds the
/// positives and whose off-diagonal row entries are the in-batch negatives:
///   loss = -mean_i [ s_ii - logsumexp_j s_ij ].
/// Scores stay in log space; the exp of the bilinear classifiers is never
/// materialized.
template <typename S>
InfoNceResult<S> infonce(const Matrix<S>& scores, bool need_grad = true) {
  const Eigen::Index B = scores.rows();
  check_shape(scores.cols() == B, "infonce: score matrix must be square");
  if (B < 2) throw std::invalid_argument("infonce: batch must be >= 2 (no negatives otherwise)");
  InfoNceResult<S> out;
  if (need_grad) out.dscores.setZero(B, B);
  S loss = 0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const S m = scores.row(i).maxCoeff();
    const auto shifted = (scores.row(i).array() - m).exp().eval();
    const S denom = shifted.sum();
    loss += std::log(denom) + m - scores(i, i);
    if (need_grad) {
      out.dscores.row(i) = (shifted / denom).matrix() / static_cast<S>(B);
      out.dscores(i, i) -= S(1) / static_cast<S>(B);
    }
  }
  out.loss = loss / static_cast<S>(B);
  return out;
}

template <typename S>
struct PredLossResult {
  S loss = 0;
  Matrix<S> dzhat1;
};

/// Squared l2 prediction error between the online prediction and the target
/// embedding of the next state, averaged over the batch. z_next is treated
/// as a constant (target path).
template <typename S>
PredLossResult<S> pred_loss(const Matrix<S>& zhat1, const Matrix<S>& z_next,
                            bool need_grad = true) {
  check_shape(zhat1.rows() == z_next.rows() && zhat1.cols() == z_next.cols(),
              "pred_loss: shape mismatch");
  PredLossResult<S> out;
  const Matrix<S> diff = zhat1 - z_next;
  out.loss = diff.array().square().sum() / static_cast<S>(zhat1.rows());
  if (need_grad) out.dzhat1 = diff * (S(2) / static_cast<S>(zhat1.rows()));
  return out;
}

template <typename S>
struct TmiLossResult {
  S loss = 0;
  Matrix<S> dz1, dc;
};

/// Temporal InfoNCE with log-bilinear score m(z1,c)^T W1 z_next. Negatives
/// are the other rows' next-state embeddings in the same minibatch. z_next
/// is a constant; gradients reach z1, c and W1 only. grad_scale folds an
/// outer loss weight into the accumulated gradients.
template <typename S>
TmiLossResult<S> tmi_loss(const Matrix<S>& z1, const Matrix<S>& c, const Matrix<S>& z_next,
                          Param<S>& w1, bool need_grad = true, S grad_scale = S(1)) {
  const Eigen::Index B = z1.rows(), d = z1.cols(), n = c.cols();
  check_shape(c.rows() == B && z_next.rows() == B && z_next.cols() == d,
              "tmi_loss: shape mismatch");
  check_shape(w1.value.rows() == d + n && w1.value.cols() == d, "tmi_loss: W1 shape mismatch");
  Matrix<S> m(B, d + n);
  m << z1, c;
  const Matrix<S> proj = m * w1.value;          // (B, d)
  const Matrix<S> scores = proj * z_next.transpose();  // (B, B)
  auto nce = infonce(scores, need_grad);
  TmiLossResult<S> out;
  out.loss = nce.loss;
  if (need_grad) {
    const Matrix<S> dproj = grad_scale * (nce.dscores * z_next);  // (B, d)
    w1.grad.noalias() += m.transpose() * dproj;                   // (d+n, d)
    const Matrix<S> dm = dproj * w1.value.transpose();            // (B, d+n)
    out.dz1 = dm.leftCols(d);
    out.dc = dm.rightCols(n);
  }
  return out;
}

template <typename S>
struct MvmiLossResult {
  S loss = 0;
  Matrix<S> dzhat1;
};

/// Multi-view InfoNCE between the two predicted next embeddings with
/// log-bilinear score zhat1^T W2 zhat2. zhat2 comes from the target path and
/// is a constant; gradients reach zhat1 and W2.
template <typename S>
MvmiLossResult<S> mvmi_loss(const Matrix<S>& zhat1, const Matrix<S>& zhat2, Param<S>& w2,
                            bool need_grad = true) {
  const Eigen::Index B = zhat1.rows(), d = zhat1.cols();
  check_shape(zhat2.rows() == B && zhat2.cols() == d, "mvmi_loss: shape mismatch");
  check_shape(w2.value.rows() == d && w2.value.cols() == d, "mvmi_loss: W2 shape mismatch");
  const Matrix<S> proj = zhat1 * w2.value;              // (B, d)
  const Matrix<S> scores = proj * zhat2.transpose();    // (B, B)
  auto nce = infonce(scores, need_grad);
  MvmiLossResult<S> out;
  out.loss = nce.loss;
  if (need_grad) {
    const Matrix<S> dproj = nce.dscores * zhat2;        // (B, d)
    w2.grad.noalias() += zhat1.transpose() * dproj;
    out.dzhat1 = dproj * w2.value.transpose();
  }
  return out;
}

/// Inputs to the combined auxiliary loss, wired per the training graph:
/// z1 and zhat1 are online-path tensors; z2, z_next and zhat2 come from the
/// target networks and carry no gradients.
template <typename S>
struct CodyBatch {
  Matrix<S> z1;      // online embedding of view 1
  Matrix<S> c;       // action embeddings
  Matrix<S> z_next;  // target embedding of the next state (detached)
  Matrix<S> zhat1;   // online prediction g_upsilon(z1, c)
  Matrix<S> zhat2;   // target prediction g_mu(z2, c) (detached); empty under non_mv
};

template <typename S>
struct CodyLossResult {
  S total = 0;
  LossBundle<S> bundle;
  // Gradients of the weighted total on the online-path inputs.
  Matrix<S> dz1, dc, dzhat1;
};

inline bool mvmi_active(Ablation a) { return a != Ablation::non_mv; }
inline bool tmi_active(Ablation a) { return a != Ablation::non_tem; }
inline bool pred_active(Ablation a) { return a != Ablation::non_pred; }

/// Weighted total: L = L_MVMI + lambda * L_TMI + eta * L_pred, with the
/// ablation switch removing exactly one term. W1/W2 gradients are
/// accumulated into the classifier params; input gradients are returned.
template <typename S>
CodyLossResult<S> cody_total_loss(const CodyBatch<S>& b, ClassifierWeights<S>& cls,
                                  const LossWeights& w, Ablation ablation,
                                  bool need_grad = true) {
  const bool use_mv = mvmi_active(ablation);
  const bool use_tmi = tmi_active(ablation) && w.lambda_tmi > 0.0;
  const bool use_pred = pred_active(ablation) && w.eta_pred > 0.0;
  if (!use_mv && !use_tmi && !use_pred)
    throw ConfigError("cody_total_loss: all loss terms ablated or zero-weighted");

  CodyLossResult<S> out;
  const Eigen::Index B = b.z1.rows();
  out.dz1.setZero(B, b.z1.cols());
  out.dc.setZero(B, b.c.cols());
  out.dzhat1.setZero(B, b.zhat1.cols());

  if (pred_active(ablation)) {
    auto p = pred_loss(b.zhat1, b.z_next, need_grad && use_pred);
    out.bundle.pred = p.loss;
    if (need_grad && use_pred) out.dzhat1 += static_cast<S>(w.eta_pred) * p.dzhat1;
    if (use_pred) out.total += static_cast<S>(w.eta_pred) * p.loss;
  }
  if (tmi_active(ablation)) {
    auto t = tmi_loss(b.z1, b.c, b.z_next, cls.w1, need_grad && use_tmi,
                      static_cast<S>(w.lambda_tmi));
    out.bundle.tmi = t.loss;
    if (need_grad && use_tmi) {
      out.dz1 += t.dz1;
      out.dc += t.dc;
    }
    if (use_tmi) out.total += static_cast<S>(w.lambda_tmi) * t.loss;
  }
  if (use_mv) {
    auto mv = mvmi_loss(b.zhat1, b.zhat2, cls.w2, need_grad);
    out.bundle.mvmi = mv.loss;
    if (need_grad) out.dzhat1 += mv.dzhat1;
    out.total += mv.loss;
  }
  out.bundle.cody = out.total;
  return out;
}

}  // namespace cody
