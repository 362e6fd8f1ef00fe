// Loss functions with hand-derived analytic gradients: cross-entropy,
// temperature-scaled contrastive alignment over cosine similarities, InfoNCE
// with its mutual-information lower bound, non-saturating GAN losses in
// softplus form, and mixup.
//
// Each result carries the scalar value plus gradients matching the input
// shapes; all of them are covered by finite-difference checks in the tests.

#ifndef MIAUG_LOSSES_HPP
#define MIAUG_LOSSES_HPP

#include <span>

#include "miaug/matrix.hpp"
#include "miaug/rng.hpp"

namespace miaug {

// Defaults for values the training stages need; all overridable in RunConfig.
struct HyperParams {
  double tau = 0.07;         // contrastive/InfoNCE temperature
  double lambda = 1.0;       // MI regularization weight
  double mixup_alpha = 0.4;  // Beta(alpha, alpha) mixing parameter
  int batch = 32;
  double w_ser = 1.0;  // stage-1 loss weights
  double w_cl = 1.0;
  double w_mi = 1.0;
};

struct CrossEntropyOut {
  double value = 0.0;
  Matrix d_logits;
};

// Mean over the batch of -log softmax(logits)[label].
CrossEntropyOut cross_entropy(const Matrix& logits, std::span<const int> labels);

struct ContrastiveOut {
  double value = 0.0;
  Matrix d_anchor;     // gradient w.r.t. the anchor rows (T)
  Matrix d_candidate;  // gradient w.r.t. the candidate rows (H)
};

// Anchor-to-candidate InfoNCE-style alignment over cosine similarity:
// mean_i of -log[ exp(sim(t_i,h_i)/tau) / sum_j exp(sim(t_i,h_j)/tau) ].
// One-directional by default; `symmetric` averages both directions.
ContrastiveOut contrastive_alignment(const Matrix& anchor, const Matrix& candidate,
                                     double tau, bool symmetric = false);

struct InfoNceOut {
  double value = 0.0;
  double mi_lower_bound = 0.0;  // log(B) - value
  Matrix d_target;
  Matrix d_pred;
};

// Same functional form as contrastive_alignment on (target, predicted) pairs,
// plus the standard lower bound on the mutual information between them.
InfoNceOut infonce(const Matrix& target, const Matrix& predicted, double tau);

struct GanDLossOut {
  double value = 0.0;
  Vec d_real;
  Vec d_fake;
};

// -mean log sigmoid(real) - mean log(1 - sigmoid(fake)), in softplus form.
GanDLossOut gan_d_loss(std::span<const double> real_logits, std::span<const double> fake_logits);

struct GanGLossOut {
  double value = 0.0;
  Vec d_fake;
};

// Non-saturating generator loss -mean log sigmoid(fake).
GanGLossOut gan_g_loss(std::span<const double> fake_logits);

struct BceOut {
  double value = 0.0;
  Vec d_logits;
};

// Binary cross-entropy on logits against soft targets in [0,1]. This is the
// discriminator loss used when mixup blends real/fake inputs; with targets
// all 1 (or all 0) it reduces to the corresponding gan_d_loss term.
BceOut bce_with_logits(std::span<const double> logits, std::span<const double> targets);

struct MixupOut {
  Vec features;
  Vec label;  // soft label, same convex combination as features
  double lambda = 1.0;
};

// lambda ~ Beta(alpha, alpha); output = lambda*a + (1-lambda)*b.
MixupOut mixup(std::span<const double> a_features, std::span<const double> a_label,
               std::span<const double> b_features, std::span<const double> b_label,
               double alpha, RngStream& rng);

// Deterministic variant with the mixing weight supplied by the caller.
MixupOut mixup_with_lambda(std::span<const double> a_features, std::span<const double> a_label,
                           std::span<const double> b_features, std::span<const double> b_label,
                           double lambda);

}  // namespace miaug

#endif  // MIAUG_LOSSES_HPP
