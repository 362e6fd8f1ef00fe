#include "miaug/losses.hpp"

#include <cmath>

namespace miaug {

CrossEntropyOut cross_entropy(const Matrix& logits, std::span<const int> labels) {
  const int batch = logits.rows();
  const int num_classes = logits.cols();
  check(batch >= 1, "cross_entropy: empty batch");
  check(static_cast<int>(labels.size()) == batch, "cross_entropy: ", labels.size(),
        " labels for batch of ", batch);
  for (int i = 0; i < batch; ++i) {
    check(labels[i] >= 0 && labels[i] < num_classes, "cross_entropy: label ", labels[i],
          " out of range [0,", num_classes, ") at row ", i);
  }

  CrossEntropyOut out;
  out.d_logits = softmax_rows(logits);
  const double inv_b = 1.0 / batch;
  for (int i = 0; i < batch; ++i) {
    out.value += log_sum_exp(logits.row(i)) - logits(i, labels[i]);
    out.d_logits(i, labels[i]) -= 1.0;
  }
  out.value *= inv_b;
  scale_inplace(out.d_logits, inv_b);
  return out;
}

namespace {

// Row-normalized copy plus the row norms; rejects zero rows.
void normalize_rows(const Matrix& m, const char* arg_name, Matrix& unit, Vec& norms) {
  unit = m;
  norms.resize(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    const double n = norm2(m.row(i));
    check(n > 0.0, "contrastive: zero-norm row ", i, " in ", arg_name);
    norms[i] = n;
    for (int j = 0; j < m.cols(); ++j) unit(i, j) /= n;
  }
}

// One direction of the contrastive loss. Gradients are accumulated into
// d_anchor/d_candidate with the given weight so the symmetric variant can
// average two calls.
double contrastive_one_way(const Matrix& anchor, const Matrix& candidate, double tau,
                           double weight, Matrix& d_anchor, Matrix& d_candidate) {
  const int batch = anchor.rows();
  Matrix u, v;
  Vec nu, nv;
  normalize_rows(anchor, "anchor", u, nu);
  normalize_rows(candidate, "candidate", v, nv);

  Matrix cos_sim = matmul_bt(u, v);  // [B x B]
  Matrix scores = cos_sim;
  scale_inplace(scores, 1.0 / tau);

  double value = 0.0;
  Matrix g(batch, batch);  // d(loss)/d(cos_sim)
  const double coef = 1.0 / (batch * tau);
  for (int i = 0; i < batch; ++i) {
    const Vec p = softmax(scores.row(i));
    value += log_sum_exp(scores.row(i)) - scores(i, i);
    for (int j = 0; j < batch; ++j) g(i, j) = p[j] * coef;
    g(i, i) -= coef;
  }
  value /= batch;

  // d cos(u_i, v_j) / d t_i = (v_j - cos_ij * u_i) / |t_i|
  for (int i = 0; i < batch; ++i) {
    double diag = 0.0;  // sum_j g_ij * cos_ij
    for (int j = 0; j < batch; ++j) diag += g(i, j) * cos_sim(i, j);
    for (int k = 0; k < anchor.cols(); ++k) {
      double acc = 0.0;
      for (int j = 0; j < batch; ++j) acc += g(i, j) * v(j, k);
      d_anchor(i, k) += weight * (acc - diag * u(i, k)) / nu[i];
    }
  }
  for (int j = 0; j < batch; ++j) {
    double diag = 0.0;  // sum_i g_ij * cos_ij
    for (int i = 0; i < batch; ++i) diag += g(i, j) * cos_sim(i, j);
    for (int k = 0; k < candidate.cols(); ++k) {
      double acc = 0.0;
      for (int i = 0; i < batch; ++i) acc += g(i, j) * u(i, k);
      d_candidate(j, k) += weight * (acc - diag * v(j, k)) / nv[j];
    }
  }
  return weight * value;
}

}  // namespace

ContrastiveOut contrastive_alignment(const Matrix& anchor, const Matrix& candidate,
                                     double tau, bool symmetric) {
  check(tau > 0.0, "contrastive: tau must be positive, got ", tau);
  check(anchor.rows() == candidate.rows() && anchor.cols() == candidate.cols(),
        "contrastive: shape mismatch ", anchor.rows(), "x", anchor.cols(), " vs ",
        candidate.rows(), "x", candidate.cols());
  check(anchor.rows() >= 2, "contrastive: batch must be >= 2, got ", anchor.rows());

  ContrastiveOut out;
  out.d_anchor = Matrix(anchor.rows(), anchor.cols());
  out.d_candidate = Matrix(candidate.rows(), candidate.cols());
  if (!symmetric) {
    out.value = contrastive_one_way(anchor, candidate, tau, 1.0, out.d_anchor, out.d_candidate);
  } else {
    out.value = contrastive_one_way(anchor, candidate, tau, 0.5, out.d_anchor, out.d_candidate);
    out.value +=
        contrastive_one_way(candidate, anchor, tau, 0.5, out.d_candidate, out.d_anchor);
  }
  return out;
}

InfoNceOut infonce(const Matrix& target, const Matrix& predicted, double tau) {
  ContrastiveOut cl = contrastive_alignment(target, predicted, tau);
  InfoNceOut out;
  out.value = cl.value;
  out.mi_lower_bound = std::log(static_cast<double>(target.rows())) - cl.value;
  out.d_target = std::move(cl.d_anchor);
  out.d_pred = std::move(cl.d_candidate);
  return out;
}

GanDLossOut gan_d_loss(std::span<const double> real_logits, std::span<const double> fake_logits) {
  check(!real_logits.empty() && !fake_logits.empty(), "gan_d_loss: empty logit set");
  GanDLossOut out;
  out.d_real.resize(real_logits.size());
  out.d_fake.resize(fake_logits.size());
  double real_term = 0.0;
  for (std::size_t i = 0; i < real_logits.size(); ++i) {
    real_term += softplus(-real_logits[i]);
    out.d_real[i] = -sigmoid(-real_logits[i]) / real_logits.size();
  }
  double fake_term = 0.0;
  for (std::size_t i = 0; i < fake_logits.size(); ++i) {
    fake_term += softplus(fake_logits[i]);
    out.d_fake[i] = sigmoid(fake_logits[i]) / fake_logits.size();
  }
  out.value = real_term / real_logits.size() + fake_term / fake_logits.size();
  return out;
}

GanGLossOut gan_g_loss(std::span<const double> fake_logits) {
  check(!fake_logits.empty(), "gan_g_loss: empty logit set");
  GanGLossOut out;
  out.d_fake.resize(fake_logits.size());
  for (std::size_t i = 0; i < fake_logits.size(); ++i) {
    out.value += softplus(-fake_logits[i]);
    out.d_fake[i] = -sigmoid(-fake_logits[i]) / fake_logits.size();
  }
  out.value /= fake_logits.size();
  return out;
}

BceOut bce_with_logits(std::span<const double> logits, std::span<const double> targets) {
  check(logits.size() == targets.size(), "bce_with_logits: ", logits.size(), " logits vs ",
        targets.size(), " targets");
  check(!logits.empty(), "bce_with_logits: empty input");
  BceOut out;
  out.d_logits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    check(targets[i] >= 0.0 && targets[i] <= 1.0, "bce_with_logits: target ", targets[i],
          " outside [0,1] at index ", i);
    out.value += softplus(logits[i]) - targets[i] * logits[i];
    out.d_logits[i] = (sigmoid(logits[i]) - targets[i]) / logits.size();
  }
  out.value /= logits.size();
  return out;
}

MixupOut mixup_with_lambda(std::span<const double> a_features, std::span<const double> a_label,
                           std::span<const double> b_features, std::span<const double> b_label,
                           double lambda) {
  check(a_features.size() == b_features.size(), "mixup: feature dims differ, ",
        a_features.size(), " vs ", b_features.size());
  check(a_label.size() == b_label.size(), "mixup: label dims differ, ", a_label.size(),
        " vs ", b_label.size());
  MixupOut out;
  out.lambda = lambda;
  out.features.resize(a_features.size());
  out.label.resize(a_label.size());
  for (std::size_t i = 0; i < a_features.size(); ++i) {
    out.features[i] = lambda * a_features[i] + (1.0 - lambda) * b_features[i];
  }
  for (std::size_t i = 0; i < a_label.size(); ++i) {
    out.label[i] = lambda * a_label[i] + (1.0 - lambda) * b_label[i];
  }
  return out;
}

MixupOut mixup(std::span<const double> a_features, std::span<const double> a_label,
               std::span<const double> b_features, std::span<const double> b_label,
               double alpha, RngStream& rng) {
  check(alpha > 0.0, "mixup: alpha must be positive, got ", alpha);
  const double lambda = rng.beta(alpha, alpha);
  return mixup_with_lambda(a_features, a_label, b_features, b_label, lambda);
}

}  // namespace miaug
