#include "miaug/baseline.hpp"

#include <cmath>
#include <numeric>

#include "miaug/adam.hpp"
#include "miaug/losses.hpp"
#include "miaug/rng.hpp"

namespace miaug {

void BaselineConfig::validate() const {
  check(epochs >= 1, "stage1: epochs must be >= 1");
  check(batch >= 1, "stage1: batch must be >= 1");
  check(lr > 0.0, "stage1: lr must be positive");
  check(tau > 0.0, "stage1: tau must be positive");
  check(w_ser >= 0.0 && w_cl >= 0.0 && w_mi >= 0.0, "stage1: loss weights must be >= 0");
  check(batch >= 2 || (w_cl == 0.0 && w_mi == 0.0),
        "stage1: batch size 1 with contrastive terms active; InfoNCE needs >= 2");
}

BaselineModel train_baseline(const Corpus& corpus, std::span<const int> train_indices,
                             const BaselineConfig& cfg) {
  corpus.validate();
  cfg.validate();
  check(!train_indices.empty(), "stage1: empty training set");
  const bool contrastive_active = cfg.w_cl > 0.0 || cfg.w_mi > 0.0;
  check(static_cast<int>(train_indices.size()) >= 2 || !contrastive_active,
        "stage1: need >= 2 training records when contrastive terms are active");
  check(cfg.w_cl == 0.0 || corpus.d_text == corpus.d_audio,
        "stage1: contrastive alignment needs d_text == d_audio (cosine between t and h), got ",
        corpus.d_text, " vs ", corpus.d_audio);

  RngStream rng = RngStream::derive(cfg.seed, cfg.rng_label);
  BaselineModel model;
  model.tau = cfg.tau;
  model.classifier_head = LinearLayer::random_init(corpus.num_classes, corpus.d_audio, rng);
  model.text_projector = LinearLayer::random_init(corpus.d_text, corpus.d_audio, rng);

  LayerAdam head_opt(cfg.lr);
  LayerAdam proj_opt(cfg.lr);

  std::vector<int> order(train_indices.begin(), train_indices.end());
  model.loss_trace.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    Stage1EpochLoss epoch_loss;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t len = std::min<std::size_t>(cfg.batch, order.size() - start);
      if (len < 2 && contrastive_active) continue;  // trailing singleton
      const std::span<const int> chunk(order.data() + start, len);
      BatchView batch = gather_batch(corpus, chunk);

      double batch_total = 0.0;
      if (cfg.w_ser > 0.0) {
        const Matrix logits = linear_forward(model.classifier_head, batch.audio);
        CrossEntropyOut ce = cross_entropy(logits, batch.labels);
        epoch_loss.ser += ce.value;
        batch_total += cfg.w_ser * ce.value;
        scale_inplace(ce.d_logits, cfg.w_ser);
        const LinearGrads g = linear_backward(model.classifier_head, batch.audio, ce.d_logits);
        head_opt.step(model.classifier_head, g.d_weight, g.d_bias);
      }
      if (cfg.w_cl > 0.0) {
        // No trainable parameters downstream of raw features; monitored only.
        const ContrastiveOut cl =
            contrastive_alignment(batch.text, batch.audio, cfg.tau, cfg.symmetric_cl);
        epoch_loss.cl += cl.value;
        batch_total += cfg.w_cl * cl.value;
      }
      if (cfg.w_mi > 0.0) {
        const Matrix projected = linear_forward(model.text_projector, batch.audio);
        InfoNceOut mi = infonce(batch.text, projected, cfg.tau);
        epoch_loss.mi += mi.value;
        batch_total += cfg.w_mi * mi.value;
        scale_inplace(mi.d_pred, cfg.w_mi);
        const LinearGrads g = linear_backward(model.text_projector, batch.audio, mi.d_pred);
        proj_opt.step(model.text_projector, g.d_weight, g.d_bias);
      }
      epoch_loss.total += batch_total;
      ++batches;
    }
    check(batches > 0, "stage1: no usable batches (all chunks below size 2)");
    epoch_loss.total /= batches;
    epoch_loss.ser /= batches;
    epoch_loss.cl /= batches;
    epoch_loss.mi /= batches;
    check(std::isfinite(epoch_loss.total), "stage1: non-finite loss at epoch ", epoch);
    model.loss_trace.push_back(epoch_loss);
  }
  return model;
}

BaselineModel train_baseline(const Corpus& corpus, const BaselineConfig& cfg) {
  std::vector<int> all(corpus.records.size());
  std::iota(all.begin(), all.end(), 0);
  return train_baseline(corpus, all, cfg);
}

Prediction predict(const BaselineModel& model, const Matrix& audio) {
  const Matrix logits = linear_forward(model.classifier_head, audio);
  Prediction pred;
  pred.probs = softmax_rows(logits);
  pred.labels.resize(audio.rows());
  for (int i = 0; i < audio.rows(); ++i) pred.labels[i] = argmax(pred.probs.row(i));
  return pred;
}

EvalResult evaluate_uar(const BaselineModel& model, const Corpus& corpus,
                        std::span<const int> indices) {
  check(!indices.empty(), "evaluate_uar: empty record set");
  BatchView batch = gather_batch(corpus, indices);
  const Prediction pred = predict(model, batch.audio);
  return eval_from_predictions(batch.labels, pred.labels, corpus.num_classes);
}

EvalResult evaluate_uar(const BaselineModel& model, const Corpus& corpus) {
  std::vector<int> all(corpus.records.size());
  std::iota(all.begin(), all.end(), 0);
  return evaluate_uar(model, corpus, all);
}

double projector_mi_bound(const BaselineModel& model, const Corpus& corpus,
                          std::span<const int> indices, int batch) {
  check(batch >= 2, "projector_mi_bound: batch must be >= 2");
  check(static_cast<int>(indices.size()) >= batch, "projector_mi_bound: need at least ",
        batch, " records");
  double total = 0.0;
  int batches = 0;
  for (std::size_t start = 0; start + batch <= indices.size(); start += batch) {
    const std::span<const int> chunk(indices.data() + start, static_cast<std::size_t>(batch));
    BatchView view = gather_batch(corpus, chunk);
    const Matrix projected = linear_forward(model.text_projector, view.audio);
    total += infonce(view.text, projected, model.tau).mi_lower_bound;
    ++batches;
  }
  return total / batches;
}

}  // namespace miaug
