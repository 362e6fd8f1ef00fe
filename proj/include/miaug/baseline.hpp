// Stage 1: train the emotion classifier head and the audio-to-text projector
// on fixed features with the combined objective
//   w_ser * cross_entropy + w_cl * contrastive_alignment + w_mi * InfoNCE.
//
// Features come from files here, so the alignment term carries no parameter
// gradient and is tracked as a monitoring quantity; the head learns from the
// cross-entropy term and the projector from the InfoNCE term. Both layers are
// reused as the shared mutual-information heads in stage 2.

#ifndef MIAUG_BASELINE_HPP
#define MIAUG_BASELINE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miaug/corpus.hpp"
#include "miaug/eval.hpp"
#include "miaug/linear.hpp"

namespace miaug {

struct BaselineConfig {
  int epochs = 100;
  int batch = 32;
  double lr = 1e-3;
  double tau = 0.07;
  double w_ser = 1.0;
  double w_cl = 1.0;
  double w_mi = 1.0;
  bool symmetric_cl = false;
  std::uint64_t seed = 1;
  std::string rng_label = "stage1";

  void validate() const;
};

struct Stage1EpochLoss {
  double total = 0.0;
  double ser = 0.0;
  double cl = 0.0;
  double mi = 0.0;
};

struct BaselineModel {
  LinearLayer classifier_head;  // W_y, b_y  [K x d_audio]
  LinearLayer text_projector;   // W_t, b_t  [d_text x d_audio]
  double tau = 0.07;
  std::vector<Stage1EpochLoss> loss_trace;
};

BaselineModel train_baseline(const Corpus& corpus, std::span<const int> train_indices,
                             const BaselineConfig& cfg);
BaselineModel train_baseline(const Corpus& corpus, const BaselineConfig& cfg);

struct Prediction {
  Matrix probs;             // rows sum to 1
  std::vector<int> labels;  // row argmax, ties toward the lower index
};

Prediction predict(const BaselineModel& model, const Matrix& audio);

EvalResult evaluate_uar(const BaselineModel& model, const Corpus& corpus,
                        std::span<const int> indices);
EvalResult evaluate_uar(const BaselineModel& model, const Corpus& corpus);

// Mean InfoNCE mutual-information bound between real text and projected
// audio over consecutive batches; the stage-1 health probe.
double projector_mi_bound(const BaselineModel& model, const Corpus& corpus,
                          std::span<const int> indices, int batch);

}  // namespace miaug

#endif  // MIAUG_BASELINE_HPP
