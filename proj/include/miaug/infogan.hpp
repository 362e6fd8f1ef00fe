// Stage 2: adversarial training of a linear generator and discriminator
// over audio features. The generator input is the concatenation
// [noise z | onehot(emotion c) | text t], and its output is regularized to
// stay mutually informative with (c, t) through the stage-1 heads:
// the classifier head scores generated samples against their conditioning
// label (cross-entropy) and the text projector maps them back into text
// space for an InfoNCE term against the conditioning text.
//
// The q heads are the baseline's layers, shared by construction; they stay
// frozen by default and are fine-tuned only when freeze_q is off.

#ifndef MIAUG_INFOGAN_HPP
#define MIAUG_INFOGAN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miaug/baseline.hpp"
#include "miaug/corpus.hpp"
#include "miaug/linear.hpp"
#include "miaug/rng.hpp"

namespace miaug {

struct GanConfig {
  int d_z = 16;
  double lambda = 1.0;  // MI regularization weight
  double lr_d = 1e-4;
  double lr_g = 1e-4;
  int epochs = 200;
  int batch = 32;
  double tau = 0.07;
  bool freeze_q = true;
  bool use_mixup = true;
  double mixup_alpha = 0.4;
  // Adam normalizes away the gradient-magnitude gap between the mean-matching
  // pull (first order in the discriminator weight) and the noise-gain shrink
  // (second order), which collapses the generated variance for linear
  // players; plain SGD keeps that ratio, so it is the default here.
  std::string optimizer = "sgd";  // "sgd" | "adam"
  std::uint64_t seed = 1;
  std::string rng_label = "stage2";

  void validate() const;
};

struct GanBundle {
  LinearLayer generator;      // [d_audio x (d_z + K + d_text)]
  LinearLayer discriminator;  // [1 x d_audio]
  int d_z = 16;
  int num_classes = 0;
  int d_text = 0;
  double lambda = 1.0;
  bool freeze_q = true;

  int conditioning_dim() const { return d_z + num_classes + d_text; }
};

// [z | onehot(label) | text], the generator input layout.
Matrix concat_conditioning(const Matrix& z, std::span<const int> labels, const Matrix& text,
                           int num_classes);

Matrix sample_noise(int count, int d_z, RngStream& rng);

// Hhat = G([z | onehot(c) | t]); deterministic given inputs.
Matrix generate(const GanBundle& bundle, const Matrix& z, std::span<const int> labels,
                const Matrix& text);

struct GanTraceRow {
  int epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;      // adversarial part only
  double loss_iy = 0.0;     // label-code cross-entropy through the shared head
  double loss_it = 0.0;     // text-code InfoNCE through the shared projector
  double mi_bound_t = 0.0;  // log(batch) - loss_it
};

struct GanTrainResult {
  GanBundle bundle;
  BaselineModel q_heads;  // == input baseline unless freeze_q was off
  std::vector<GanTraceRow> trace;
};

GanTrainResult train_infogan(const Corpus& corpus, std::span<const int> train_indices,
                             const BaselineModel& baseline, const GanConfig& cfg);
GanTrainResult train_infogan(const Corpus& corpus, const BaselineModel& baseline,
                             const GanConfig& cfg);

struct MiDiagnostics {
  double loss_iy = 0.0;
  double loss_it = 0.0;
  double mi_bound_t = 0.0;
  double q_label_accuracy = 0.0;
};

// Pure evaluation of the MI heads on generated samples; no updates.
MiDiagnostics mi_diagnostics(const GanBundle& bundle, const BaselineModel& q_heads,
                             const Matrix& z, std::span<const int> labels, const Matrix& text,
                             double tau = 0.07);

// Logistic discriminator fitted by full-batch Adam against fixed sample
// sets; the probe behind the optimal-discriminator calibration check.
LinearLayer fit_discriminator(const Matrix& real, const Matrix& fake, double lr, int steps,
                              std::uint64_t seed);

void write_gan_trace_csv(std::span<const GanTraceRow> trace, const std::string& path);

}  // namespace miaug

#endif  // MIAUG_INFOGAN_HPP
