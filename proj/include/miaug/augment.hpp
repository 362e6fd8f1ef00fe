// Stage 3: build augmented training sets from the trained generator
// (2x doubling for audio-only SER, 4x real/generated combinations for the
// multimodal case, class balancing for imbalanced corpora) and train the
// final frozen-feature classifier heads.

#ifndef MIAUG_AUGMENT_HPP
#define MIAUG_AUGMENT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miaug/baseline.hpp"
#include "miaug/corpus.hpp"
#include "miaug/infogan.hpp"

namespace miaug {

enum class Origin : std::uint8_t { real = 0, generated = 1 };

struct AugmentedItem {
  Vec audio;
  Vec text;  // empty when the item carries no text modality
  int label = 0;
  Origin origin_audio = Origin::real;
  Origin origin_text = Origin::real;

  bool has_text() const { return !text.empty(); }
};

struct AugmentedSet {
  int d_audio = 0;
  int d_text = 0;
  int num_classes = 0;
  std::vector<AugmentedItem> items;

  std::vector<long> histogram() const;
};

// The un-augmented control: every real record as an item, nothing added.
AugmentedSet real_only_set(const Corpus& corpus, std::span<const int> train_indices);

// For each real (h, t, y): emit (h, y, real) and (G(z, y, t), y, generated).
// Output size is exactly 2N; generated items carry no text.
AugmentedSet augment_ser(const Corpus& corpus, std::span<const int> train_indices,
                         const GanBundle& bundle, const BaselineModel& q_heads,
                         RngStream& rng);

// For each real (h, t, y): with hhat = G(z, y, t) and t' = projector(hhat),
// emit (h,t), (h,t'), (hhat,t), (hhat,t'), all labeled y. Size exactly 4N.
AugmentedSet augment_multimodal(const Corpus& corpus, std::span<const int> train_indices,
                                const GanBundle& bundle, const BaselineModel& q_heads,
                                RngStream& rng);

// Per-class diagonal Gaussian over text features, the conditioning source
// for generation when no paired text exists.
struct TextPrior {
  int d_text = 0;
  std::vector<Vec> mean;    // K x d_text
  std::vector<Vec> stddev;  // K x d_text
  std::vector<bool> fitted;
};

// zero_fallback: classes with no records get a zero-mean, zero-spread prior
// instead of being left unfitted.
TextPrior fit_text_prior(const Corpus& corpus, std::span<const int> indices,
                         bool zero_fallback = false);

// Tops minority classes up to the majority count with generated samples
// conditioned on (z ~ prior, c = k, t ~ text_prior[k]); the result's class
// histogram is uniform.
AugmentedSet balance_classes(const Corpus& corpus, std::span<const int> train_indices,
                             const GanBundle& bundle, const BaselineModel& q_heads,
                             const TextPrior& text_prior, RngStream& rng);

enum class ClassifierMode { audio, fusion };

struct FinalTrainConfig {
  int epochs = 100;
  int batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::string rng_label = "stage3";

  void validate() const;
};

struct FinalClassifier {
  LinearLayer head;  // audio: [K x d_audio]; fusion: [K x (d_audio + d_text)]
  ClassifierMode mode = ClassifierMode::audio;
  int d_audio = 0;
  int d_text = 0;
  int num_classes = 0;
  std::vector<double> loss_trace;
};

// Optional per-epoch refresh of the augmented set (the resample flag);
// epoch index is passed in so refreshing stays deterministic.
using AugmentResampler = std::function<AugmentedSet(int epoch)>;

FinalClassifier train_final_classifier(const AugmentedSet& augmented, ClassifierMode mode,
                                       const FinalTrainConfig& cfg,
                                       const AugmentResampler& resample = nullptr);

Prediction predict_classifier(const FinalClassifier& classifier, const Matrix& audio,
                              const Matrix& text);

EvalResult evaluate_classifier(const FinalClassifier& classifier, const Corpus& corpus,
                               std::span<const int> indices);

// AugmentedSet persistence in the corpus CSV schema plus the origin columns.
void write_augmented_csv(const AugmentedSet& set, const std::string& path);

}  // namespace miaug

#endif  // MIAUG_AUGMENT_HPP
