#include "miaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "miaug/adam.hpp"
#include "miaug/losses.hpp"

namespace miaug {

std::vector<long> AugmentedSet::histogram() const {
  std::vector<long> counts(static_cast<std::size_t>(num_classes), 0);
  for (const AugmentedItem& item : items) {
    check(item.label >= 0 && item.label < num_classes, "augmented set: label ", item.label,
          " out of range");
    ++counts[item.label];
  }
  return counts;
}

namespace {

void check_bundle_dims(const Corpus& corpus, const GanBundle& bundle) {
  check(bundle.generator.out_dim() == corpus.d_audio, "augment: generator emits ",
        bundle.generator.out_dim(), " dims, corpus has d_audio=", corpus.d_audio);
  check(bundle.num_classes == corpus.num_classes, "augment: bundle trained for ",
        bundle.num_classes, " classes, corpus has ", corpus.num_classes);
  check(bundle.d_text == corpus.d_text, "augment: bundle conditioned on d_text=",
        bundle.d_text, ", corpus has ", corpus.d_text);
}

Vec to_vec(std::span<const double> row) { return Vec(row.begin(), row.end()); }

}  // namespace

AugmentedSet real_only_set(const Corpus& corpus, std::span<const int> train_indices) {
  corpus.validate();
  check(!train_indices.empty(), "real_only_set: empty training set");
  AugmentedSet set;
  set.d_audio = corpus.d_audio;
  set.d_text = corpus.d_text;
  set.num_classes = corpus.num_classes;
  set.items.reserve(train_indices.size());
  for (int i : train_indices) {
    const FeatureRecord& r = corpus.records[i];
    set.items.push_back({r.audio, r.text, r.label, Origin::real, Origin::real});
  }
  return set;
}

AugmentedSet augment_ser(const Corpus& corpus, std::span<const int> train_indices,
                         const GanBundle& bundle, const BaselineModel& q_heads,
                         RngStream& rng) {
  (void)q_heads;
  corpus.validate();
  check(!train_indices.empty(), "augment_ser: empty training set");
  check_bundle_dims(corpus, bundle);

  const BatchView batch = gather_batch(corpus, train_indices);
  const Matrix z = sample_noise(batch.audio.rows(), bundle.d_z, rng);
  const Matrix fake = generate(bundle, z, batch.labels, batch.text);

  AugmentedSet set;
  set.d_audio = corpus.d_audio;
  set.d_text = corpus.d_text;
  set.num_classes = corpus.num_classes;
  set.items.reserve(2 * train_indices.size());
  for (int i = 0; i < batch.audio.rows(); ++i) {
    AugmentedItem real;
    real.audio = to_vec(batch.audio.row(i));
    real.text = to_vec(batch.text.row(i));
    real.label = batch.labels[i];
    set.items.push_back(std::move(real));

    AugmentedItem gen;
    gen.audio = to_vec(fake.row(i));
    gen.label = batch.labels[i];
    gen.origin_audio = Origin::generated;
    set.items.push_back(std::move(gen));
  }
  return set;
}

AugmentedSet augment_multimodal(const Corpus& corpus, std::span<const int> train_indices,
                                const GanBundle& bundle, const BaselineModel& q_heads,
                                RngStream& rng) {
  corpus.validate();
  check(!train_indices.empty(), "augment_multimodal: empty training set");
  check_bundle_dims(corpus, bundle);
  check(q_heads.text_projector.in_dim() == corpus.d_audio &&
            q_heads.text_projector.out_dim() == corpus.d_text,
        "augment_multimodal: projector shape mismatch");

  const BatchView batch = gather_batch(corpus, train_indices);
  const Matrix z = sample_noise(batch.audio.rows(), bundle.d_z, rng);
  const Matrix fake = generate(bundle, z, batch.labels, batch.text);
  const Matrix text_prime = linear_forward(q_heads.text_projector, fake);

  AugmentedSet set;
  set.d_audio = corpus.d_audio;
  set.d_text = corpus.d_text;
  set.num_classes = corpus.num_classes;
  set.items.reserve(4 * train_indices.size());
  for (int i = 0; i < batch.audio.rows(); ++i) {
    const Vec real_audio = to_vec(batch.audio.row(i));
    const Vec real_text = to_vec(batch.text.row(i));
    const Vec gen_audio = to_vec(fake.row(i));
    const Vec gen_text = to_vec(text_prime.row(i));
    const int label = batch.labels[i];
    set.items.push_back({real_audio, real_text, label, Origin::real, Origin::real});
    set.items.push_back({real_audio, gen_text, label, Origin::real, Origin::generated});
    set.items.push_back({gen_audio, real_text, label, Origin::generated, Origin::real});
    set.items.push_back({gen_audio, gen_text, label, Origin::generated, Origin::generated});
  }
  return set;
}

TextPrior fit_text_prior(const Corpus& corpus, std::span<const int> indices,
                         bool zero_fallback) {
  corpus.validate();
  TextPrior prior;
  prior.d_text = corpus.d_text;
  prior.mean.assign(corpus.num_classes, Vec(static_cast<std::size_t>(corpus.d_text), 0.0));
  prior.stddev.assign(corpus.num_classes, Vec(static_cast<std::size_t>(corpus.d_text), 0.0));
  prior.fitted.assign(corpus.num_classes, zero_fallback);

  std::vector<long> counts(static_cast<std::size_t>(corpus.num_classes), 0);
  for (int i : indices) {
    const FeatureRecord& r = corpus.records[i];
    ++counts[r.label];
    for (int j = 0; j < corpus.d_text; ++j) prior.mean[r.label][j] += r.text[j];
  }
  for (int k = 0; k < corpus.num_classes; ++k) {
    if (counts[k] == 0) continue;
    for (int j = 0; j < corpus.d_text; ++j) prior.mean[k][j] /= counts[k];
    prior.fitted[k] = true;
  }
  for (int i : indices) {
    const FeatureRecord& r = corpus.records[i];
    for (int j = 0; j < corpus.d_text; ++j) {
      const double d = r.text[j] - prior.mean[r.label][j];
      prior.stddev[r.label][j] += d * d;
    }
  }
  for (int k = 0; k < corpus.num_classes; ++k) {
    if (counts[k] == 0) continue;
    for (int j = 0; j < corpus.d_text; ++j) {
      prior.stddev[k][j] = std::sqrt(prior.stddev[k][j] / counts[k]);
    }
  }
  return prior;
}

AugmentedSet balance_classes(const Corpus& corpus, std::span<const int> train_indices,
                             const GanBundle& bundle, const BaselineModel& q_heads,
                             const TextPrior& text_prior, RngStream& rng) {
  corpus.validate();
  check(!train_indices.empty(), "balance_classes: empty training set");
  check_bundle_dims(corpus, bundle);
  check(text_prior.d_text == corpus.d_text, "balance_classes: prior d_text=",
        text_prior.d_text, ", corpus has ", corpus.d_text);
  check(static_cast<int>(text_prior.fitted.size()) == corpus.num_classes,
        "balance_classes: prior covers ", text_prior.fitted.size(), " classes, corpus has ",
        corpus.num_classes);

  AugmentedSet set;
  set.d_audio = corpus.d_audio;
  set.d_text = corpus.d_text;
  set.num_classes = corpus.num_classes;
  for (int i : train_indices) {
    const FeatureRecord& r = corpus.records[i];
    set.items.push_back({r.audio, r.text, r.label, Origin::real, Origin::real});
  }

  const std::vector<long> counts = class_histogram(corpus, train_indices);
  const long target = *std::max_element(counts.begin(), counts.end());
  for (int k = 0; k < corpus.num_classes; ++k) {
    const long missing = target - counts[k];
    if (missing == 0) continue;
    check(text_prior.fitted[k], "balance_classes: class ", k,
          " has no fitted text prior (unknown class)");
    const int n = static_cast<int>(missing);
    Matrix text(n, corpus.d_text);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < corpus.d_text; ++j) {
        text(i, j) = text_prior.mean[k][j] + text_prior.stddev[k][j] * rng.gaussian();
      }
    }
    const Matrix z = sample_noise(n, bundle.d_z, rng);
    const std::vector<int> labels(static_cast<std::size_t>(n), k);
    const Matrix fake = generate(bundle, z, labels, text);
    const Matrix text_prime = linear_forward(q_heads.text_projector, fake);
    for (int i = 0; i < n; ++i) {
      set.items.push_back({to_vec(fake.row(i)), to_vec(text_prime.row(i)), k,
                           Origin::generated, Origin::generated});
    }
  }
  return set;
}

void FinalTrainConfig::validate() const {
  check(epochs >= 1, "stage3: epochs must be >= 1");
  check(batch >= 1, "stage3: batch must be >= 1");
  check(lr > 0.0, "stage3: lr must be positive");
}

namespace {

struct FlatItems {
  Matrix inputs;
  std::vector<int> labels;
};

FlatItems flatten_items(const AugmentedSet& set, ClassifierMode mode,
                        std::span<const int> item_order) {
  const int in_dim =
      mode == ClassifierMode::audio ? set.d_audio : set.d_audio + set.d_text;
  FlatItems flat;
  flat.inputs = Matrix(static_cast<int>(item_order.size()), in_dim);
  flat.labels.resize(item_order.size());
  for (int row = 0; row < static_cast<int>(item_order.size()); ++row) {
    const AugmentedItem& item = set.items[item_order[row]];
    check(static_cast<int>(item.audio.size()) == set.d_audio, "stage3: item audio dim ",
          item.audio.size(), " != ", set.d_audio);
    int col = 0;
    for (double x : item.audio) flat.inputs(row, col++) = x;
    if (mode == ClassifierMode::fusion) {
      check(item.has_text(), "stage3: fusion mode needs a text feature on every item");
      check(static_cast<int>(item.text.size()) == set.d_text, "stage3: item text dim ",
            item.text.size(), " != ", set.d_text);
      for (double x : item.text) flat.inputs(row, col++) = x;
    }
    flat.labels[row] = item.label;
  }
  return flat;
}

}  // namespace

FinalClassifier train_final_classifier(const AugmentedSet& augmented, ClassifierMode mode,
                                       const FinalTrainConfig& cfg,
                                       const AugmentResampler& resample) {
  cfg.validate();
  check(!augmented.items.empty(), "stage3: empty augmented set");
  check(augmented.num_classes >= 1 && augmented.d_audio >= 1, "stage3: bad set header");

  const int in_dim = mode == ClassifierMode::audio ? augmented.d_audio
                                                   : augmented.d_audio + augmented.d_text;
  RngStream rng = RngStream::derive(cfg.seed, cfg.rng_label);
  FinalClassifier classifier;
  classifier.mode = mode;
  classifier.d_audio = augmented.d_audio;
  classifier.d_text = augmented.d_text;
  classifier.num_classes = augmented.num_classes;
  classifier.head = LinearLayer::random_init(augmented.num_classes, in_dim, rng);

  LayerAdam opt(cfg.lr);
  AugmentedSet working;  // holds resampled sets; unused otherwise
  classifier.loss_trace.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const AugmentedSet* active = &augmented;
    if (resample && epoch > 0) {
      working = resample(epoch);
      check(working.d_audio == augmented.d_audio && working.d_text == augmented.d_text &&
                working.num_classes == augmented.num_classes,
            "stage3: resampled set header changed");
      active = &working;
    }
    std::vector<int> order(active->items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t len = std::min<std::size_t>(cfg.batch, order.size() - start);
      const std::span<const int> chunk(order.data() + start, len);
      const FlatItems flat = flatten_items(*active, mode, chunk);
      const Matrix logits = linear_forward(classifier.head, flat.inputs);
      CrossEntropyOut ce = cross_entropy(logits, flat.labels);
      const LinearGrads g = linear_backward(classifier.head, flat.inputs, ce.d_logits);
      opt.step(classifier.head, g.d_weight, g.d_bias);
      check(std::isfinite(ce.value), "stage3: non-finite loss at epoch ", epoch);
      epoch_loss += ce.value;
      ++batches;
    }
    classifier.loss_trace.push_back(epoch_loss / batches);
  }
  return classifier;
}

Prediction predict_classifier(const FinalClassifier& classifier, const Matrix& audio,
                              const Matrix& text) {
  Matrix inputs;
  if (classifier.mode == ClassifierMode::audio) {
    inputs = audio;
  } else {
    check(text.rows() == audio.rows(), "predict: audio/text row counts differ");
    inputs = Matrix(audio.rows(), audio.cols() + text.cols());
    for (int i = 0; i < audio.rows(); ++i) {
      int col = 0;
      for (int j = 0; j < audio.cols(); ++j) inputs(i, col++) = audio(i, j);
      for (int j = 0; j < text.cols(); ++j) inputs(i, col++) = text(i, j);
    }
  }
  const Matrix logits = linear_forward(classifier.head, inputs);
  Prediction pred;
  pred.probs = softmax_rows(logits);
  pred.labels.resize(inputs.rows());
  for (int i = 0; i < inputs.rows(); ++i) pred.labels[i] = argmax(pred.probs.row(i));
  return pred;
}

EvalResult evaluate_classifier(const FinalClassifier& classifier, const Corpus& corpus,
                               std::span<const int> indices) {
  check(!indices.empty(), "evaluate_classifier: empty record set");
  const BatchView batch = gather_batch(corpus, indices);
  const Prediction pred = predict_classifier(classifier, batch.audio, batch.text);
  return eval_from_predictions(batch.labels, pred.labels, corpus.num_classes);
}

void write_augmented_csv(const AugmentedSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  check(out.good(), "cannot open ", path, " for writing");
  out << "label,origin_audio,origin_text";
  for (int j = 0; j < set.d_audio; ++j) out << ",h_" << j;
  for (int j = 0; j < set.d_text; ++j) out << ",t_" << j;
  out << "\n";
  char buf[40];
  for (const AugmentedItem& item : set.items) {
    out << item.label << "," << (item.origin_audio == Origin::real ? "real" : "generated")
        << ",";
    if (item.has_text()) {
      out << (item.origin_text == Origin::real ? "real" : "generated");
    } else {
      out << "none";
    }
    for (double x : item.audio) {
      std::snprintf(buf, sizeof(buf), ",%.17g", x);
      out << buf;
    }
    for (int j = 0; j < set.d_text; ++j) {
      const double x = item.has_text() ? item.text[j] : 0.0;
      std::snprintf(buf, sizeof(buf), ",%.17g", x);
      out << buf;
    }
    out << "\n";
  }
  check(out.good(), "write failed for ", path);
}

}  // namespace miaug
