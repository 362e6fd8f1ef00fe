// Feature corpus: records of paired audio/text features with emotion labels
// and speaker ids, a synthetic generator whose Bayes-optimal classifier is
// known in closed form, bit-exact binary persistence plus a CSV path, and
// leave-one-speaker-out split planning.

#ifndef MIAUG_CORPUS_HPP
#define MIAUG_CORPUS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miaug/matrix.hpp"

namespace miaug {

struct FeatureRecord {
  Vec audio;  // h, [d_audio]
  Vec text;   // t, [d_text]
  int label = 0;
  std::string speaker;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct Corpus {
  int d_audio = 0;
  int d_text = 0;
  int num_classes = 0;
  std::vector<FeatureRecord> records;
  std::string provenance;

  void validate() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct SynthConfig {
  int num_classes = 4;
  int d_audio = 32;
  int d_text = 32;
  int num_speakers = 10;
  int samples_per_class = 40;
  std::vector<int> per_class_counts;  // overrides samples_per_class when nonempty
  double separation = 6.0;            // distance of class means from the origin
  double class_noise = 1.0;           // within-class feature stddev
  double speaker_offset_scale = 0.25;
  double text_noise = 0.5;
  std::uint64_t seed = 1;

  std::vector<int> resolved_counts() const;
  void validate() const;
};

// Everything needed to evaluate the generative model in closed form.
struct OracleSpec {
  std::vector<Vec> class_means;      // K x d_audio
  Vec class_sigmas;                  // per-class noise stddev
  std::vector<Vec> speaker_offsets;  // S x d_audio
  Matrix text_coupling;              // d_text x d_audio; t = M*mu_k + noise
  double text_noise = 0.0;
  Vec class_priors;

  // argmax_k prior_k * p(h | k), the mixture over speakers marginalized out.
  int bayes_predict(std::span<const double> audio) const;
  // Fraction of corpus records the Bayes rule labels correctly.
  double bayes_accuracy(const Corpus& corpus) const;
};

struct SynthResult {
  Corpus corpus;
  OracleSpec oracle;
};

// Per class k: h = mu_k + speaker_offset + N(0, sigma^2 I),
// t = M*mu_k + N(0, text_noise^2 I). The shared mu_k makes label, audio and
// text mutually dependent, which is what the MI terms need to latch onto.
SynthResult synth_corpus(const SynthConfig& cfg);

// Binary format: magic "MIAUG1", header (K, d_audio, d_text, record count,
// speaker-table length), speaker string table, provenance string, then
// fixed-stride records of little-endian u32 speaker/label and f64 features.
void write_corpus(const Corpus& corpus, const std::string& path);
Corpus read_corpus(const std::string& path);

// CSV schema: speaker,label,h_0..h_{da-1},t_0..t_{dt-1} with a header line.
void write_corpus_csv(const Corpus& corpus, const std::string& path);
Corpus read_corpus_csv(const std::string& path);

struct LosoFold {
  std::string held_out_speaker;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

// One fold per distinct speaker, ordered by speaker id. Requires >= 2 speakers.
std::vector<LosoFold> loso_splits(const Corpus& corpus);

std::vector<long> class_histogram(std::span<const FeatureRecord> records, int num_classes);
std::vector<long> class_histogram(const Corpus& corpus, std::span<const int> indices);

// Gathers the batch matrices and labels for a set of record indices.
struct BatchView {
  Matrix audio;  // [n x d_audio]
  Matrix text;   // [n x d_text]
  std::vector<int> labels;
};
BatchView gather_batch(const Corpus& corpus, std::span<const int> indices);

}  // namespace miaug

#endif  // MIAUG_CORPUS_HPP
