// Corpus tests: synthetic generation determinism and oracle sanity,
// bit-exact file round-trips with corruption rejection, LOSO split
// properties, and histograms.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "miaug/corpus.hpp"

using namespace miaug;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/miaug_test_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.num_classes = 3;
  cfg.d_audio = 6;
  cfg.d_text = 6;
  cfg.num_speakers = 4;
  cfg.samples_per_class = 8;
  cfg.separation = 5.0;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("synth_corpus is deterministic per seed") {
  SynthConfig cfg = small_config();
  SynthResult a = synth_corpus(cfg);
  SynthResult b = synth_corpus(cfg);
  CHECK(a.corpus == b.corpus);

  cfg.seed = 18;
  SynthResult c = synth_corpus(cfg);
  CHECK_FALSE(a.corpus == c.corpus);
}

TEST_CASE("synth_corpus covers every speaker and labels in range") {
  SynthResult r = synth_corpus(small_config());
  std::set<std::string> speakers;
  for (const FeatureRecord& rec : r.corpus.records) {
    speakers.insert(rec.speaker);
    CHECK(rec.label >= 0);
    CHECK(rec.label < r.corpus.num_classes);
  }
  CHECK(static_cast<int>(speakers.size()) == 4);
}

TEST_CASE("well-separated corpus has near-perfect Bayes accuracy") {
  SynthConfig cfg = small_config();
  cfg.separation = 10.0;
  SynthResult r = synth_corpus(cfg);
  CHECK(r.oracle.bayes_accuracy(r.corpus) >= 0.99);
}

TEST_CASE("zero separation collapses Bayes accuracy to chance") {
  SynthConfig cfg = small_config();
  cfg.num_classes = 4;
  cfg.samples_per_class = 100;
  cfg.separation = 0.0;
  cfg.speaker_offset_scale = 0.0;
  SynthResult r = synth_corpus(cfg);
  // All class densities coincide; the rule degenerates to a constant guess.
  CHECK(r.oracle.bayes_accuracy(r.corpus) == doctest::Approx(0.25).epsilon(0.15));
}

TEST_CASE("empirical class means converge to the configured means") {
  SynthConfig cfg;
  cfg.num_classes = 2;
  cfg.d_audio = 4;
  cfg.d_text = 4;
  cfg.num_speakers = 2;
  cfg.samples_per_class = 2000;
  cfg.separation = 3.0;
  cfg.speaker_offset_scale = 0.0;
  cfg.seed = 5;
  SynthResult r = synth_corpus(cfg);
  const double tol = 3.0 * cfg.class_noise / std::sqrt(cfg.samples_per_class);
  for (int k = 0; k < cfg.num_classes; ++k) {
    Vec mean(cfg.d_audio, 0.0);
    long count = 0;
    for (const FeatureRecord& rec : r.corpus.records) {
      if (rec.label != k) continue;
      for (int j = 0; j < cfg.d_audio; ++j) mean[j] += rec.audio[j];
      ++count;
    }
    for (int j = 0; j < cfg.d_audio; ++j) {
      mean[j] /= count;
      CHECK(std::abs(mean[j] - r.oracle.class_means[k][j]) < tol);
    }
  }
}

TEST_CASE("synth_corpus rejects degenerate configs") {
  SynthConfig cfg = small_config();
  cfg.num_classes = 0;
  CHECK_THROWS_AS(synth_corpus(cfg), Error);
  cfg = small_config();
  cfg.num_speakers = 0;
  CHECK_THROWS_AS(synth_corpus(cfg), Error);
  cfg = small_config();
  cfg.samples_per_class = 0;
  CHECK_THROWS_AS(synth_corpus(cfg), Error);
}

TEST_CASE("binary round-trip is bit-exact") {
  SynthResult r = synth_corpus(small_config());
  const std::string path = temp_path("roundtrip.bin");
  write_corpus(r.corpus, path);
  Corpus loaded = read_corpus(path);
  CHECK(loaded == r.corpus);

  // Re-serialization is byte-identical.
  const std::string path2 = temp_path("roundtrip2.bin");
  write_corpus(loaded, path2);
  CHECK(slurp(path) == slurp(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("corrupt corpus files are rejected with a byte offset") {
  SynthResult r = synth_corpus(small_config());
  const std::string path = temp_path("corrupt.bin");
  write_corpus(r.corpus, path);
  std::string bytes = slurp(path);

  SUBCASE("bad magic") {
    bytes[0] = 'X';
    std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
    CHECK_THROWS_WITH_AS(read_corpus(path), doctest::Contains("bad magic"), Error);
  }
  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 5);
    std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
    try {
      read_corpus(path);
      FAIL("expected truncation rejection");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
  }
  SUBCASE("trailing garbage") {
    bytes += "zzz";
    std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
    CHECK_THROWS_AS(read_corpus(path), Error);
  }
  std::remove(path.c_str());
}

TEST_CASE("header-payload dimension mismatch is rejected") {
  // Declare d_audio one larger than the rows actually carry: the fixed
  // record stride then misparses and the reader must reject.
  SynthResult r = synth_corpus(small_config());
  const std::string path = temp_path("dim_mismatch.bin");
  write_corpus(r.corpus, path);
  std::string bytes = slurp(path);
  // d_audio lives right after magic (6) + num_classes (4).
  bytes[10] = static_cast<char>(bytes[10] + 1);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
  CHECK_THROWS_AS(read_corpus(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("empty-record corpus is rejected on write and read") {
  Corpus empty;
  empty.d_audio = 4;
  empty.d_text = 4;
  empty.num_classes = 2;
  CHECK_THROWS_AS(write_corpus(empty, temp_path("empty.bin")), Error);
}

TEST_CASE("csv round-trip preserves every record exactly") {
  SynthResult r = synth_corpus(small_config());
  const std::string path = temp_path("roundtrip.csv");
  write_corpus_csv(r.corpus, path);
  Corpus loaded = read_corpus_csv(path);
  CHECK(loaded.d_audio == r.corpus.d_audio);
  CHECK(loaded.d_text == r.corpus.d_text);
  CHECK(loaded.num_classes == r.corpus.num_classes);
  REQUIRE(loaded.records.size() == r.corpus.records.size());
  // %.17g round-trips doubles exactly.
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i] == r.corpus.records[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("csv with malformed rows is rejected") {
  const std::string path = temp_path("bad.csv");
  std::ofstream(path) << "speaker,label,h_0,t_0\n"
                      << "s000,0,1.5\n";  // missing field
  CHECK_THROWS_AS(read_corpus_csv(path), Error);
  std::ofstream(path, std::ios::trunc) << "speaker,label,h_0,t_0\n"
                                       << "s000,0,abc,1.0\n";
  CHECK_THROWS_AS(read_corpus_csv(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("loso folds partition and cover the corpus") {
  SynthConfig cfg = small_config();
  cfg.num_speakers = 10;
  cfg.samples_per_class = 20;
  SynthResult r = synth_corpus(cfg);
  std::vector<LosoFold> folds = loso_splits(r.corpus);
  REQUIRE(folds.size() == 10);

  std::set<int> all_test;
  for (const LosoFold& fold : folds) {
    CHECK_FALSE(fold.test_indices.empty());
    CHECK(fold.train_indices.size() + fold.test_indices.size() == r.corpus.records.size());
    for (int i : fold.test_indices) {
      CHECK(r.corpus.records[i].speaker == fold.held_out_speaker);
      CHECK(all_test.insert(i).second);  // test sets are disjoint
    }
    for (int i : fold.train_indices) {
      CHECK(r.corpus.records[i].speaker != fold.held_out_speaker);
    }
  }
  CHECK(all_test.size() == r.corpus.records.size());

  // Fold order follows sorted speaker ids.
  for (std::size_t i = 1; i < folds.size(); ++i) {
    CHECK(folds[i - 1].held_out_speaker < folds[i].held_out_speaker);
  }
}

TEST_CASE("loso with two speakers gives the two complementary folds") {
  SynthConfig cfg = small_config();
  cfg.num_speakers = 2;
  cfg.samples_per_class = 4;
  SynthResult r = synth_corpus(cfg);
  std::vector<LosoFold> folds = loso_splits(r.corpus);
  REQUIRE(folds.size() == 2);
  CHECK(folds[0].held_out_speaker == "s000");
  CHECK(folds[1].held_out_speaker == "s001");
  CHECK(folds[0].test_indices == folds[1].train_indices);
  CHECK(folds[0].train_indices == folds[1].test_indices);
}

TEST_CASE("loso rejects a single-speaker corpus") {
  SynthConfig cfg = small_config();
  cfg.num_speakers = 1;
  SynthResult r = synth_corpus(cfg);
  CHECK_THROWS_AS(loso_splits(r.corpus), Error);
}

TEST_CASE("class_histogram counts and empty subset") {
  SynthConfig cfg = small_config();
  cfg.num_classes = 4;
  cfg.samples_per_class = 25;
  SynthResult r = synth_corpus(cfg);
  std::vector<long> counts = class_histogram(r.corpus.records, 4);
  for (long c : counts) CHECK(c == 25);

  std::vector<int> none;
  std::vector<long> zero = class_histogram(r.corpus, none);
  for (long c : zero) CHECK(c == 0);
}

TEST_CASE("gather_batch pulls the right rows") {
  SynthResult r = synth_corpus(small_config());
  std::vector<int> idx{3, 0, 7};
  BatchView batch = gather_batch(r.corpus, idx);
  CHECK(batch.audio.rows() == 3);
  for (int row = 0; row < 3; ++row) {
    const FeatureRecord& rec = r.corpus.records[idx[row]];
    CHECK(batch.labels[row] == rec.label);
    for (int j = 0; j < r.corpus.d_audio; ++j) CHECK(batch.audio(row, j) == rec.audio[j]);
    for (int j = 0; j < r.corpus.d_text; ++j) CHECK(batch.text(row, j) == rec.text[j]);
  }
}
