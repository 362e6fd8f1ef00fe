#include "miaug/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "miaug/binio.hpp"
#include "miaug/rng.hpp"

namespace miaug {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open ", path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check(out.good(), "cannot open ", path, " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  check(out.good(), "write failed for ", path);
}

std::string file_checksum(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  const std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Corpus::validate() const {
  check(d_audio > 0 && d_text > 0, "corpus: feature dims must be positive, got d_audio=",
        d_audio, " d_text=", d_text);
  check(num_classes > 0, "corpus: num_classes must be positive");
  check(!records.empty(), "corpus: must contain at least one record");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const FeatureRecord& r = records[i];
    check(static_cast<int>(r.audio.size()) == d_audio, "corpus: record ", i, " has audio dim ",
          r.audio.size(), ", header says ", d_audio);
    check(static_cast<int>(r.text.size()) == d_text, "corpus: record ", i, " has text dim ",
          r.text.size(), ", header says ", d_text);
    check(r.label >= 0 && r.label < num_classes, "corpus: record ", i, " label ", r.label,
          " out of range [0,", num_classes, ")");
    check(!r.speaker.empty(), "corpus: record ", i, " has empty speaker id");
  }
}

std::vector<int> SynthConfig::resolved_counts() const {
  if (!per_class_counts.empty()) return per_class_counts;
  return std::vector<int>(static_cast<std::size_t>(num_classes), samples_per_class);
}

void SynthConfig::validate() const {
  check(num_classes >= 1, "synth: num_classes must be >= 1");
  check(d_audio >= 1 && d_text >= 1, "synth: feature dims must be >= 1");
  check(num_speakers >= 1, "synth: num_speakers must be >= 1");
  check(separation >= 0.0, "synth: separation must be >= 0");
  check(class_noise > 0.0, "synth: class_noise must be > 0");
  check(speaker_offset_scale >= 0.0, "synth: speaker_offset_scale must be >= 0");
  check(text_noise >= 0.0, "synth: text_noise must be >= 0");
  const std::vector<int> counts = resolved_counts();
  check(static_cast<int>(counts.size()) == num_classes, "synth: per_class_counts has ",
        counts.size(), " entries for ", num_classes, " classes");
  long total = 0;
  for (int c : counts) {
    check(c >= 1, "synth: per-class count must be >= 1");
    total += c;
  }
  check(total >= num_speakers, "synth: ", total, " samples cannot cover ", num_speakers,
        " speakers");
}

int OracleSpec::bayes_predict(std::span<const double> audio) const {
  const int num_classes = static_cast<int>(class_means.size());
  const int num_speakers = static_cast<int>(speaker_offsets.size());
  const int dim = static_cast<int>(audio.size());
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  Vec speaker_terms(static_cast<std::size_t>(num_speakers));
  for (int k = 0; k < num_classes; ++k) {
    const double sigma = class_sigmas[k];
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    for (int s = 0; s < num_speakers; ++s) {
      double sq = 0.0;
      for (int j = 0; j < dim; ++j) {
        const double diff = audio[j] - class_means[k][j] - speaker_offsets[s][j];
        sq += diff * diff;
      }
      speaker_terms[s] = -sq * inv_two_var;
    }
    const double score = std::log(class_priors[k]) - dim * std::log(sigma) +
                         log_sum_exp(speaker_terms);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

double OracleSpec::bayes_accuracy(const Corpus& corpus) const {
  check(!corpus.records.empty(), "bayes_accuracy: empty corpus");
  long correct = 0;
  for (const FeatureRecord& r : corpus.records) {
    if (bayes_predict(r.audio) == r.label) ++correct;
  }
  return static_cast<double>(correct) / corpus.records.size();
}

SynthResult synth_corpus(const SynthConfig& cfg) {
  cfg.validate();
  RngStream rng = RngStream::derive(cfg.seed, "synth");
  const std::vector<int> counts = cfg.resolved_counts();

  SynthResult result;
  OracleSpec& oracle = result.oracle;

  // Class means: separation-scaled random unit directions.
  oracle.class_means.resize(cfg.num_classes);
  for (int k = 0; k < cfg.num_classes; ++k) {
    Vec direction(static_cast<std::size_t>(cfg.d_audio));
    rng.fill_gaussian(direction);
    const double n = norm2(direction);
    oracle.class_means[k].resize(cfg.d_audio);
    for (int j = 0; j < cfg.d_audio; ++j) {
      oracle.class_means[k][j] = cfg.separation * direction[j] / n;
    }
  }
  oracle.class_sigmas.assign(static_cast<std::size_t>(cfg.num_classes), cfg.class_noise);

  // Fixed random linear coupling from audio-mean space into text space.
  oracle.text_coupling = Matrix(cfg.d_text, cfg.d_audio);
  rng.fill_gaussian(oracle.text_coupling.data(), 0.0, 1.0 / std::sqrt(cfg.d_audio));
  oracle.text_noise = cfg.text_noise;

  oracle.speaker_offsets.resize(cfg.num_speakers);
  for (int s = 0; s < cfg.num_speakers; ++s) {
    oracle.speaker_offsets[s].resize(cfg.d_audio);
    rng.fill_gaussian(oracle.speaker_offsets[s], 0.0, cfg.speaker_offset_scale);
  }

  long total = 0;
  for (int c : counts) total += c;
  oracle.class_priors.resize(cfg.num_classes);
  for (int k = 0; k < cfg.num_classes; ++k) {
    oracle.class_priors[k] = static_cast<double>(counts[k]) / total;
  }

  Corpus& corpus = result.corpus;
  corpus.d_audio = cfg.d_audio;
  corpus.d_text = cfg.d_text;
  corpus.num_classes = cfg.num_classes;
  corpus.records.reserve(static_cast<std::size_t>(total));

  std::vector<std::string> speaker_names(cfg.num_speakers);
  for (int s = 0; s < cfg.num_speakers; ++s) {
    char name[16];
    std::snprintf(name, sizeof(name), "s%03d", s);
    speaker_names[s] = name;
  }

  long global_index = 0;
  for (int k = 0; k < cfg.num_classes; ++k) {
    Vec text_mean(static_cast<std::size_t>(cfg.d_text), 0.0);
    for (int j = 0; j < cfg.d_text; ++j) {
      text_mean[j] = dot(oracle.text_coupling.row(j), oracle.class_means[k]);
    }
    for (int n = 0; n < counts[k]; ++n, ++global_index) {
      const int s = static_cast<int>(global_index % cfg.num_speakers);
      FeatureRecord rec;
      rec.label = k;
      rec.speaker = speaker_names[s];
      rec.audio.resize(cfg.d_audio);
      for (int j = 0; j < cfg.d_audio; ++j) {
        rec.audio[j] = oracle.class_means[k][j] + oracle.speaker_offsets[s][j] +
                       cfg.class_noise * rng.gaussian();
      }
      rec.text.resize(cfg.d_text);
      for (int j = 0; j < cfg.d_text; ++j) {
        rec.text[j] = text_mean[j] + cfg.text_noise * rng.gaussian();
      }
      corpus.records.push_back(std::move(rec));
    }
  }

  corpus.provenance = str_cat("synthetic(seed=", cfg.seed, ",K=", cfg.num_classes,
                              ",d_audio=", cfg.d_audio, ",d_text=", cfg.d_text,
                              ",speakers=", cfg.num_speakers, ",total=", total,
                              ",separation=", cfg.separation, ",class_noise=", cfg.class_noise,
                              ",speaker_offset=", cfg.speaker_offset_scale,
                              ",text_noise=", cfg.text_noise, ")");
  corpus.validate();
  return result;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  corpus.validate();

  // Speaker table in first-appearance order keeps serialization a pure
  // function of the record sequence.
  std::vector<std::string> speakers;
  std::map<std::string, std::uint32_t> speaker_index;
  for (const FeatureRecord& r : corpus.records) {
    if (speaker_index.emplace(r.speaker, speakers.size()).second) {
      speakers.push_back(r.speaker);
    }
  }

  BinWriter w;
  w.raw(kFileMagic, sizeof(kFileMagic));
  w.u32(static_cast<std::uint32_t>(corpus.num_classes));
  w.u32(static_cast<std::uint32_t>(corpus.d_audio));
  w.u32(static_cast<std::uint32_t>(corpus.d_text));
  w.u64(corpus.records.size());
  w.u32(static_cast<std::uint32_t>(speakers.size()));
  for (const std::string& s : speakers) w.str(s);
  w.str(corpus.provenance);
  for (const FeatureRecord& r : corpus.records) {
    w.u32(speaker_index.at(r.speaker));
    w.u32(static_cast<std::uint32_t>(r.label));
    for (double x : r.audio) w.f64(x);
    for (double x : r.text) w.f64(x);
  }
  write_file_bytes(path, w.bytes());
}

Corpus read_corpus(const std::string& path) {
  BinReader r(read_file_bytes(path), path);
  r.expect_magic();

  Corpus corpus;
  corpus.num_classes = static_cast<int>(r.u32("num_classes"));
  corpus.d_audio = static_cast<int>(r.u32("d_audio"));
  corpus.d_text = static_cast<int>(r.u32("d_text"));
  check(corpus.num_classes > 0, path, ": num_classes must be positive");
  check(corpus.d_audio > 0 && corpus.d_text > 0, path, ": feature dims must be positive");
  const std::uint64_t record_count = r.u64("record_count");
  check(record_count > 0, path, ": corpus must contain at least one record");
  const std::uint32_t num_speakers = r.u32("speaker_table_length");
  check(num_speakers > 0, path, ": empty speaker table");
  std::vector<std::string> speakers(num_speakers);
  for (std::uint32_t i = 0; i < num_speakers; ++i) speakers[i] = r.str("speaker name");
  corpus.provenance = r.str("provenance");

  corpus.records.resize(record_count);
  for (std::uint64_t i = 0; i < record_count; ++i) {
    FeatureRecord& rec = corpus.records[i];
    const std::uint32_t speaker = r.u32("record speaker");
    check(speaker < num_speakers, path, ": record ", i, " speaker index ", speaker,
          " out of range at byte offset ", r.pos() - 4);
    rec.speaker = speakers[speaker];
    const std::uint32_t label = r.u32("record label");
    check(label < static_cast<std::uint32_t>(corpus.num_classes), path, ": record ", i,
          " label ", label, " out of range at byte offset ", r.pos() - 4);
    rec.label = static_cast<int>(label);
    rec.audio.resize(corpus.d_audio);
    for (int j = 0; j < corpus.d_audio; ++j) rec.audio[j] = r.f64("audio feature");
    rec.text.resize(corpus.d_text);
    for (int j = 0; j < corpus.d_text; ++j) rec.text[j] = r.f64("text feature");
  }
  check(r.remaining() == 0, path, ": ", r.remaining(), " trailing bytes at byte offset ",
        r.pos());
  corpus.validate();
  return corpus;
}

void write_corpus_csv(const Corpus& corpus, const std::string& path) {
  corpus.validate();
  std::ofstream out(path, std::ios::trunc);
  check(out.good(), "cannot open ", path, " for writing");
  out << "speaker,label";
  for (int j = 0; j < corpus.d_audio; ++j) out << ",h_" << j;
  for (int j = 0; j < corpus.d_text; ++j) out << ",t_" << j;
  out << "\n";
  for (const FeatureRecord& r : corpus.records) {
    out << r.speaker << "," << r.label;
    for (double x : r.audio) out << "," << format_double(x);
    for (double x : r.text) out << "," << format_double(x);
    out << "\n";
  }
  check(out.good(), "write failed for ", path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Corpus read_corpus_csv(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open ", path);
  std::string line;
  check(static_cast<bool>(std::getline(in, line)), path, ": missing header line");
  const std::vector<std::string> header = split_csv_line(line);
  check(header.size() >= 4 && header[0] == "speaker" && header[1] == "label", path,
        ": header must start with speaker,label");
  int d_audio = 0;
  std::size_t col = 2;
  while (col < header.size() && header[col] == str_cat("h_", d_audio)) {
    ++d_audio;
    ++col;
  }
  int d_text = 0;
  while (col < header.size() && header[col] == str_cat("t_", d_text)) {
    ++d_text;
    ++col;
  }
  check(col == header.size() && d_audio > 0 && d_text > 0, path,
        ": header columns must be speaker,label,h_0..,t_0..");

  Corpus corpus;
  corpus.d_audio = d_audio;
  corpus.d_text = d_text;
  corpus.provenance = str_cat("csv:", path);
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    check(fields.size() == header.size(), path, ": line ", line_no, " has ", fields.size(),
          " fields, expected ", header.size());
    FeatureRecord rec;
    rec.speaker = fields[0];
    try {
      rec.label = std::stoi(fields[1]);
      rec.audio.reserve(d_audio);
      for (int j = 0; j < d_audio; ++j) rec.audio.push_back(std::stod(fields[2 + j]));
      rec.text.reserve(d_text);
      for (int j = 0; j < d_text; ++j) rec.text.push_back(std::stod(fields[2 + d_audio + j]));
    } catch (const std::exception&) {
      throw Error(str_cat(path, ": line ", line_no, " has a malformed numeric field"));
    }
    check(rec.label >= 0, path, ": line ", line_no, " has negative label");
    max_label = std::max(max_label, rec.label);
    corpus.records.push_back(std::move(rec));
  }
  check(!corpus.records.empty(), path, ": no records");
  corpus.num_classes = max_label + 1;
  corpus.validate();
  return corpus;
}

std::vector<LosoFold> loso_splits(const Corpus& corpus) {
  corpus.validate();
  std::set<std::string> speaker_set;
  for (const FeatureRecord& r : corpus.records) speaker_set.insert(r.speaker);
  check(speaker_set.size() >= 2, "loso_splits: need at least 2 speakers, corpus has ",
        speaker_set.size());

  std::vector<LosoFold> folds;
  folds.reserve(speaker_set.size());
  for (const std::string& speaker : speaker_set) {
    LosoFold fold;
    fold.held_out_speaker = speaker;
    for (int i = 0; i < static_cast<int>(corpus.records.size()); ++i) {
      if (corpus.records[i].speaker == speaker) {
        fold.test_indices.push_back(i);
      } else {
        fold.train_indices.push_back(i);
      }
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::vector<long> class_histogram(std::span<const FeatureRecord> records, int num_classes) {
  check(num_classes > 0, "class_histogram: num_classes must be positive");
  std::vector<long> counts(static_cast<std::size_t>(num_classes), 0);
  for (const FeatureRecord& r : records) {
    check(r.label >= 0 && r.label < num_classes, "class_histogram: label ", r.label,
          " out of range [0,", num_classes, ")");
    ++counts[r.label];
  }
  return counts;
}

std::vector<long> class_histogram(const Corpus& corpus, std::span<const int> indices) {
  std::vector<long> counts(static_cast<std::size_t>(corpus.num_classes), 0);
  for (int i : indices) {
    check(i >= 0 && i < static_cast<int>(corpus.records.size()),
          "class_histogram: record index ", i, " out of range");
    ++counts[corpus.records[i].label];
  }
  return counts;
}

BatchView gather_batch(const Corpus& corpus, std::span<const int> indices) {
  BatchView batch;
  batch.audio = Matrix(static_cast<int>(indices.size()), corpus.d_audio);
  batch.text = Matrix(static_cast<int>(indices.size()), corpus.d_text);
  batch.labels.resize(indices.size());
  for (int row = 0; row < static_cast<int>(indices.size()); ++row) {
    const int i = indices[row];
    check(i >= 0 && i < static_cast<int>(corpus.records.size()), "gather_batch: record index ",
          i, " out of range");
    const FeatureRecord& r = corpus.records[i];
    batch.audio.set_row(row, r.audio);
    batch.text.set_row(row, r.text);
    batch.labels[row] = r.label;
  }
  return batch;
}

}  // namespace miaug
