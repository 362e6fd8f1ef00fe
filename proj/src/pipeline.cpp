#include "miaug/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "miaug/augment.hpp"
#include "miaug/baseline.hpp"
#include "miaug/checkpoint.hpp"
#include "miaug/binio.hpp"

namespace miaug {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

Corpus load_corpus_any(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return read_corpus_csv(path);
  }
  return read_corpus(path);
}

namespace {

void write_stage1_trace(const BaselineModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  check(out.good(), "cannot open ", path, " for writing");
  out << "epoch,total,ser,cl,mi\n";
  char buf[160];
  for (std::size_t e = 0; e < model.loss_trace.size(); ++e) {
    const Stage1EpochLoss& row = model.loss_trace[e];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", e, row.total, row.ser,
                  row.cl, row.mi);
    out << buf;
  }
}

AugmentedSet build_stage3_set(const Corpus& corpus, std::span<const int> train_indices,
                              const GanBundle& bundle, const BaselineModel& q_heads,
                              const RunConfig& cfg, RngStream& rng) {
  if (cfg.stage3_balance) {
    const TextPrior prior = fit_text_prior(corpus, train_indices, /*zero_fallback=*/true);
    return balance_classes(corpus, train_indices, bundle, q_heads, prior, rng);
  }
  switch (cfg.stage3_augment) {
    case AugmentKind::none:
      return real_only_set(corpus, train_indices);
    case AugmentKind::double_ser:
      return augment_ser(corpus, train_indices, bundle, q_heads, rng);
    case AugmentKind::multimodal:
      return augment_multimodal(corpus, train_indices, bundle, q_heads, rng);
  }
  throw Error("unreachable augment kind");
}

FoldReport run_fold(const Corpus& corpus, const LosoFold& fold, const RunConfig& cfg,
                    const std::string& out_dir) {
  FoldReport report;
  report.speaker = fold.held_out_speaker;
  const std::string rel_dir = "fold_" + fold.held_out_speaker;
  const std::string fold_dir = out_dir + "/" + rel_dir;
  fs::create_directories(fold_dir);

  BaselineConfig s1 = cfg.stage1;
  s1.seed = cfg.seed;
  s1.rng_label = "stage1/fold:" + fold.held_out_speaker;
  const BaselineModel baseline = train_baseline(corpus, fold.train_indices, s1);
  save_baseline(baseline, fold_dir + "/baseline.ckpt");
  write_stage1_trace(baseline, fold_dir + "/stage1_trace.csv");
  report.stage1_final_loss = baseline.loss_trace.back().total;
  report.artifacts.push_back(rel_dir + "/baseline.ckpt");
  report.artifacts.push_back(rel_dir + "/stage1_trace.csv");

  GanConfig s2 = cfg.stage2;
  s2.seed = cfg.seed;
  s2.rng_label = "stage2/fold:" + fold.held_out_speaker;
  const GanTrainResult gan = train_infogan(corpus, fold.train_indices, baseline, s2);
  save_gan(gan.bundle, fold_dir + "/gan.ckpt");
  write_gan_trace_csv(gan.trace, fold_dir + "/stage2_trace.csv");
  report.stage2_final = gan.trace.back();
  report.artifacts.push_back(rel_dir + "/gan.ckpt");
  report.artifacts.push_back(rel_dir + "/stage2_trace.csv");

  RngStream aug_rng = RngStream::derive(cfg.seed, "stage3/augment/fold:" + fold.held_out_speaker);
  const AugmentedSet augmented =
      build_stage3_set(corpus, fold.train_indices, gan.bundle, gan.q_heads, cfg, aug_rng);

  FinalTrainConfig s3 = cfg.stage3;
  s3.seed = cfg.seed;
  s3.rng_label = "stage3/fold:" + fold.held_out_speaker;
  AugmentResampler resampler;
  if (cfg.stage3_resample) {
    resampler = [&corpus, &fold, &gan, &cfg](int epoch) {
      RngStream rng = RngStream::derive(
          cfg.seed, str_cat("stage3/resample/fold:", fold.held_out_speaker, "/epoch:", epoch));
      return build_stage3_set(corpus, fold.train_indices, gan.bundle, gan.q_heads, cfg, rng);
    };
  }
  const FinalClassifier classifier =
      train_final_classifier(augmented, cfg.stage3_mode, s3, resampler);
  save_final_classifier(classifier, fold_dir + "/final.ckpt");
  report.artifacts.push_back(rel_dir + "/final.ckpt");

  const EvalResult eval = evaluate_classifier(classifier, corpus, fold.test_indices);
  report.uar = eval.uar;
  report.per_class_recall = eval.per_class_recall;
  report.confusion = eval.confusion;

  // MI readout on samples conditioned by held-out pairs, generation quality
  // as seen by the shared heads.
  if (fold.test_indices.size() >= 2) {
    const std::size_t probe_n = std::min<std::size_t>(fold.test_indices.size(), 64);
    const std::span<const int> probe_idx(fold.test_indices.data(), probe_n);
    const BatchView view = gather_batch(corpus, probe_idx);
    RngStream probe_rng =
        RngStream::derive(cfg.seed, "probe/fold:" + fold.held_out_speaker);
    const Matrix z = sample_noise(view.audio.rows(), gan.bundle.d_z, probe_rng);
    report.probe =
        mi_diagnostics(gan.bundle, gan.q_heads, z, view.labels, view.text, cfg.stage2.tau);
  }
  report.ok = true;
  return report;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json recalls_to_json(const Vec& recalls) {
  ordered_json arr = ordered_json::array();
  for (double r : recalls) {
    if (std::isnan(r)) {
      arr.push_back(nullptr);
    } else {
      arr.push_back(r);
    }
  }
  return arr;
}

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.config_echo = config_entries(cfg);

  fs::create_directories(cfg.out_dir);

  Corpus corpus;
  std::vector<std::string> run_artifacts;
  if (!cfg.corpus_file.empty()) {
    corpus = load_corpus_any(cfg.corpus_file);
  } else {
    SynthConfig synth = cfg.synth;
    synth.seed = cfg.seed;
    corpus = synth_corpus(synth).corpus;
    write_corpus(corpus, cfg.out_dir + "/corpus.bin");
    run_artifacts.push_back("corpus.bin");
  }
  report.corpus_provenance = corpus.provenance;
  report.corpus_records = static_cast<long>(corpus.records.size());

  const std::vector<LosoFold> folds = loso_splits(corpus);
  report.folds.resize(folds.size());

  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(folds.size()));
  auto process = [&](int i) {
    try {
      report.folds[i] = run_fold(corpus, folds[i], cfg, cfg.out_dir);
    } catch (const std::exception& e) {
      report.folds[i] = FoldReport{};
      report.folds[i].speaker = folds[i].held_out_speaker;
      report.folds[i].ok = false;
      report.folds[i].error = e.what();
    }
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < folds.size(); ++i) process(static_cast<int>(i));
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= static_cast<int>(folds.size())) return;
          process(i);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  std::vector<FoldResult> ok_folds;
  bool all_ok = true;
  for (const FoldReport& f : report.folds) {
    if (!f.ok) {
      all_ok = false;
      continue;
    }
    FoldResult r;
    r.fold_id = f.speaker;
    r.confusion = f.confusion;
    r.uar = f.uar;
    r.per_class_recall = f.per_class_recall;
    ok_folds.push_back(std::move(r));
  }
  if (!ok_folds.empty()) {
    report.aggregate = aggregate_folds(ok_folds);
    report.has_aggregate = true;
  }
  report.status = all_ok ? "full" : "partial";

  for (const FoldReport& f : report.folds) {
    for (const std::string& rel : f.artifacts) run_artifacts.push_back(rel);
  }
  std::sort(run_artifacts.begin(), run_artifacts.end());
  for (const std::string& rel : run_artifacts) {
    report.checksums.emplace_back(rel, file_checksum(cfg.out_dir + "/" + rel));
  }

  write_report_json(report, cfg.out_dir + "/report.json");
  return report;
}

std::string report_to_json(const RunReport& report) {
  ordered_json j;
  j["status"] = report.status;
  ordered_json config = ordered_json::object();
  for (const auto& [key, value] : report.config_echo) config[key] = value;
  j["config"] = std::move(config);
  j["corpus"] = {{"provenance", report.corpus_provenance},
                 {"records", report.corpus_records}};
  if (report.has_aggregate) {
    j["aggregate"] = {{"mean_uar", report.aggregate.mean_uar},
                      {"std_uar", report.aggregate.std_uar},
                      {"pooled_confusion", matrix_to_json(report.aggregate.pooled_confusion)}};
  } else {
    j["aggregate"] = nullptr;
  }
  ordered_json folds = ordered_json::array();
  for (const FoldReport& f : report.folds) {
    ordered_json fj;
    fj["speaker"] = f.speaker;
    fj["ok"] = f.ok;
    if (!f.ok) {
      fj["error"] = f.error;
    } else {
      fj["uar"] = f.uar;
      fj["per_class_recall"] = recalls_to_json(f.per_class_recall);
      fj["confusion"] = matrix_to_json(f.confusion);
      fj["stage1_final_loss"] = f.stage1_final_loss;
      fj["stage2"] = {{"d_loss", f.stage2_final.d_loss},
                      {"g_loss", f.stage2_final.g_loss},
                      {"loss_iy", f.stage2_final.loss_iy},
                      {"loss_it", f.stage2_final.loss_it},
                      {"mi_bound_t", f.stage2_final.mi_bound_t}};
      fj["probe"] = {{"loss_iy", f.probe.loss_iy},
                     {"loss_it", f.probe.loss_it},
                     {"mi_bound_t", f.probe.mi_bound_t},
                     {"q_label_accuracy", f.probe.q_label_accuracy}};
      fj["artifacts"] = f.artifacts;
    }
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  ordered_json sums = ordered_json::object();
  for (const auto& [rel, sum] : report.checksums) sums[rel] = sum;
  j["checksums"] = std::move(sums);
  return j.dump(2) + "\n";
}

void write_report_json(const RunReport& report, const std::string& path) {
  write_file_bytes(path, report_to_json(report));
}

}  // namespace miaug
