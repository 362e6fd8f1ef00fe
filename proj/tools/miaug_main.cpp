// miaug command line: corpus synthesis, the three training stages as
// standalone commands working from checkpoints, evaluation, and the full
// LOSO pipeline.
//
// Exit codes: 0 success, 1 config/IO error, 2 partial fold failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <json.hpp>

#include "miaug/augment.hpp"
#include "miaug/baseline.hpp"
#include "miaug/checkpoint.hpp"
#include "miaug/config.hpp"
#include "miaug/pipeline.hpp"

using namespace miaug;

namespace {

std::vector<int> all_indices(const Corpus& corpus) {
  std::vector<int> idx(corpus.records.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

nlohmann::ordered_json eval_to_json(const EvalResult& eval) {
  nlohmann::ordered_json j;
  j["uar"] = eval.uar;
  nlohmann::ordered_json recalls = nlohmann::ordered_json::array();
  for (double r : eval.per_class_recall) {
    if (std::isnan(r)) {
      recalls.push_back(nullptr);
    } else {
      recalls.push_back(r);
    }
  }
  j["per_class_recall"] = std::move(recalls);
  nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
  for (int i = 0; i < eval.confusion.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int k = 0; k < eval.confusion.cols(); ++k) row.push_back(eval.confusion(i, k));
    confusion.push_back(std::move(row));
  }
  j["confusion"] = std::move(confusion);
  return j;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string mode;
  bool balance = false;
  bool balance_set = false;
};

RunConfig load_with_overrides(const CommonOpts& opts) {
  RunConfig cfg = load_run_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.jobs > 0) cfg.jobs = opts.jobs;
  if (!opts.mode.empty()) {
    check(opts.mode == "audio" || opts.mode == "fusion", "--mode must be audio or fusion");
    cfg.stage3_mode = opts.mode == "audio" ? ClassifierMode::audio : ClassifierMode::fusion;
  }
  if (opts.balance_set) cfg.stage3_balance = opts.balance;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_overrides = true) {
  cmd->add_option("--config", opts.config_path, "run configuration file")->required();
  if (with_overrides) {
    cmd->add_option("--out", opts.out_dir, "output directory (overrides out_dir)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides seed)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--jobs", opts.jobs, "parallel LOSO folds");
    cmd->add_option("--mode", opts.mode, "final classifier mode: audio|fusion");
    cmd->add_flag("--balance", opts.balance, "balance classes with generated samples")
        ->each([&opts](const std::string&) { opts.balance_set = true; });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mutual-information regularized feature augmentation toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string corpus_path, baseline_path, gan_path, classifier_path, out_file;
  bool as_csv = false;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic feature corpus");
  add_common(synth, opts);
  synth->add_option("--corpus-out", out_file, "corpus file to write (.bin or .csv)");
  synth->add_flag("--csv", as_csv, "also write the CSV form next to the binary");

  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "stage 1: train classifier head and text projector");
  add_common(baseline_cmd, opts);
  baseline_cmd->add_option("--corpus", corpus_path, "corpus file")->required();

  CLI::App* gan_cmd = app.add_subcommand("gan", "stage 2: adversarial training with MI heads");
  add_common(gan_cmd, opts);
  gan_cmd->add_option("--corpus", corpus_path, "corpus file")->required();
  gan_cmd->add_option("--baseline", baseline_path, "baseline checkpoint")->required();

  CLI::App* augment_cmd =
      app.add_subcommand("augment", "stage 3: build the augmented set, train the final head");
  add_common(augment_cmd, opts);
  augment_cmd->add_option("--corpus", corpus_path, "corpus file")->required();
  augment_cmd->add_option("--baseline", baseline_path, "baseline checkpoint")->required();
  augment_cmd->add_option("--gan", gan_path, "gan checkpoint")->required();

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  eval_cmd->add_option("--corpus", corpus_path, "corpus file")->required();
  eval_cmd->add_option("--classifier", classifier_path, "final-classifier checkpoint");
  eval_cmd->add_option("--baseline", baseline_path, "baseline checkpoint");
  eval_cmd->add_option("--out", out_file, "write metrics JSON here instead of stdout");

  CLI::App* pipeline_cmd =
      app.add_subcommand("pipeline", "full LOSO run: synth/load, stages 1-3, report");
  add_common(pipeline_cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      RunConfig cfg = load_with_overrides(opts);
      SynthConfig synth_cfg = cfg.synth;
      synth_cfg.seed = cfg.seed;
      const Corpus corpus = synth_corpus(synth_cfg).corpus;
      std::filesystem::create_directories(cfg.out_dir);
      std::string path = out_file.empty() ? cfg.out_dir + "/corpus.bin" : out_file;
      if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        write_corpus_csv(corpus, path);
      } else {
        write_corpus(corpus, path);
        if (as_csv) write_corpus_csv(corpus, path + ".csv");
      }
      std::cout << "wrote " << path << " (" << corpus.records.size() << " records)\n";
      return 0;
    }

    if (baseline_cmd->parsed()) {
      RunConfig cfg = load_with_overrides(opts);
      const Corpus corpus = load_corpus_any(corpus_path);
      BaselineConfig s1 = cfg.stage1;
      s1.seed = cfg.seed;
      const BaselineModel model = train_baseline(corpus, s1);
      std::filesystem::create_directories(cfg.out_dir);
      save_baseline(model, cfg.out_dir + "/baseline.ckpt");
      const EvalResult train_eval = evaluate_uar(model, corpus);
      std::cout << "baseline trained: final loss " << model.loss_trace.back().total
                << ", training UAR " << train_eval.uar << "\n"
                << "wrote " << cfg.out_dir << "/baseline.ckpt\n";
      return 0;
    }

    if (gan_cmd->parsed()) {
      RunConfig cfg = load_with_overrides(opts);
      const Corpus corpus = load_corpus_any(corpus_path);
      const BaselineModel baseline = load_baseline(baseline_path);
      GanConfig s2 = cfg.stage2;
      s2.seed = cfg.seed;
      const GanTrainResult result = train_infogan(corpus, baseline, s2);
      std::filesystem::create_directories(cfg.out_dir);
      save_gan(result.bundle, cfg.out_dir + "/gan.ckpt");
      write_gan_trace_csv(result.trace, cfg.out_dir + "/stage2_trace.csv");
      const GanTraceRow& last = result.trace.back();
      std::cout << "gan trained: d_loss " << last.d_loss << ", g_loss " << last.g_loss
                << ", L_Iy " << last.loss_iy << ", L_It " << last.loss_it << ", mi_bound_t "
                << last.mi_bound_t << "\n"
                << "wrote " << cfg.out_dir << "/gan.ckpt\n";
      return 0;
    }

    if (augment_cmd->parsed()) {
      RunConfig cfg = load_with_overrides(opts);
      const Corpus corpus = load_corpus_any(corpus_path);
      const BaselineModel baseline = load_baseline(baseline_path);
      const GanBundle bundle = load_gan(gan_path);
      const std::vector<int> idx = all_indices(corpus);
      RngStream rng = RngStream::derive(cfg.seed, "stage3/augment");
      AugmentedSet set;
      if (cfg.stage3_balance) {
        const TextPrior prior = fit_text_prior(corpus, idx, /*zero_fallback=*/true);
        set = balance_classes(corpus, idx, bundle, baseline, prior, rng);
      } else if (cfg.stage3_augment == AugmentKind::multimodal) {
        set = augment_multimodal(corpus, idx, bundle, baseline, rng);
      } else if (cfg.stage3_augment == AugmentKind::double_ser) {
        set = augment_ser(corpus, idx, bundle, baseline, rng);
      } else {
        set = real_only_set(corpus, idx);
      }
      FinalTrainConfig s3 = cfg.stage3;
      s3.seed = cfg.seed;
      const FinalClassifier classifier = train_final_classifier(set, cfg.stage3_mode, s3);
      std::filesystem::create_directories(cfg.out_dir);
      write_augmented_csv(set, cfg.out_dir + "/augmented.csv");
      save_final_classifier(classifier, cfg.out_dir + "/final.ckpt");
      std::cout << "augmented set: " << set.items.size() << " items; final head trained\n"
                << "wrote " << cfg.out_dir << "/final.ckpt\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      check(!classifier_path.empty() || !baseline_path.empty(),
            "eval: provide --classifier or --baseline");
      const Corpus corpus = load_corpus_any(corpus_path);
      const std::vector<int> idx = all_indices(corpus);
      EvalResult eval;
      if (!classifier_path.empty()) {
        const FinalClassifier classifier = load_final_classifier(classifier_path);
        eval = evaluate_classifier(classifier, corpus, idx);
      } else {
        const BaselineModel model = load_baseline(baseline_path);
        eval = evaluate_uar(model, corpus, idx);
      }
      const std::string text = eval_to_json(eval).dump(2) + "\n";
      if (out_file.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_file, std::ios::trunc);
        check(out.good(), "cannot open ", out_file, " for writing");
        out << text;
      }
      return 0;
    }

    if (pipeline_cmd->parsed()) {
      RunConfig cfg = load_with_overrides(opts);
      const RunReport report = run_pipeline(cfg);
      if (report.has_aggregate) {
        std::printf("mean UAR %.4f +- %.4f over %zu folds [%s]\n", report.aggregate.mean_uar,
                    report.aggregate.std_uar, report.folds.size(), report.status.c_str());
      } else {
        std::printf("no fold succeeded [%s]\n", report.status.c_str());
      }
      for (const FoldReport& f : report.folds) {
        if (f.ok) {
          std::printf("  fold %s: UAR %.4f\n", f.speaker.c_str(), f.uar);
        } else {
          std::printf("  fold %s: FAILED: %s\n", f.speaker.c_str(), f.error.c_str());
        }
      }
      std::cout << "report: " << cfg.out_dir << "/report.json\n";
      return report.status == "full" ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
