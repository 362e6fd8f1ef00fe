// End-to-end orchestration: corpus synthesis or loading, the per-speaker
// LOSO loop over the three training stages, evaluation, checkpoints, traces,
// and the run report. A fold failure is recorded and the remaining folds
// continue; the report then carries partial status.

#ifndef MIAUG_PIPELINE_HPP
#define MIAUG_PIPELINE_HPP

#include <string>
#include <utility>
#include <vector>

#include "miaug/config.hpp"
#include "miaug/eval.hpp"
#include "miaug/infogan.hpp"

namespace miaug {

struct FoldReport {
  std::string speaker;
  bool ok = false;
  std::string error;
  double uar = 0.0;
  Vec per_class_recall;
  Matrix confusion;
  double stage1_final_loss = 0.0;
  GanTraceRow stage2_final;
  MiDiagnostics probe;  // MI-head readout on freshly generated samples
  std::vector<std::string> artifacts;  // paths relative to out_dir
};

struct RunReport {
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::string corpus_provenance;
  long corpus_records = 0;
  std::vector<FoldReport> folds;
  bool has_aggregate = false;
  FoldAggregate aggregate;
  std::string status;  // "full" | "partial"
  std::vector<std::pair<std::string, std::string>> checksums;  // relative path -> checksum
};

RunReport run_pipeline(const RunConfig& cfg);

std::string report_to_json(const RunReport& report);
void write_report_json(const RunReport& report, const std::string& path);

// Loads .bin or .csv by extension.
Corpus load_corpus_any(const std::string& path);

}  // namespace miaug

#endif  // MIAUG_PIPELINE_HPP
