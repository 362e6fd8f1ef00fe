// Run configuration: one flat key-value file drives the whole pipeline.
// Unknown keys are rejected, every value is validated with its field path,
// and any key can be overridden through the environment as
// MIAUG_<KEY with dots as underscores, uppercased>, e.g. MIAUG_STAGE2_LAMBDA.

#ifndef MIAUG_CONFIG_HPP
#define MIAUG_CONFIG_HPP

#include <string>
#include <utility>
#include <vector>

#include "miaug/augment.hpp"
#include "miaug/baseline.hpp"
#include "miaug/corpus.hpp"
#include "miaug/infogan.hpp"

namespace miaug {

enum class AugmentKind { none, double_ser, multimodal };

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "runs/out";
  int jobs = 1;

  std::string corpus_file;  // when set, load instead of synthesizing
  SynthConfig synth;

  BaselineConfig stage1;
  GanConfig stage2;
  FinalTrainConfig stage3;
  ClassifierMode stage3_mode = ClassifierMode::audio;
  AugmentKind stage3_augment = AugmentKind::double_ser;
  bool stage3_balance = false;
  bool stage3_resample = false;

  void validate() const;
};

// Parses config text; `origin` names the source in error messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin);

// Reads the file, then applies MIAUG_* environment overrides.
RunConfig load_run_config(const std::string& path);

// Every key with its current value, sorted by key; the config echo that a
// run report embeds so a finished run can be replayed exactly.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

std::string env_override_name(const std::string& key);

}  // namespace miaug

#endif  // MIAUG_CONFIG_HPP
