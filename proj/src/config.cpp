#include "miaug/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace miaug {

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void parse_fail(const std::string& origin, const std::string& key,
                             const std::string& value, const char* type) {
  throw Error(str_cat(origin, ": ", key, ": cannot parse '", value, "' as ", type));
}

long long to_int(const std::string& origin, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) parse_fail(origin, key, value, "integer");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    parse_fail(origin, key, value, "integer");
  }
}

double to_real(const std::string& origin, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) parse_fail(origin, key, value, "real");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    parse_fail(origin, key, value, "real");
  }
}

bool to_bool(const std::string& origin, const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  parse_fail(origin, key, value, "bool (true/false)");
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_counts(const std::vector<int>& counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out += ",";
    out += str_cat(counts[i]);
  }
  return out;
}

std::vector<int> parse_counts(const std::string& origin, const std::string& key,
                              const std::string& value) {
  std::vector<int> counts;
  if (value.empty()) return counts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    counts.push_back(static_cast<int>(to_int(origin, key, item)));
  }
  return counts;
}

#define INT_FIELD(key_name, target)                                                       \
  Field{key_name,                                                                         \
        [](RunConfig& c, const std::string& v, const std::string& o) {                    \
          c.target = static_cast<int>(to_int(o, key_name, v));                            \
        },                                                                                \
        [](const RunConfig& c) { return str_cat(c.target); }}

#define REAL_FIELD(key_name, target)                                                      \
  Field{key_name,                                                                         \
        [](RunConfig& c, const std::string& v, const std::string& o) {                    \
          c.target = to_real(o, key_name, v);                                             \
        },                                                                                \
        [](const RunConfig& c) { return fmt_real(c.target); }}

#define BOOL_FIELD(key_name, target)                                                      \
  Field{key_name,                                                                         \
        [](RunConfig& c, const std::string& v, const std::string& o) {                    \
          c.target = to_bool(o, key_name, v);                                             \
        },                                                                                \
        [](const RunConfig& c) { return c.target ? "true" : "false"; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed",
            [](RunConfig& c, const std::string& v, const std::string& o) {
              c.seed = static_cast<std::uint64_t>(to_int(o, "seed", v));
            },
            [](const RunConfig& c) { return str_cat(c.seed); }},
      Field{"out_dir",
            [](RunConfig& c, const std::string& v, const std::string&) { c.out_dir = v; },
            [](const RunConfig& c) { return c.out_dir; }},
      INT_FIELD("jobs", jobs),
      Field{"corpus.file",
            [](RunConfig& c, const std::string& v, const std::string&) { c.corpus_file = v; },
            [](const RunConfig& c) { return c.corpus_file; }},
      INT_FIELD("corpus.synth.classes", synth.num_classes),
      INT_FIELD("corpus.synth.d_audio", synth.d_audio),
      INT_FIELD("corpus.synth.d_text", synth.d_text),
      INT_FIELD("corpus.synth.speakers", synth.num_speakers),
      INT_FIELD("corpus.synth.per_class", synth.samples_per_class),
      Field{"corpus.synth.per_class_counts",
            [](RunConfig& c, const std::string& v, const std::string& o) {
              c.synth.per_class_counts = parse_counts(o, "corpus.synth.per_class_counts", v);
            },
            [](const RunConfig& c) { return fmt_counts(c.synth.per_class_counts); }},
      REAL_FIELD("corpus.synth.separation", synth.separation),
      REAL_FIELD("corpus.synth.class_noise", synth.class_noise),
      REAL_FIELD("corpus.synth.speaker_offset", synth.speaker_offset_scale),
      REAL_FIELD("corpus.synth.text_noise", synth.text_noise),
      INT_FIELD("stage1.epochs", stage1.epochs),
      INT_FIELD("stage1.batch", stage1.batch),
      REAL_FIELD("stage1.lr", stage1.lr),
      REAL_FIELD("stage1.tau", stage1.tau),
      REAL_FIELD("stage1.w_ser", stage1.w_ser),
      REAL_FIELD("stage1.w_cl", stage1.w_cl),
      REAL_FIELD("stage1.w_mi", stage1.w_mi),
      BOOL_FIELD("stage1.symmetric_cl", stage1.symmetric_cl),
      INT_FIELD("stage2.epochs", stage2.epochs),
      INT_FIELD("stage2.batch", stage2.batch),
      INT_FIELD("stage2.d_z", stage2.d_z),
      REAL_FIELD("stage2.lambda", stage2.lambda),
      REAL_FIELD("stage2.lr_d", stage2.lr_d),
      REAL_FIELD("stage2.lr_g", stage2.lr_g),
      REAL_FIELD("stage2.tau", stage2.tau),
      BOOL_FIELD("stage2.freeze_q", stage2.freeze_q),
      BOOL_FIELD("stage2.mixup", stage2.use_mixup),
      REAL_FIELD("stage2.mixup_alpha", stage2.mixup_alpha),
      Field{"stage2.optimizer",
            [](RunConfig& c, const std::string& v, const std::string& o) {
              if (v != "sgd" && v != "adam") {
                throw Error(str_cat(o, ": stage2.optimizer: '", v, "' is not sgd|adam"));
              }
              c.stage2.optimizer = v;
            },
            [](const RunConfig& c) { return c.stage2.optimizer; }},
      INT_FIELD("stage3.epochs", stage3.epochs),
      INT_FIELD("stage3.batch", stage3.batch),
      REAL_FIELD("stage3.lr", stage3.lr),
      Field{"stage3.mode",
            [](RunConfig& c, const std::string& v, const std::string& o) {
              if (v == "audio") {
                c.stage3_mode = ClassifierMode::audio;
              } else if (v == "fusion") {
                c.stage3_mode = ClassifierMode::fusion;
              } else {
                throw Error(str_cat(o, ": stage3.mode: '", v, "' is not audio|fusion"));
              }
            },
            [](const RunConfig& c) {
              return c.stage3_mode == ClassifierMode::audio ? "audio" : "fusion";
            }},
      Field{"stage3.augment",
            [](RunConfig& c, const std::string& v, const std::string& o) {
              if (v == "none") {
                c.stage3_augment = AugmentKind::none;
              } else if (v == "double") {
                c.stage3_augment = AugmentKind::double_ser;
              } else if (v == "multimodal") {
                c.stage3_augment = AugmentKind::multimodal;
              } else {
                throw Error(str_cat(o, ": stage3.augment: '", v,
                                    "' is not none|double|multimodal"));
              }
            },
            [](const RunConfig& c) {
              switch (c.stage3_augment) {
                case AugmentKind::none: return "none";
                case AugmentKind::double_ser: return "double";
                default: return "multimodal";
              }
            }},
      BOOL_FIELD("stage3.balance", stage3_balance),
      BOOL_FIELD("stage3.resample", stage3_resample),
  };
  return table;
}

#undef INT_FIELD
#undef REAL_FIELD
#undef BOOL_FIELD

const Field* find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  std::size_t hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

}  // namespace

void RunConfig::validate() const {
  check(jobs >= 1, "jobs: must be >= 1");
  check(stage1.epochs >= 1, "stage1.epochs: must be >= 1");
  check(stage1.batch >= 1, "stage1.batch: must be >= 1");
  check(stage1.lr > 0.0, "stage1.lr: must be positive");
  check(stage1.tau > 0.0, "stage1.tau: must be positive");
  check(stage1.w_ser >= 0.0, "stage1.w_ser: must be >= 0");
  check(stage1.w_cl >= 0.0, "stage1.w_cl: must be >= 0");
  check(stage1.w_mi >= 0.0, "stage1.w_mi: must be >= 0");
  check(stage1.batch >= 2 || (stage1.w_cl == 0.0 && stage1.w_mi == 0.0),
        "stage1.batch: batch size 1 is invalid while stage1.w_cl or stage1.w_mi is active");
  check(stage2.epochs >= 1, "stage2.epochs: must be >= 1");
  check(stage2.batch >= 2, "stage2.batch: must be >= 2");
  check(stage2.d_z >= 1, "stage2.d_z: must be >= 1");
  check(stage2.lambda >= 0.0, "stage2.lambda: must be >= 0");
  check(stage2.lr_d > 0.0, "stage2.lr_d: must be positive");
  check(stage2.lr_g > 0.0, "stage2.lr_g: must be positive");
  check(stage2.tau > 0.0, "stage2.tau: must be positive");
  check(stage2.mixup_alpha > 0.0, "stage2.mixup_alpha: must be positive");
  check(stage2.optimizer == "sgd" || stage2.optimizer == "adam",
        "stage2.optimizer: must be sgd or adam");
  check(stage3.epochs >= 1, "stage3.epochs: must be >= 1");
  check(stage3.batch >= 1, "stage3.batch: must be >= 1");
  check(stage3.lr > 0.0, "stage3.lr: must be positive");
  if (corpus_file.empty()) {
    try {
      synth.validate();
    } catch (const Error& e) {
      throw Error(str_cat("corpus.synth: ", e.what()));
    }
  }
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    check(eq != std::string::npos, origin, ": line ", line_no, ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = find_field(key);
    check(field != nullptr, origin, ": line ", line_no, ": unknown key '", key, "'");
    field->set(cfg, value, origin);
  }
  cfg.validate();
  return cfg;
}

std::string env_override_name(const std::string& key) {
  std::string name = "MIAUG_";
  for (char c : key) {
    name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(c)));
  }
  return name;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open config file ", path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg = parse_run_config(buffer.str(), path);
  for (const Field& f : fields()) {
    const char* env = std::getenv(env_override_name(f.key).c_str());
    if (env != nullptr) f.set(cfg, env, str_cat("env ", env_override_name(f.key)));
  }
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.reserve(fields().size());
  for (const Field& f : fields()) entries.emplace_back(f.key, f.get(cfg));
  std::sort(entries.begin(), entries.end());
  return entries;
}

}  // namespace miaug
