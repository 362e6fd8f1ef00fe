#include "miaug/checkpoint.hpp"

#include <map>

#include "miaug/binio.hpp"

namespace miaug {

namespace {

void write_layer(BinWriter& w, const std::string& name, const LinearLayer& layer) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(layer.weight.rows()));
  w.u32(static_cast<std::uint32_t>(layer.weight.cols()));
  for (double x : layer.weight.data()) w.f64(x);
  for (double x : layer.bias) w.f64(x);
}

LinearLayer read_layer(BinReader& r, const std::string& expected_name) {
  const std::string name = r.str("layer name");
  check(name == expected_name, r.path(), ": expected layer '", expected_name, "', found '",
        name, "'");
  const int rows = static_cast<int>(r.u32("layer rows"));
  const int cols = static_cast<int>(r.u32("layer cols"));
  check(rows > 0 && cols > 0, r.path(), ": layer '", name, "' has bad shape ", rows, "x", cols);
  LinearLayer layer(rows, cols);
  for (double& x : layer.weight.data()) x = r.f64("layer weight");
  for (double& x : layer.bias) x = r.f64("layer bias");
  return layer;
}

class ScalarSection {
 public:
  void put(const std::string& name, double value) { values_.emplace_back(name, value); }
  void write(BinWriter& w) const {
    w.u32(static_cast<std::uint32_t>(values_.size()));
    for (const auto& [name, value] : values_) {
      w.str(name);
      w.f64(value);
    }
  }
  static std::map<std::string, double> read(BinReader& r) {
    std::map<std::string, double> out;
    const std::uint32_t n = r.u32("scalar count");
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::string name = r.str("scalar name");
      out[name] = r.f64("scalar value");
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, double>> values_;
};

BinReader open_checkpoint(const std::string& path, const std::string& expected_kind) {
  BinReader r(read_file_bytes(path), path);
  r.expect_magic();
  const std::string kind = r.str("checkpoint kind");
  check(kind == expected_kind, path, ": checkpoint kind is '", kind, "', expected '",
        expected_kind, "'");
  return r;
}

void finish_checkpoint(BinReader& r) {
  check(r.remaining() == 0, r.path(), ": ", r.remaining(), " trailing bytes at byte offset ",
        r.pos());
}

double require(const std::map<std::string, double>& scalars, const std::string& name,
               const std::string& path) {
  const auto it = scalars.find(name);
  check(it != scalars.end(), path, ": checkpoint is missing scalar '", name, "'");
  return it->second;
}

}  // namespace

void save_baseline(const BaselineModel& model, const std::string& path) {
  BinWriter w;
  w.raw(kFileMagic, sizeof(kFileMagic));
  w.str("baseline-model");
  w.u32(2);
  write_layer(w, "classifier_head", model.classifier_head);
  write_layer(w, "text_projector", model.text_projector);
  ScalarSection scalars;
  scalars.put("tau", model.tau);
  scalars.write(w);
  write_file_bytes(path, w.bytes());
}

BaselineModel load_baseline(const std::string& path) {
  BinReader r = open_checkpoint(path, "baseline-model");
  const std::uint32_t layers = r.u32("layer count");
  check(layers == 2, path, ": baseline checkpoint must hold 2 layers, found ", layers);
  BaselineModel model;
  model.classifier_head = read_layer(r, "classifier_head");
  model.text_projector = read_layer(r, "text_projector");
  const auto scalars = ScalarSection::read(r);
  model.tau = require(scalars, "tau", path);
  finish_checkpoint(r);
  check(model.classifier_head.in_dim() == model.text_projector.in_dim(), path,
        ": head and projector disagree on the audio dim");
  return model;
}

void save_gan(const GanBundle& bundle, const std::string& path) {
  BinWriter w;
  w.raw(kFileMagic, sizeof(kFileMagic));
  w.str("gan-bundle");
  w.u32(2);
  write_layer(w, "generator", bundle.generator);
  write_layer(w, "discriminator", bundle.discriminator);
  ScalarSection scalars;
  scalars.put("d_z", static_cast<double>(bundle.d_z));
  scalars.put("num_classes", static_cast<double>(bundle.num_classes));
  scalars.put("d_text", static_cast<double>(bundle.d_text));
  scalars.put("lambda", bundle.lambda);
  scalars.put("freeze_q", bundle.freeze_q ? 1.0 : 0.0);
  scalars.write(w);
  write_file_bytes(path, w.bytes());
}

GanBundle load_gan(const std::string& path) {
  BinReader r = open_checkpoint(path, "gan-bundle");
  const std::uint32_t layers = r.u32("layer count");
  check(layers == 2, path, ": gan checkpoint must hold 2 layers, found ", layers);
  GanBundle bundle;
  bundle.generator = read_layer(r, "generator");
  bundle.discriminator = read_layer(r, "discriminator");
  const auto scalars = ScalarSection::read(r);
  bundle.d_z = static_cast<int>(require(scalars, "d_z", path));
  bundle.num_classes = static_cast<int>(require(scalars, "num_classes", path));
  bundle.d_text = static_cast<int>(require(scalars, "d_text", path));
  bundle.lambda = require(scalars, "lambda", path);
  bundle.freeze_q = require(scalars, "freeze_q", path) != 0.0;
  finish_checkpoint(r);
  check(bundle.generator.in_dim() == bundle.conditioning_dim(), path,
        ": generator input dim ", bundle.generator.in_dim(), " != d_z + K + d_text = ",
        bundle.conditioning_dim());
  check(bundle.discriminator.out_dim() == 1, path, ": discriminator must emit one logit");
  return bundle;
}

void save_final_classifier(const FinalClassifier& classifier, const std::string& path) {
  BinWriter w;
  w.raw(kFileMagic, sizeof(kFileMagic));
  w.str("final-classifier");
  w.u32(1);
  write_layer(w, "head", classifier.head);
  ScalarSection scalars;
  scalars.put("mode", classifier.mode == ClassifierMode::audio ? 0.0 : 1.0);
  scalars.put("d_audio", static_cast<double>(classifier.d_audio));
  scalars.put("d_text", static_cast<double>(classifier.d_text));
  scalars.put("num_classes", static_cast<double>(classifier.num_classes));
  scalars.write(w);
  write_file_bytes(path, w.bytes());
}

FinalClassifier load_final_classifier(const std::string& path) {
  BinReader r = open_checkpoint(path, "final-classifier");
  const std::uint32_t layers = r.u32("layer count");
  check(layers == 1, path, ": final-classifier checkpoint must hold 1 layer, found ", layers);
  FinalClassifier classifier;
  classifier.head = read_layer(r, "head");
  const auto scalars = ScalarSection::read(r);
  classifier.mode =
      require(scalars, "mode", path) == 0.0 ? ClassifierMode::audio : ClassifierMode::fusion;
  classifier.d_audio = static_cast<int>(require(scalars, "d_audio", path));
  classifier.d_text = static_cast<int>(require(scalars, "d_text", path));
  classifier.num_classes = static_cast<int>(require(scalars, "num_classes", path));
  finish_checkpoint(r);
  const int expected_in = classifier.mode == ClassifierMode::audio
                              ? classifier.d_audio
                              : classifier.d_audio + classifier.d_text;
  check(classifier.head.in_dim() == expected_in, path, ": head input dim ",
        classifier.head.in_dim(), " does not match mode/dims (expected ", expected_in, ")");
  return classifier;
}

}  // namespace miaug
