// Model checkpoints share the corpus file's envelope style: "MIAUG1" magic,
// a kind string, then named sections (linear layers as dims + row-major
// little-endian f64, plus scalar and flag metadata). Round-trips are
// bit-exact.

#ifndef MIAUG_CHECKPOINT_HPP
#define MIAUG_CHECKPOINT_HPP

#include <string>

#include "miaug/augment.hpp"
#include "miaug/baseline.hpp"
#include "miaug/infogan.hpp"

namespace miaug {

void save_baseline(const BaselineModel& model, const std::string& path);
BaselineModel load_baseline(const std::string& path);

void save_gan(const GanBundle& bundle, const std::string& path);
GanBundle load_gan(const std::string& path);

void save_final_classifier(const FinalClassifier& classifier, const std::string& path);
FinalClassifier load_final_classifier(const std::string& path);

}  // namespace miaug

#endif  // MIAUG_CHECKPOINT_HPP
