// Adam with bias correction. One AdamState per parameter block; the moment
// buffers are sized lazily on the first step.

#ifndef MIAUG_ADAM_HPP
#define MIAUG_ADAM_HPP

#include <cstdint>
#include <span>

#include "miaug/common.hpp"
#include "miaug/linear.hpp"

namespace miaug {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  Vec m;
  Vec v;

  AdamState() = default;
  explicit AdamState(double learning_rate) { lr = learning_rate; }
};

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// Paired states for a LinearLayer's weight and bias.
struct LayerAdam {
  AdamState weight;
  AdamState bias;

  explicit LayerAdam(double lr) : weight(lr), bias(lr) {}

  void step(LinearLayer& layer, const Matrix& d_weight, const Vec& d_bias) {
    adam_step(weight, layer.weight.data(), d_weight.data());
    adam_step(bias, layer.bias, d_bias);
  }
};

}  // namespace miaug

#endif  // MIAUG_ADAM_HPP
