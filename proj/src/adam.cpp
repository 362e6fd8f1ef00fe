#include "miaug/adam.hpp"

#include <cmath>

namespace miaug {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  check(params.size() == grads.size(), "adam_step: params/grads length mismatch ",
        params.size(), " vs ", grads.size());
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  check(state.m.size() == params.size(), "adam_step: state sized for ", state.m.size(),
        " params, got ", params.size());
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace miaug
