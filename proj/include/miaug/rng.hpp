// Deterministic random streams.
//
// std::mt19937_64 has a fully specified bit sequence, but the standard
// distributions do not, so every draw here is implemented directly on top of
// the raw engine output. That keeps results bit-identical across compilers
// and platforms.
//
// Stream discipline: one master seed per run; child streams are derived by
// hashing a label ("stage1/fold:3") into the seed, so reordering stages or
// running folds in parallel cannot change what any stream draws.

#ifndef MIAUG_RNG_HPP
#define MIAUG_RNG_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "miaug/common.hpp"

namespace miaug {

std::uint64_t splitmix64(std::uint64_t x);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Child stream for (master seed, label); documented derivation:
  // seed' = splitmix64(master ^ fnv1a64(label)).
  static RngStream derive(std::uint64_t master, std::string_view label);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n);

  // Standard normal via Box-Muller; pairs are cached.
  double gaussian();

  // Gamma(shape, 1) via Marsaglia-Tsang, with the a<1 boost.
  double gamma(double shape);

  // Beta(a, b) from two gamma draws.
  double beta(double a, double b);

  void fill_gaussian(Vec& out, double mean = 0.0, double stddev = 1.0);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace miaug

#endif  // MIAUG_RNG_HPP
