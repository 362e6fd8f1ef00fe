// LinearLayer is the universal building block here: classifier head, text
// projector, generator and discriminator are all a weight matrix plus bias.

#ifndef MIAUG_LINEAR_HPP
#define MIAUG_LINEAR_HPP

#include "miaug/matrix.hpp"
#include "miaug/rng.hpp"

namespace miaug {

struct LinearLayer {
  Matrix weight;  // [out x in]
  Vec bias;       // [out]

  LinearLayer() = default;
  LinearLayer(int out_dim, int in_dim)
      : weight(out_dim, in_dim), bias(static_cast<std::size_t>(out_dim), 0.0) {}

  int in_dim() const { return weight.cols(); }
  int out_dim() const { return weight.rows(); }

  // Gaussian(0, 1/sqrt(in_dim)) weights, zero bias.
  static LinearLayer random_init(int out_dim, int in_dim, RngStream& rng);

  friend bool operator==(const LinearLayer& a, const LinearLayer& b) {
    return a.weight == b.weight && a.bias == b.bias;
  }
};

struct LinearGrads {
  Matrix d_input;   // [B x in]
  Matrix d_weight;  // [out x in]
  Vec d_bias;       // [out]
};

// Y[B x out], row i = W * x_i + b.
Matrix linear_forward(const LinearLayer& layer, const Matrix& x);

// Backward pass for the forward above: dX = dY W, dW = dY^T X, db = colsum(dY).
LinearGrads linear_backward(const LinearLayer& layer, const Matrix& x, const Matrix& d_out);

Vec linear_forward_vec(const LinearLayer& layer, std::span<const double> x);

}  // namespace miaug

#endif  // MIAUG_LINEAR_HPP
