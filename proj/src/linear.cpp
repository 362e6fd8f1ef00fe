#include "miaug/linear.hpp"

#include <cmath>

namespace miaug {

LinearLayer LinearLayer::random_init(int out_dim, int in_dim, RngStream& rng) {
  check(out_dim > 0 && in_dim > 0, "LinearLayer: bad dims ", out_dim, "x", in_dim);
  LinearLayer layer(out_dim, in_dim);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(in_dim));
  rng.fill_gaussian(layer.weight.data(), 0.0, stddev);
  return layer;
}

Matrix linear_forward(const LinearLayer& layer, const Matrix& x) {
  check(x.cols() == layer.in_dim(), "linear_forward: input has ", x.cols(),
        " columns but layer expects ", layer.in_dim());
  Matrix y = matmul_bt(x, layer.weight);
  for (int i = 0; i < y.rows(); ++i) {
    for (int j = 0; j < y.cols(); ++j) y(i, j) += layer.bias[j];
  }
  return y;
}

LinearGrads linear_backward(const LinearLayer& layer, const Matrix& x, const Matrix& d_out) {
  check(x.cols() == layer.in_dim(), "linear_backward: input has ", x.cols(),
        " columns but layer expects ", layer.in_dim());
  check(d_out.rows() == x.rows() && d_out.cols() == layer.out_dim(),
        "linear_backward: d_out is ", d_out.rows(), "x", d_out.cols(), ", expected ",
        x.rows(), "x", layer.out_dim());
  LinearGrads g;
  g.d_input = matmul(d_out, layer.weight);
  g.d_weight = matmul_at(d_out, x);
  g.d_bias = col_sums(d_out);
  return g;
}

Vec linear_forward_vec(const LinearLayer& layer, std::span<const double> x) {
  check(static_cast<int>(x.size()) == layer.in_dim(), "linear_forward_vec: input has ",
        x.size(), " entries but layer expects ", layer.in_dim());
  Vec y(layer.bias);
  for (int i = 0; i < layer.out_dim(); ++i) {
    y[i] += dot(layer.weight.row(i), x);
  }
  return y;
}

}  // namespace miaug
