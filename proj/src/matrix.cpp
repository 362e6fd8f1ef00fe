#include "miaug/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace miaug {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  check(rows >= 0 && cols >= 0, "Matrix: negative shape ", rows, "x", cols);
}

Matrix::Matrix(int rows, int cols, Vec data) : rows_(rows), cols_(cols), data_(std::move(data)) {
  check(data_.size() == static_cast<std::size_t>(rows) * cols,
        "Matrix: data length ", data_.size(), " does not match shape ", rows, "x", cols);
}

void Matrix::set_row(int r, std::span<const double> values) {
  check(static_cast<int>(values.size()) == cols_,
        "set_row: expected ", cols_, " values, got ", values.size());
  std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::size_t>(r) * cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  check(a.cols() == b.rows(), "matmul: inner dims differ, ", a.rows(), "x", a.cols(),
        " * ", b.rows(), "x", b.cols());
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  check(a.cols() == b.cols(), "matmul_bt: inner dims differ, ", a.rows(), "x", a.cols(),
        " * (", b.rows(), "x", b.cols(), ")^T");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.rows(); ++j) {
      c(i, j) = dot(a.row(i), b.row(j));
    }
  }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  check(a.rows() == b.rows(), "matmul_at: inner dims differ, (", a.rows(), "x", a.cols(),
        ")^T * ", b.rows(), "x", b.cols());
  Matrix c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

void add_inplace(Matrix& a, const Matrix& b, double scale) {
  check(a.same_shape(b), "add_inplace: shape mismatch ", a.rows(), "x", a.cols(), " vs ",
        b.rows(), "x", b.cols());
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += scale * b.data()[i];
}

void scale_inplace(Matrix& a, double s) {
  for (double& x : a.data()) x *= s;
}

Vec col_sums(const Matrix& a) {
  Vec sums(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) sums[j] += a(i, j);
  }
  return sums;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check(a.size() == b.size(), "dot: length mismatch ", a.size(), " vs ", b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check(x.size() == y.size(), "axpy: length mismatch ", x.size(), " vs ", y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double log_sum_exp(std::span<const double> v) {
  check(!v.empty(), "log_sum_exp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Vec softmax(std::span<const double> logits) {
  check(!logits.empty(), "softmax: empty logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    s += p[i];
  }
  for (double& x : p) x /= s;
  return p;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    p.set_row(i, softmax(logits.row(i)));
  }
  return p;
}

int argmax(std::span<const double> v) {
  check(!v.empty(), "argmax: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace miaug
