// Dense row-major matrix with the handful of kernels the toolkit needs.
// Everything is double precision and deterministic: identical inputs give
// bit-identical outputs.

#ifndef MIAUG_MATRIX_HPP
#define MIAUG_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "miaug/common.hpp"

namespace miaug {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, Vec data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  Vec& data() { return data_; }
  const Vec& data() const { return data_; }

  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  void set_row(int r, std::span<const double> values);

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vec data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
void add_inplace(Matrix& a, const Matrix& b, double scale = 1.0);
void scale_inplace(Matrix& a, double s);
Vec col_sums(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Single-vector softmax, stable under additive shift of the logits.
Vec softmax(std::span<const double> logits);
// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits);
// log(sum(exp(row))) per row, max-shifted.
double log_sum_exp(std::span<const double> v);

// Index of the row maximum; ties break toward the lower index.
int argmax(std::span<const double> v);

}  // namespace miaug

#endif  // MIAUG_MATRIX_HPP
