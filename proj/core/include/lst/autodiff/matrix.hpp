/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef LST_AUTODIFF_MATRIX_HPP_
#define LST_AUTODIFF_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lst::ad {

// Dense row-major f64 matrix. All reductions in this library run in a fixed
// sequential order so results are bit-reproducible and independent of the
// matrix size a row happens to live in.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix row(std::span<const double> values);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  Matrix& operator+=(const Matrix& other);
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_string() const;

  // Bitwise equality, including shape.
  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// c = a * b. Each output element accumulates over the inner dimension in
// increasing index order.
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a * b^T.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// c = a^T * b.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double log_sum_exp(std::span<const double> xs);
// Numerically stable log(exp(a) + exp(b)); handles -inf operands.
double log_add(double a, double b);

}  // namespace lst::ad

#endif  // LST_AUTODIFF_MATRIX_HPP_
