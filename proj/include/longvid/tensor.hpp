// Copyright 2026 The longvid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LONGVID_TENSOR_HPP_
#define LONGVID_TENSOR_HPP_

#include <cstddef>
#include <cstring>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace longvid {

/// Dense row-major matrix of doubles. Token matrices are rows = time-ordered
/// tokens, cols = channels; kernel inputs are rows = channels, cols = length.
class Tensor2D {
 public:
  Tensor2D() = default;
  Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor2D from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Tensor2D t(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != t.cols_) throw std::invalid_argument("ragged initializer rows");
      std::size_t c = 0;
      for (double v : row) t(r, c++) = v;
      ++r;
    }
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  bool same_shape(const Tensor2D& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Tensor2D transposed() const {
    Tensor2D t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool all_finite(const Tensor2D& t);
bool all_finite(const std::vector<double>& v);

/// Exact comparison, including shape. Used by determinism and purity tests.
bool bit_equal(const Tensor2D& a, const Tensor2D& b);

/// Max |a - b| over elements; throws on shape mismatch.
double max_abs_diff(const Tensor2D& a, const Tensor2D& b);
double max_abs(const Tensor2D& t);

Tensor2D add(const Tensor2D& a, const Tensor2D& b);

}  // namespace longvid

#endif  // LONGVID_TENSOR_HPP_
