// Copyright 2026 The LDDGAN Authors.
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lddgan {

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array. Values are held in double precision; a kF32 tensor
// keeps every element rounded to the nearest float so that it serialises
// losslessly as 32-bit data. A rank-0 tensor is a scalar.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0, DType dtype = DType::kF64);
  Tensor(Shape shape, std::vector<double> data, DType dtype = DType::kF64);

  static Tensor scalar(double value, DType dtype = DType::kF64);
  static Tensor from(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const;
  DType dtype() const { return dtype_; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;

  // Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const;
  Tensor cast(DType dtype) const;

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  // Rows along axis 0, copied into a new tensor.
  Tensor rows(std::span<const std::size_t> indices) const;

  friend bool bitwise_equal(const Tensor& a, const Tensor& b);

 private:
  void round_to_dtype();

  Shape shape_;
  std::vector<double> data_;
  DType dtype_ = DType::kF64;
};

bool bitwise_equal(const Tensor& a, const Tensor& b);

// Throws ShapeError if any extent is zero.
void check_shape(const Shape& shape);

}  // namespace lddgan
