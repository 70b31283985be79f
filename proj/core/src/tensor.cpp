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

#include "lddgan/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "lddgan/error.hpp"

namespace lddgan {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void check_shape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("invalid shape " + shape_str(shape) + ": zero extent");
  }
}

Tensor::Tensor(Shape shape, double fill, DType dtype)
    : shape_(std::move(shape)), dtype_(dtype) {
  check_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
  round_to_dtype();
}

Tensor::Tensor(Shape shape, std::vector<double> data, DType dtype)
    : shape_(std::move(shape)), data_(std::move(data)), dtype_(dtype) {
  check_shape(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
  round_to_dtype();
}

Tensor Tensor::scalar(double value, DType dtype) { return Tensor(Shape{}, value, dtype); }

Tensor Tensor::from(std::initializer_list<double> values) {
  return Tensor(Shape{values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw IndexError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape_));
  }
  return shape_[axis];
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  check_shape(shape);
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

Tensor Tensor::cast(DType dtype) const {
  Tensor out = *this;
  out.dtype_ = dtype;
  out.round_to_dtype();
  return out;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::rows(std::span<const std::size_t> indices) const {
  if (shape_.empty()) throw ShapeError("rows() on a scalar");
  const std::size_t stride = data_.size() / shape_[0];
  Shape s = shape_;
  s[0] = indices.size();
  std::vector<double> out(indices.size() * stride);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= shape_[0]) throw IndexError("row index out of range");
    std::memcpy(out.data() + i * stride, data_.data() + indices[i] * stride,
                stride * sizeof(double));
  }
  return Tensor(std::move(s), std::move(out), dtype_);
}

void Tensor::round_to_dtype() {
  if (dtype_ == DType::kF32) {
    for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
  }
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape_ == b.shape_ && a.dtype_ == b.dtype_ &&
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0;
}

}  // namespace lddgan
