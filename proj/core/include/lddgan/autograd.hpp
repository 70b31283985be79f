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

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "lddgan/tensor.hpp"

namespace lddgan {

class Var;

// Gradient rule of one recorded operation: maps the upstream gradient to one
// gradient per input (an undefined Var means "no gradient"). Rules are written
// in terms of Var operations so that a backward pass can itself be recorded
// and differentiated again.
using BackwardFn = std::function<std::vector<Var>(const Var& grad, const std::vector<Var>& inputs)>;

struct Node {
  Tensor value;
  bool requires_grad = false;
  std::vector<Var> inputs;
  BackwardFn backward;
  const char* op = "leaf";
};

// Handle to a node of the computation graph. Cheap to copy; copies alias.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  static Var parameter(Tensor value) { return Var(std::move(value), true); }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  // Leaf parameters are updated in place by optimizers.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const char* op() const { return node_->op; }
  double item() const { return node_->value.item(); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

  // Same value, disconnected from the graph.
  Var detach() const { return Var(node_->value); }

 private:
  friend Var make_op(Tensor, std::vector<Var>, BackwardFn, const char*);
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  std::shared_ptr<Node> node_;
};

inline Var constant(Tensor t) { return Var(std::move(t)); }

bool grad_enabled();

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Records an operation when recording is on and some input needs gradients;
// otherwise returns a constant.
Var make_op(Tensor value, std::vector<Var> inputs, BackwardFn backward, const char* op);

// Gradients of `output` (scalar unless `grad_output` is given) with respect to
// `wrt`. Inputs the output does not depend on receive zeros. With
// create_graph the returned gradients are themselves differentiable.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph = false,
                      Var grad_output = Var());

// ---- elementwise (numpy-style broadcasting) ----
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(const Var& a, double s);
Var operator*(double s, const Var& a);
Var operator+(const Var& a, double s);
Var operator+(double s, const Var& a);
Var operator-(double s, const Var& a);
Var operator-(const Var& a, double s);

Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var pow(const Var& a, double exponent);
Var square(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var abs(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var silu(const Var& a);

// ---- shape and reduction ----
Var reshape(const Var& a, Shape shape);
Var broadcast_to(const Var& a, const Shape& shape);
// Sums over broadcast dimensions so the result has `shape`.
Var sum_to(const Var& a, const Shape& shape);
Var sum(const Var& a, std::vector<std::size_t> axes, bool keepdims = false);
Var mean(const Var& a, std::vector<std::size_t> axes, bool keepdims = false);
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);  // [M,K] x [K,N]
Var transpose(const Var& a);             // rank 2

// ---- last-axis concatenation ----
Var concat_last(const std::vector<Var>& parts);
Var slice_last(const Var& a, std::size_t offset, std::size_t length);
Var pad_last(const Var& a, std::size_t offset, std::size_t total);

// ---- NHWC image primitives ----
struct ConvGeometry {
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 1;
};
// [N,H,W,C] -> [N*Ho*Wo, k*k*C], column index (ky*k + kx)*C + c.
Var im2col(const Var& x, ConvGeometry g);
// Adjoint of im2col.
Var col2im(const Var& cols, const Shape& image_shape, ConvGeometry g);
Var upsample2x(const Var& x);
Var sumpool2x(const Var& x);

Shape broadcast_shapes(const Shape& a, const Shape& b);

}  // namespace lddgan
