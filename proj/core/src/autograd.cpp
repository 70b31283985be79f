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

#include "lddgan/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include <Eigen/Core>

#include "lddgan/error.hpp"

namespace lddgan {
namespace {

thread_local bool g_grad_enabled = true;

// ---------------------------------------------------------------------------
// Broadcast iteration.

std::vector<std::size_t> broadcast_strides(const Shape& operand, const Shape& out) {
  const std::size_t r = out.size();
  std::vector<std::size_t> strides(r, 0);
  const std::size_t offset = r - operand.size();
  std::size_t stride = 1;
  for (std::size_t i = operand.size(); i-- > 0;) {
    const std::size_t d = i + offset;
    strides[d] = (operand[i] == 1 && out[d] != 1) ? 0 : stride;
    stride *= operand[i];
  }
  return strides;
}

// Calls f(out_index, a_index, b_index) for every element of `out`.
template <class F>
void broadcast_loop(const Shape& out, const std::vector<std::size_t>& sa,
                    const std::vector<std::size_t>& sb, F&& f) {
  const std::size_t r = out.size();
  if (r == 0) {
    f(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  const std::size_t inner = out[r - 1];
  const std::size_t step_a = sa[r - 1];
  const std::size_t step_b = sb[r - 1];
  const std::size_t outer = shape_numel(out) / inner;
  std::vector<std::size_t> idx(r, 0);
  std::size_t oa = 0, ob = 0, o = 0;
  for (std::size_t n = 0; n < outer; ++n) {
    for (std::size_t j = 0; j < inner; ++j) f(o + j, oa + j * step_a, ob + j * step_b);
    o += inner;
    for (std::size_t d = r - 1; d-- > 0;) {
      ++idx[d];
      oa += sa[d];
      ob += sb[d];
      if (idx[d] < out[d]) break;
      oa -= sa[d] * out[d];
      ob -= sb[d] * out[d];
      idx[d] = 0;
    }
  }
}

template <class F>
Tensor binary_kernel(const Tensor& a, const Tensor& b, F f) {
  if (a.shape() == b.shape()) {
    Tensor out(a.shape());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i], y[i]);
    return out;
  }
  if (b.size() == 1 && b.rank() <= a.rank()) {
    Tensor out(a.shape());
    auto o = out.data();
    auto x = a.data();
    const double y = b[0];
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i], y);
    return out;
  }
  const Shape shape = broadcast_shapes(a.shape(), b.shape());
  Tensor out(shape);
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  broadcast_loop(shape, broadcast_strides(a.shape(), shape), broadcast_strides(b.shape(), shape),
                 [&](std::size_t i, std::size_t ia, std::size_t ib) { o[i] = f(x[ia], y[ib]); });
  return out;
}

template <class F>
Tensor unary_kernel(const Tensor& a, F f) {
  Tensor out(a.shape());
  auto o = out.data();
  auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i]);
  return out;
}

void check_broadcastable_to(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) {
    throw ShapeError("cannot broadcast " + shape_str(small) + " to " + shape_str(big));
  }
  const std::size_t off = big.size() - small.size();
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (small[i] != 1 && small[i] != big[i + off]) {
      throw ShapeError("cannot broadcast " + shape_str(small) + " to " + shape_str(big));
    }
  }
}

Tensor sum_to_kernel(const Tensor& a, const Shape& target) {
  if (a.shape() == target) return a;
  check_broadcastable_to(target, a.shape());
  Tensor out(target);
  auto o = out.data();
  auto x = a.data();
  if (out.size() == 1) {
    double s = 0.0;
    for (double v : x) s += v;
    o[0] = s;
    return out;
  }
  const auto st = broadcast_strides(target, a.shape());
  const std::vector<std::size_t> dummy(a.rank(), 0);
  broadcast_loop(a.shape(), st, dummy,
                 [&](std::size_t i, std::size_t it, std::size_t) { o[it] += x[i]; });
  return out;
}

Tensor broadcast_to_kernel(const Tensor& a, const Shape& shape) {
  if (a.shape() == shape) return a;
  check_broadcastable_to(a.shape(), shape);
  Tensor out(shape);
  auto o = out.data();
  auto x = a.data();
  const auto st = broadcast_strides(a.shape(), shape);
  const std::vector<std::size_t> dummy(shape.size(), 0);
  broadcast_loop(shape, st, dummy, [&](std::size_t i, std::size_t ia, std::size_t) { o[i] = x[ia]; });
  return out;
}

Tensor matmul_kernel(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Tensor out({m, n});
  Eigen::Map<const RowMajor> ma(a.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  Eigen::Map<const RowMajor> mb(b.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  Eigen::Map<RowMajor> mc(out.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  mc.noalias() = ma * mb;
  return out;
}

Tensor transpose_kernel(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose expects rank 2, got " + shape_str(a.shape()));
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({n, m});
  auto o = out.data();
  auto x = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) o[j * m + i] = x[i * n + j];
  return out;
}

void check_image(const Shape& s, const char* op) {
  if (s.size() != 4) throw ShapeError(std::string(op) + " expects NHWC, got " + shape_str(s));
}

std::size_t conv_out_extent(std::size_t in, ConvGeometry g) {
  if (in + 2 * g.pad < g.kernel) throw ShapeError("convolution window larger than padded input");
  return (in + 2 * g.pad - g.kernel) / g.stride + 1;
}

Tensor im2col_kernel(const Tensor& x, ConvGeometry g) {
  check_image(x.shape(), "im2col");
  const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const std::size_t ho = conv_out_extent(h, g), wo = conv_out_extent(w, g);
  const std::size_t k = g.kernel;
  const std::size_t cols = k * k * c;
  Tensor out({n * ho * wo, cols});
  double* o = out.data().data();
  const double* px = x.data().data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double* row = o + ((b * ho + oy) * wo + ox) * cols;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            std::memcpy(row + (ky * k + kx) * c, px + ((b * h + iy) * w + ix) * c,
                        c * sizeof(double));
          }
        }
      }
  return out;
}

Tensor col2im_kernel(const Tensor& cols, const Shape& image, ConvGeometry g) {
  check_image(image, "col2im");
  const std::size_t n = image[0], h = image[1], w = image[2], c = image[3];
  const std::size_t ho = conv_out_extent(h, g), wo = conv_out_extent(w, g);
  const std::size_t k = g.kernel;
  const std::size_t ncols = k * k * c;
  if (cols.rank() != 2 || cols.dim(0) != n * ho * wo || cols.dim(1) != ncols) {
    throw ShapeError("col2im: column matrix " + shape_str(cols.shape()) +
                     " does not match image " + shape_str(image));
  }
  Tensor out(image);
  double* o = out.data().data();
  const double* pc = cols.data().data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        const double* row = pc + ((b * ho + oy) * wo + ox) * ncols;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            double* dst = o + ((b * h + iy) * w + ix) * c;
            const double* src = row + (ky * k + kx) * c;
            for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
          }
        }
      }
  return out;
}

Tensor upsample_kernel(const Tensor& x) {
  check_image(x.shape(), "upsample2x");
  const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor out({n, 2 * h, 2 * w, c});
  double* o = out.data().data();
  const double* px = x.data().data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx)
        std::memcpy(o + ((b * 2 * h + y) * 2 * w + xx) * c, px + ((b * h + y / 2) * w + xx / 2) * c,
                    c * sizeof(double));
  return out;
}

Tensor sumpool_kernel(const Tensor& x) {
  check_image(x.shape(), "sumpool2x");
  const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  if (h % 2 || w % 2) throw ShapeError("sumpool2x needs even extents, got " + shape_str(x.shape()));
  Tensor out({n, h / 2, w / 2, c});
  double* o = out.data().data();
  const double* px = x.data().data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) {
        double* dst = o + ((b * (h / 2) + y / 2) * (w / 2) + xx / 2) * c;
        const double* src = px + ((b * h + y) * w + xx) * c;
        for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
      }
  return out;
}

bool any_requires_grad(const std::vector<Var>& inputs) {
  return std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
}

}  // namespace

// ---------------------------------------------------------------------------

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var make_op(Tensor value, std::vector<Var> inputs, BackwardFn backward, const char* op) {
  if (!g_grad_enabled || !any_requires_grad(inputs)) return Var(std::move(value));
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  node->op = op;
  return Var(std::move(node));
}

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph,
                      Var grad_output) {
  if (!output.defined()) throw Error("grad: undefined output");
  if (!grad_output.defined()) {
    if (output.size() != 1) {
      throw ShapeError("grad: non-scalar output " + shape_str(output.shape()) +
                       " needs an explicit grad_output");
    }
    grad_output = constant(Tensor(output.shape(), 1.0));
  }

  // Post-order DFS over nodes that carry gradients.
  std::vector<Node*> order;
  std::unordered_map<Node*, Var> grads;
  if (output.requires_grad()) {
    std::unordered_map<Node*, bool> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(output.node(), 0);
    visited[output.node()] = true;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->inputs.size()) {
        Node* child = node->inputs[next++].node();
        if (child && child->requires_grad && !visited[child]) {
          visited[child] = true;
          stack.emplace_back(child, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
    grads[output.node()] = grad_output;
  }

  // Without create_graph, branches that cannot reach any `wrt` node are
  // switched off for the duration of the sweep so their rules skip them.
  std::vector<Node*> pruned;
  if (!create_graph && !order.empty()) {
    std::unordered_map<Node*, bool> reaches;
    for (const Var& w : wrt) {
      if (w.defined()) reaches[w.node()] = true;
    }
    for (Node* node : order) {
      bool r = reaches.count(node) > 0;
      for (const Var& in : node->inputs) {
        if (r) break;
        auto f = reaches.find(in.node());
        r = f != reaches.end() && f->second;
      }
      reaches[node] = r;
      if (!r) pruned.push_back(node);
    }
    for (Node* node : pruned) node->requires_grad = false;
  }
  const auto restore = [&pruned] {
    for (Node* node : pruned) node->requires_grad = true;
  };

  const bool previous = g_grad_enabled;
  g_grad_enabled = create_graph;
  try {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* node = *it;
      if (!node->backward) continue;
      auto found = grads.find(node);
      if (found == grads.end()) continue;
      const Var g = found->second;
      std::vector<Var> input_grads = node->backward(g, node->inputs);
      for (std::size_t i = 0; i < node->inputs.size(); ++i) {
        const Var& in = node->inputs[i];
        if (!in.requires_grad() || !input_grads[i].defined()) continue;
        auto& slot = grads[in.node()];
        slot = slot.defined() ? slot + input_grads[i] : input_grads[i];
      }
      if (!create_graph) grads.erase(node);
    }
  } catch (...) {
    g_grad_enabled = previous;
    restore();
    throw;
  }
  g_grad_enabled = previous;
  restore();

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (const Var& w : wrt) {
    auto found = grads.find(w.node());
    if (found != grads.end() && found->second.defined()) {
      result.push_back(found->second);
    } else {
      result.push_back(constant(Tensor(w.shape())));
    }
  }
  return result;
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const std::size_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("shapes " + shape_str(a) + " and " + shape_str(b) + " do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise.

Var operator+(const Var& a, const Var& b) {
  return make_op(
      binary_kernel(a.value(), b.value(), [](double x, double y) { return x + y; }), {a, b},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{in[0].requires_grad() ? sum_to(g, in[0].shape()) : Var(),
                                in[1].requires_grad() ? sum_to(g, in[1].shape()) : Var()};
      },
      "add");
}

Var operator-(const Var& a, const Var& b) {
  return make_op(
      binary_kernel(a.value(), b.value(), [](double x, double y) { return x - y; }), {a, b},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{in[0].requires_grad() ? sum_to(g, in[0].shape()) : Var(),
                                in[1].requires_grad() ? sum_to(-g, in[1].shape()) : Var()};
      },
      "sub");
}

Var operator*(const Var& a, const Var& b) {
  return make_op(
      binary_kernel(a.value(), b.value(), [](double x, double y) { return x * y; }), {a, b},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{in[0].requires_grad() ? sum_to(g * in[1], in[0].shape()) : Var(),
                                in[1].requires_grad() ? sum_to(g * in[0], in[1].shape()) : Var()};
      },
      "mul");
}

Var operator/(const Var& a, const Var& b) {
  return make_op(
      binary_kernel(a.value(), b.value(), [](double x, double y) { return x / y; }), {a, b},
      [](const Var& g, const std::vector<Var>& in) {
        Var ga, gb;
        if (in[0].requires_grad()) ga = sum_to(g / in[1], in[0].shape());
        if (in[1].requires_grad()) gb = sum_to(-(g * in[0]) / square(in[1]), in[1].shape());
        return std::vector<Var>{ga, gb};
      },
      "div");
}

Var operator-(const Var& a) {
  return make_op(
      unary_kernel(a.value(), [](double x) { return -x; }), {a},
      [](const Var& g, const std::vector<Var>&) { return std::vector<Var>{-g}; }, "neg");
}

Var operator*(const Var& a, double s) {
  return make_op(
      unary_kernel(a.value(), [s](double x) { return x * s; }), {a},
      [s](const Var& g, const std::vector<Var>&) { return std::vector<Var>{g * s}; }, "scale");
}
Var operator*(double s, const Var& a) { return a * s; }

Var operator+(const Var& a, double s) {
  return make_op(
      unary_kernel(a.value(), [s](double x) { return x + s; }), {a},
      [](const Var& g, const std::vector<Var>&) { return std::vector<Var>{g}; }, "add_scalar");
}
Var operator+(double s, const Var& a) { return a + s; }
Var operator-(const Var& a, double s) { return a + (-s); }
Var operator-(double s, const Var& a) { return (-a) + s; }

Var exp(const Var& a) {
  return make_op(
      unary_kernel(a.value(), [](double x) { return std::exp(x); }), {a},
      [](const Var& g, const std::vector<Var>& in) { return std::vector<Var>{g * exp(in[0])}; }, "exp");
}

Var log(const Var& a) {
  return make_op(
      unary_kernel(a.value(), [](double x) { return std::log(x); }), {a},
      [](const Var& g, const std::vector<Var>& in) { return std::vector<Var>{g / in[0]}; }, "log");
}

Var sqrt(const Var& a) {
  return make_op(
      unary_kernel(a.value(), [](double x) { return std::sqrt(x); }), {a},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{g * (pow(in[0], -0.5) * 0.5)};
      },
      "sqrt");
}

Var pow(const Var& a, double exponent) {
  return make_op(
      exponent == 2.0 ? unary_kernel(a.value(), [](double x) { return x * x; })
                      : unary_kernel(a.value(), [exponent](double x) { return std::pow(x, exponent); }),
      {a},
      [exponent](const Var& g, const std::vector<Var>& in) {
        if (exponent == 1.0) return std::vector<Var>{g};
        if (exponent == 2.0) return std::vector<Var>{g * (in[0] * 2.0)};
        return std::vector<Var>{g * (pow(in[0], exponent - 1.0) * exponent)};
      },
      "pow");
}

Var square(const Var& a) { return pow(a, 2.0); }

Var tanh(const Var& a) {
  return make_op(
      unary_kernel(a.value(), [](double x) { return std::tanh(x); }), {a},
      [](const Var& g, const std::vector<Var>& in) {
        const Var y = tanh(in[0]);
        return std::vector<Var>{g * (1.0 - square(y))};
      },
      "tanh");
}

namespace {
double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var sigmoid(const Var& a) {
  return make_op(
      unary_kernel(a.value(), stable_sigmoid), {a},
      [](const Var& g, const std::vector<Var>& in) {
        const Var s = sigmoid(in[0]);
        return std::vector<Var>{g * (s * (1.0 - s))};
      },
      "sigmoid");
}

Var softplus(const Var& a) {
  return make_op(
      unary_kernel(a.value(),
                   [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }),
      {a}, [](const Var& g, const std::vector<Var>& in) { return std::vector<Var>{g * sigmoid(in[0])}; },
      "softplus");
}

Var abs(const Var& a) {
  return make_op(
      unary_kernel(a.value(), [](double x) { return std::abs(x); }), {a},
      [](const Var& g, const std::vector<Var>& in) {
        Var sign = constant(unary_kernel(in[0].value(), [](double x) {
          return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
        }));
        return std::vector<Var>{g * sign};
      },
      "abs");
}

Var leaky_relu(const Var& a, double slope) {
  return make_op(
      unary_kernel(a.value(), [slope](double x) { return x > 0 ? x : slope * x; }), {a},
      [slope](const Var& g, const std::vector<Var>& in) {
        Var mask =
            constant(unary_kernel(in[0].value(), [slope](double x) { return x > 0 ? 1.0 : slope; }));
        return std::vector<Var>{g * mask};
      },
      "leaky_relu");
}

Var silu(const Var& a) { return a * sigmoid(a); }

// ---------------------------------------------------------------------------
// Shape and reduction.

Var reshape(const Var& a, Shape shape) {
  return make_op(
      a.value().reshaped(shape), {a},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{reshape(g, in[0].shape())};
      },
      "reshape");
}

Var broadcast_to(const Var& a, const Shape& shape) {
  if (a.shape() == shape) return a;
  return make_op(
      broadcast_to_kernel(a.value(), shape), {a},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{sum_to(g, in[0].shape())};
      },
      "broadcast_to");
}

Var sum_to(const Var& a, const Shape& shape) {
  if (a.shape() == shape) return a;
  return make_op(
      sum_to_kernel(a.value(), shape), {a},
      [](const Var& g, const std::vector<Var>& in) {
        return std::vector<Var>{broadcast_to(g, in[0].shape())};
      },
      "sum_to");
}

Var sum(const Var& a, std::vector<std::size_t> axes, bool keepdims) {
  Shape kept = a.shape();
  for (std::size_t ax : axes) {
    if (ax >= kept.size()) throw IndexError("sum: axis out of range for " + shape_str(a.shape()));
    kept[ax] = 1;
  }
  Var s = sum_to(a, kept);
  if (keepdims) return s;
  Shape squeezed;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (std::find(axes.begin(), axes.end(), i) == axes.end()) squeezed.push_back(kept[i]);
  }
  return reshape(s, squeezed);
}

Var mean(const Var& a, std::vector<std::size_t> axes, bool keepdims) {
  std::size_t count = 1;
  for (std::size_t ax : axes) count *= a.shape().at(ax);
  return sum(a, std::move(axes), keepdims) * (1.0 / static_cast<double>(count));
}

Var sum_all(const Var& a) { return sum_to(a, Shape{}); }

Var mean_all(const Var& a) { return sum_all(a) * (1.0 / static_cast<double>(a.size())); }

// ---------------------------------------------------------------------------
// Linear algebra.

Var matmul(const Var& a, const Var& b) {
  return make_op(
      matmul_kernel(a.value(), b.value()), {a, b},
      [](const Var& g, const std::vector<Var>& in) {
        Var ga, gb;
        if (in[0].requires_grad()) ga = matmul(g, transpose(in[1]));
        if (in[1].requires_grad()) gb = matmul(transpose(in[0]), g);
        return std::vector<Var>{ga, gb};
      },
      "matmul");
}

Var transpose(const Var& a) {
  return make_op(
      transpose_kernel(a.value()), {a},
      [](const Var& g, const std::vector<Var>&) { return std::vector<Var>{transpose(g)}; },
      "transpose");
}

// ---------------------------------------------------------------------------
// Last-axis concatenation.

Var concat_last(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_last: no inputs");
  const Shape& first = parts[0].shape();
  if (first.empty()) throw ShapeError("concat_last: scalar input");
  const std::size_t r = first.size();
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != r || !std::equal(s.begin(), s.end() - 1, first.begin())) {
      throw ShapeError("concat_last: incompatible shapes " + shape_str(first) + " and " + shape_str(s));
    }
    total += s[r - 1];
  }
  Shape out_shape = first;
  out_shape[r - 1] = total;
  Tensor out(out_shape);
  const std::size_t rows = out.size() / total;
  std::size_t offset = 0;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    const std::size_t c = p.shape()[r - 1];
    const double* src = p.value().data().data();
    double* dst = out.data().data();
    for (std::size_t i = 0; i < rows; ++i) std::memcpy(dst + i * total + offset, src + i * c, c * sizeof(double));
    offsets.push_back(offset);
    offset += c;
  }
  return make_op(
      std::move(out), parts,
      [offsets](const Var& g, const std::vector<Var>& in) {
        std::vector<Var> grads;
        for (std::size_t i = 0; i < in.size(); ++i) {
          grads.push_back(in[i].requires_grad() ? slice_last(g, offsets[i], in[i].shape().back()) : Var());
        }
        return grads;
      },
      "concat_last");
}

Var slice_last(const Var& a, std::size_t offset, std::size_t length) {
  const Shape& s = a.shape();
  if (s.empty() || offset + length > s.back() || length == 0) {
    throw ShapeError("slice_last out of range on " + shape_str(s));
  }
  const std::size_t c = s.back();
  Shape out_shape = s;
  out_shape.back() = length;
  Tensor out(out_shape);
  const std::size_t rows = out.size() / length;
  const double* src = a.value().data().data();
  double* dst = out.data().data();
  for (std::size_t i = 0; i < rows; ++i) std::memcpy(dst + i * length, src + i * c + offset, length * sizeof(double));
  return make_op(
      std::move(out), {a},
      [offset, c](const Var& g, const std::vector<Var>&) { return std::vector<Var>{pad_last(g, offset, c)}; },
      "slice_last");
}

Var pad_last(const Var& a, std::size_t offset, std::size_t total) {
  const Shape& s = a.shape();
  if (s.empty() || offset + s.back() > total) throw ShapeError("pad_last out of range on " + shape_str(s));
  const std::size_t c = s.back();
  Shape out_shape = s;
  out_shape.back() = total;
  Tensor out(out_shape);
  const std::size_t rows = out.size() / total;
  const double* src = a.value().data().data();
  double* dst = out.data().data();
  for (std::size_t i = 0; i < rows; ++i) std::memcpy(dst + i * total + offset, src + i * c, c * sizeof(double));
  return make_op(
      std::move(out), {a},
      [offset, c](const Var& g, const std::vector<Var>&) { return std::vector<Var>{slice_last(g, offset, c)}; },
      "pad_last");
}

// ---------------------------------------------------------------------------
// Image primitives.

Var im2col(const Var& x, ConvGeometry g) {
  return make_op(
      im2col_kernel(x.value(), g), {x},
      [g](const Var& grad_out, const std::vector<Var>& in) {
        return std::vector<Var>{col2im(grad_out, in[0].shape(), g)};
      },
      "im2col");
}

Var col2im(const Var& cols, const Shape& image_shape, ConvGeometry g) {
  return make_op(
      col2im_kernel(cols.value(), image_shape, g), {cols},
      [g](const Var& grad_out, const std::vector<Var>&) { return std::vector<Var>{im2col(grad_out, g)}; },
      "col2im");
}

Var upsample2x(const Var& x) {
  return make_op(
      upsample_kernel(x.value()), {x},
      [](const Var& g, const std::vector<Var>&) { return std::vector<Var>{sumpool2x(g)}; }, "upsample2x");
}

Var sumpool2x(const Var& x) {
  return make_op(
      sumpool_kernel(x.value()), {x},
      [](const Var& g, const std::vector<Var>&) { return std::vector<Var>{upsample2x(g)}; }, "sumpool2x");
}

}  // namespace lddgan
