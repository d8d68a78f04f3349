// Copyright 2026 The nalign Authors
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

// Define-by-run reverse-mode differentiation over dense row-major arrays.
//
// A Tape records every primitive applied to tracked tensors. Tensors that
// carry no node are constants and are evaluated eagerly without a tape, so
// the same op code serves both differentiable and plain numeric paths.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nalign::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tape;

/// Trainable array owned by a model. Copied onto a tape at forward time.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;

  Parameter() = default;
  Parameter(std::string n, Shape s);
  Parameter(std::string n, Shape s, std::vector<double> v);

  std::size_t size() const { return value.size(); }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> data);
  static Tensor scalar(double v);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  /// Row vector of shape {1, n}.
  static Tensor row(std::vector<double> data);
  /// Column vector of shape {n, 1}.
  static Tensor column(std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::span<const double> data() const;
  std::size_t size() const;
  std::size_t rank() const { return shape_.size(); }
  /// Leading dimension for rank-2 tensors; 1 for vectors and scalars.
  std::size_t rows() const;
  /// Trailing dimension for rank-2 tensors; size for vectors.
  std::size_t cols() const;
  double item() const;
  double operator()(std::size_t i, std::size_t j) const;
  std::vector<double> values() const;

  bool tracked() const { return node_.has_value(); }
  std::optional<std::size_t> node() const { return node_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  std::optional<std::size_t> node_;
  Tape* tape_ = nullptr;
};

class Tape {
 public:
  /// Accumulates `upstream` (gradient of the root w.r.t. this node's
  /// output) into the gradients of the node's inputs.
  using BackwardFn = std::function<void(std::span<const double> upstream, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf node with the given values.
  Tensor variable(Shape shape, std::vector<double> data);
  /// Leaf node bound to a model parameter; repeated calls return the same node.
  Tensor param(const Parameter& p);

  /// Records a primitive result. Used by op implementations.
  Tensor record(Shape shape, std::vector<double> data, std::vector<std::size_t> inputs,
                BackwardFn backward);

  /// Reverse sweep from a scalar root. Gradients from previous sweeps are discarded.
  void backward(const Tensor& root);

  /// Gradient of the last root w.r.t. `t`; zeros if `t` did not influence it.
  std::vector<double> grad(const Tensor& t) const;
  std::vector<double> grad(const Parameter& p) const;
  bool has_param(const Parameter& p) const;

  /// Adds `g` into the gradient accumulator of `node`.
  void accumulate(std::size_t node, std::span<const double> g);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::size_t>& inputs_of(std::size_t node) const { return nodes_[node].inputs; }

 private:
  struct Node {
    std::size_t size = 0;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
  std::unordered_map<const Parameter*, Tensor> params_;
};

// Elementwise binary ops: equal shapes, or either operand holding one element
// (scalar broadcast). Anything else raises ShapeError naming the op and shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);
Tensor operator*(const Tensor& a, double s);
Tensor operator*(double s, const Tensor& a);
Tensor operator+(const Tensor& a, double s);
Tensor operator-(const Tensor& a, double s);

Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double s);
Tensor shift(const Tensor& a, double s);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);
/// Values outside [lo, hi] are pinned and pass zero gradient.
Tensor clamp(const Tensor& a, double lo, double hi);

/// (m x k) . (k x n) -> (m x n).
Tensor matmul(const Tensor& a, const Tensor& b);

/// Sum of all elements, shape {}.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Rank-2 reductions: axis 0 -> {1, cols}, axis 1 -> {rows, 1}.
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a, int axis);
/// Max-shifted log-sum-exp over an axis of a rank-2 tensor (same result shapes as sum).
Tensor logsumexp(const Tensor& a, int axis);

/// Rank-2 concatenation along an axis.
Tensor concat(const std::vector<Tensor>& parts, int axis);
/// Columns [begin, end) of a rank-2 tensor.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
/// Selected rows of a rank-2 tensor; indices may repeat.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
/// Tiles a {1, n} row `count` times into {count, n}.
Tensor repeat_rows(const Tensor& a, std::size_t count);
/// Same values, cut from the tape.
Tensor detach(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

}  // namespace nalign::ad
