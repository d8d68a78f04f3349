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

#include "nalign/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace nalign::ad {

namespace {

using Data = std::shared_ptr<const std::vector<double>>;

Data share(std::vector<double> v) { return std::make_shared<const std::vector<double>>(std::move(v)); }

[[noreturn]] void shape_fail(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

[[noreturn]] void shape_fail(const std::string& op, const Shape& a) {
  throw ShapeError(op + ": unsupported shape " + to_string(a));
}

Tape* common_tape(const std::string& op, const Tensor& a, const Tensor& b) {
  Tape* ta = a.tracked() ? a.tape() : nullptr;
  Tape* tb = b.tracked() ? b.tape() : nullptr;
  if (ta && tb && ta != tb) throw std::logic_error(op + ": operands live on different tapes");
  return ta ? ta : tb;
}

Tape* common_tape(const std::string& op, const std::vector<Tensor>& ts) {
  Tape* tape = nullptr;
  for (const auto& t : ts) {
    if (!t.tracked()) continue;
    if (tape && tape != t.tape()) throw std::logic_error(op + ": operands live on different tapes");
    tape = t.tape();
  }
  return tape;
}

void require_rank2(const std::string& op, const Tensor& a) {
  if (a.rank() != 2) shape_fail(op, a.shape());
}

// Result of an op whose value is `out`. Constants stay off the tape.
Tensor finish(Tape* tape, Shape shape, std::vector<double> out, std::vector<std::size_t> inputs,
              Tape::BackwardFn backward) {
  if (tape == nullptr) return Tensor::constant(std::move(shape), std::move(out));
  return tape->record(std::move(shape), std::move(out), std::move(inputs), std::move(backward));
}

std::vector<std::size_t> tracked_nodes(std::initializer_list<const Tensor*> ts) {
  std::vector<std::size_t> ids;
  for (const Tensor* t : ts)
    if (t->tracked()) ids.push_back(*t->node());
  return ids;
}

template <class F, class D>
Tensor unary(const Tensor& a, F f, D dfdx) {
  const auto in = a.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  if (!a.tracked()) return Tensor::constant(a.shape(), std::move(out));
  auto x = share(std::vector<double>(in.begin(), in.end()));
  auto y = share(out);
  const std::size_t id = *a.node();
  return a.tape()->record(a.shape(), std::move(out), {id},
                          [x, y, id, dfdx](std::span<const double> up, Tape& tape) {
                            std::vector<double> g(up.size());
                            for (std::size_t i = 0; i < up.size(); ++i) g[i] = up[i] * dfdx((*x)[i], (*y)[i]);
                            tape.accumulate(id, g);
                          });
}

enum class Bcast { kNone, kLeftScalar, kRightScalar };

Bcast broadcast_kind(const std::string& op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Bcast::kNone;
  if (b.size() == 1) return Bcast::kRightScalar;
  if (a.size() == 1) return Bcast::kLeftScalar;
  shape_fail(op, a.shape(), b.shape());
}

// Elementwise binary op with scalar broadcast. `da`/`db` give the local
// partials at (x, y).
template <class F, class DA, class DB>
Tensor binary(const std::string& op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
  const Bcast kind = broadcast_kind(op, a, b);
  const Shape shape = kind == Bcast::kLeftScalar ? b.shape() : a.shape();
  const std::size_t n = element_count(shape);
  const auto av = a.data();
  const auto bv = b.data();
  auto at_a = [&](std::size_t i) { return kind == Bcast::kLeftScalar ? av[0] : av[i]; };
  auto at_b = [&](std::size_t i) { return kind == Bcast::kRightScalar ? bv[0] : bv[i]; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(at_a(i), at_b(i));

  Tape* tape = common_tape(op, a, b);
  if (tape == nullptr) return Tensor::constant(shape, std::move(out));

  auto x = share(std::vector<double>(av.begin(), av.end()));
  auto y = share(std::vector<double>(bv.begin(), bv.end()));
  const std::optional<std::size_t> ia = a.node();
  const std::optional<std::size_t> ib = b.node();
  return tape->record(
      shape, std::move(out), tracked_nodes({&a, &b}),
      [x, y, ia, ib, kind, n, da, db](std::span<const double> up, Tape& t) {
        auto xa = [&](std::size_t i) { return kind == Bcast::kLeftScalar ? (*x)[0] : (*x)[i]; };
        auto yb = [&](std::size_t i) { return kind == Bcast::kRightScalar ? (*y)[0] : (*y)[i]; };
        if (ia) {
          if (kind == Bcast::kLeftScalar) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += up[i] * da(xa(i), yb(i));
            t.accumulate(*ia, std::span<const double>(&s, 1));
          } else {
            std::vector<double> g(n);
            for (std::size_t i = 0; i < n; ++i) g[i] = up[i] * da(xa(i), yb(i));
            t.accumulate(*ia, g);
          }
        }
        if (ib) {
          if (kind == Bcast::kRightScalar) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += up[i] * db(xa(i), yb(i));
            t.accumulate(*ib, std::span<const double>(&s, 1));
          } else {
            std::vector<double> g(n);
            for (std::size_t i = 0; i < n; ++i) g[i] = up[i] * db(xa(i), yb(i));
            t.accumulate(*ib, g);
          }
        }
      });
}

int check_axis(const std::string& op, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError(op + ": axis must be 0 or 1, got " + std::to_string(axis));
  return axis;
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Parameter::Parameter(std::string n, Shape s)
    : name(std::move(n)), shape(std::move(s)), value(element_count(shape), 0.0) {}

Parameter::Parameter(std::string n, Shape s, std::vector<double> v)
    : name(std::move(n)), shape(std::move(s)), value(std::move(v)) {
  if (value.size() != element_count(shape))
    throw ShapeError("parameter " + name + ": " + std::to_string(value.size()) +
                     " values for shape " + to_string(shape));
}

// --- Tensor -----------------------------------------------------------------

Tensor Tensor::constant(Shape shape, std::vector<double> data) {
  if (data.size() != element_count(shape))
    throw ShapeError("constant: " + std::to_string(data.size()) + " values for shape " + to_string(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = share(std::move(data));
  return t;
}

Tensor Tensor::scalar(double v) { return constant({}, {v}); }
Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double v) {
  const std::size_t n = element_count(shape);
  return constant(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::row(std::vector<double> data) {
  const std::size_t n = data.size();
  return constant({1, n}, std::move(data));
}

Tensor Tensor::column(std::vector<double> data) {
  const std::size_t n = data.size();
  return constant({n, 1}, std::move(data));
}

std::span<const double> Tensor::data() const {
  if (!data_) return {};
  return {data_->data(), data_->size()};
}

std::size_t Tensor::size() const { return data_ ? data_->size() : 0; }

std::size_t Tensor::rows() const { return shape_.size() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  return size();
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + to_string(shape_) + " is not a scalar");
  return (*data_)[0];
}

double Tensor::operator()(std::size_t i, std::size_t j) const { return (*data_)[i * cols() + j]; }

std::vector<double> Tensor::values() const { return data_ ? *data_ : std::vector<double>{}; }

// --- Tape -------------------------------------------------------------------

Tensor Tape::record(Shape shape, std::vector<double> data, std::vector<std::size_t> inputs,
                    BackwardFn backward) {
  Tensor t = Tensor::constant(std::move(shape), std::move(data));
  for (std::size_t in : inputs)
    if (in >= nodes_.size()) throw std::logic_error("tape: input node does not precede its consumer");
  nodes_.push_back(Node{t.size(), std::move(inputs), std::move(backward)});
  t.node_ = nodes_.size() - 1;
  t.tape_ = this;
  return t;
}

Tensor Tape::variable(Shape shape, std::vector<double> data) {
  return record(std::move(shape), std::move(data), {}, nullptr);
}

Tensor Tape::param(const Parameter& p) {
  if (auto it = params_.find(&p); it != params_.end()) return it->second;
  Tensor t = variable(p.shape, p.value);
  params_.emplace(&p, t);
  return t;
}

bool Tape::has_param(const Parameter& p) const { return params_.count(&p) != 0; }

void Tape::accumulate(std::size_t node, std::span<const double> g) {
  auto& acc = grads_[node];
  if (acc.empty()) {
    acc.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
}

void Tape::backward(const Tensor& root) {
  if (!root.tracked() || root.tape() != this) throw std::logic_error("backward: root is not on this tape");
  if (root.size() != 1) throw ShapeError("backward: root must be scalar, got shape " + to_string(root.shape()));
  grads_.assign(nodes_.size(), {});
  const std::size_t r = *root.node();
  grads_[r] = {1.0};
  for (std::size_t i = r + 1; i-- > 0;) {
    if (grads_[i].empty() || !nodes_[i].backward) continue;
    // Copy: the callback may append to grads_[j] for j < i only, but keep the
    // upstream buffer independent of accumulator storage.
    const std::vector<double> up = grads_[i];
    nodes_[i].backward(up, *this);
  }
}

std::vector<double> Tape::grad(const Tensor& t) const {
  if (!t.tracked() || t.tape() != this) return std::vector<double>(t.size(), 0.0);
  const std::size_t id = *t.node();
  if (id >= grads_.size() || grads_[id].empty()) return std::vector<double>(t.size(), 0.0);
  return grads_[id];
}

std::vector<double> Tape::grad(const Parameter& p) const {
  auto it = params_.find(&p);
  if (it == params_.end()) return std::vector<double>(p.size(), 0.0);
  return grad(it->second);
}

// --- elementwise ------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
Tensor operator-(const Tensor& a) { return neg(a); }
Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
Tensor operator+(const Tensor& a, double s) { return shift(a, s); }
Tensor operator-(const Tensor& a, double s) { return shift(a, -s); }

Tensor neg(const Tensor& a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor shift(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor softplus(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x, double) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sqrt(const Tensor& a) {
  return unary(a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

// --- linear algebra and reductions -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) shape_fail("matmul", a.shape(), b.shape());
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  const auto A = a.data();
  const auto B = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = &B[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  Tape* tape = common_tape("matmul", a, b);
  if (tape == nullptr) return Tensor::constant({m, n}, std::move(out));
  auto x = share(std::vector<double>(A.begin(), A.end()));
  auto y = share(std::vector<double>(B.begin(), B.end()));
  const auto ia = a.node();
  const auto ib = b.node();
  return tape->record({m, n}, std::move(out), tracked_nodes({&a, &b}),
                      [x, y, ia, ib, m, k, n](std::span<const double> up, Tape& t) {
                        if (ia) {
                          // dA = up . B^T
                          std::vector<double> g(m * k, 0.0);
                          for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t p = 0; p < k; ++p) {
                              double s = 0.0;
                              for (std::size_t j = 0; j < n; ++j) s += up[i * n + j] * (*y)[p * n + j];
                              g[i * k + p] = s;
                            }
                          t.accumulate(*ia, g);
                        }
                        if (ib) {
                          // dB = A^T . up
                          std::vector<double> g(k * n, 0.0);
                          for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t p = 0; p < k; ++p) {
                              const double aip = (*x)[i * k + p];
                              for (std::size_t j = 0; j < n; ++j) g[p * n + j] += aip * up[i * n + j];
                            }
                          t.accumulate(*ib, g);
                        }
                      });
}

Tensor sum(const Tensor& a) {
  const auto v = a.data();
  double s = 0.0;
  for (double x : v) s += x;
  const std::size_t n = v.size();
  std::optional<std::size_t> id = a.node();
  return finish(a.tracked() ? a.tape() : nullptr, {}, {s}, tracked_nodes({&a}),
                [id, n](std::span<const double> up, Tape& t) { t.accumulate(*id, std::vector<double>(n, up[0])); });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum(const Tensor& a, int axis) {
  require_rank2("sum", a);
  check_axis("sum", axis);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const auto v = a.data();
  Shape shape = axis == 0 ? Shape{1, n} : Shape{m, 1};
  std::vector<double> out(axis == 0 ? n : m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : i] += v[i * n + j];
  const auto id = a.node();
  return finish(a.tracked() ? a.tape() : nullptr, shape, std::move(out), tracked_nodes({&a}),
                [id, m, n, axis](std::span<const double> up, Tape& t) {
                  std::vector<double> g(m * n);
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) g[i * n + j] = up[axis == 0 ? j : i];
                  t.accumulate(*id, g);
                });
}

Tensor mean(const Tensor& a, int axis) {
  require_rank2("mean", a);
  const std::size_t count = a.shape()[check_axis("mean", axis)];
  if (count == 0) throw ShapeError("mean: empty reduction axis");
  return scale(sum(a, axis), 1.0 / static_cast<double>(count));
}

Tensor logsumexp(const Tensor& a, int axis) {
  require_rank2("logsumexp", a);
  check_axis("logsumexp", axis);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const std::size_t outer = axis == 0 ? n : m;
  const std::size_t inner = axis == 0 ? m : n;
  if (inner == 0) throw ShapeError("logsumexp: empty reduction axis");
  const auto v = a.data();
  auto at = [&](std::size_t o, std::size_t r) { return axis == 0 ? v[r * n + o] : v[o * n + r]; };
  std::vector<double> out(outer);
  // softmax weights, saved for backward
  std::vector<double> w(m * n);
  for (std::size_t o = 0; o < outer; ++o) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < inner; ++r) mx = std::max(mx, at(o, r));
    if (std::isinf(mx) && mx < 0) {
      out[o] = mx;
      for (std::size_t r = 0; r < inner; ++r) (axis == 0 ? w[r * n + o] : w[o * n + r]) = 1.0 / inner;
      continue;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < inner; ++r) s += std::exp(at(o, r) - mx);
    out[o] = mx + std::log(s);
    for (std::size_t r = 0; r < inner; ++r)
      (axis == 0 ? w[r * n + o] : w[o * n + r]) = std::exp(at(o, r) - out[o]);
  }
  Shape shape = axis == 0 ? Shape{1, n} : Shape{m, 1};
  if (!a.tracked()) return Tensor::constant(shape, std::move(out));
  auto weights = share(std::move(w));
  const std::size_t id = *a.node();
  return a.tape()->record(shape, std::move(out), {id}, [weights, id, m, n, axis](std::span<const double> up, Tape& t) {
    std::vector<double> g(m * n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] = up[axis == 0 ? j : i] * (*weights)[i * n + j];
    t.accumulate(id, g);
  });
}

// --- structural -------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  check_axis("concat", axis);
  if (parts.empty()) throw ShapeError("concat: no operands");
  for (const auto& p : parts) require_rank2("concat", p);
  const std::size_t fixed = parts[0].shape()[axis == 0 ? 1 : 0];
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.shape()[axis == 0 ? 1 : 0] != fixed) shape_fail("concat", parts[0].shape(), p.shape());
    total += p.shape()[axis];
  }
  const std::size_t m = axis == 0 ? total : fixed;
  const std::size_t n = axis == 0 ? fixed : total;
  std::vector<double> out(m * n);
  std::size_t offset = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const auto v = p.data();
    const std::size_t pm = p.shape()[0], pn = p.shape()[1];
    for (std::size_t i = 0; i < pm; ++i)
      for (std::size_t j = 0; j < pn; ++j) {
        if (axis == 0)
          out[(offset + i) * n + j] = v[i * pn + j];
        else
          out[i * n + offset + j] = v[i * pn + j];
      }
    offset += p.shape()[axis];
  }
  Tape* tape = common_tape("concat", parts);
  if (tape == nullptr) return Tensor::constant({m, n}, std::move(out));
  std::vector<std::size_t> inputs;
  struct Piece {
    std::optional<std::size_t> id;
    std::size_t offset, rows, cols;
  };
  std::vector<Piece> pieces;
  for (std::size_t q = 0; q < parts.size(); ++q) {
    if (parts[q].tracked()) inputs.push_back(*parts[q].node());
    pieces.push_back({parts[q].node(), offsets[q], parts[q].shape()[0], parts[q].shape()[1]});
  }
  return tape->record({m, n}, std::move(out), std::move(inputs), [pieces, n, axis](std::span<const double> up, Tape& t) {
    for (const auto& pc : pieces) {
      if (!pc.id) continue;
      std::vector<double> g(pc.rows * pc.cols);
      for (std::size_t i = 0; i < pc.rows; ++i)
        for (std::size_t j = 0; j < pc.cols; ++j)
          g[i * pc.cols + j] = axis == 0 ? up[(pc.offset + i) * n + j] : up[i * n + pc.offset + j];
      t.accumulate(*pc.id, g);
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2("slice_cols", a);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (begin > end || end > n)
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside shape " + to_string(a.shape()));
  const std::size_t w = end - begin;
  const auto v = a.data();
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = v[i * n + begin + j];
  const auto id = a.node();
  return finish(a.tracked() ? a.tape() : nullptr, {m, w}, std::move(out), tracked_nodes({&a}),
                [id, m, n, w, begin](std::span<const double> up, Tape& t) {
                  std::vector<double> g(m * n, 0.0);
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] = up[i * w + j];
                  t.accumulate(*id, g);
                });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_rank2("gather_rows", a);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const auto v = a.data();
  std::vector<double> out(rows.size() * n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m) throw ShapeError("gather_rows: row " + std::to_string(rows[r]) + " outside " + to_string(a.shape()));
    std::copy_n(&v[rows[r] * n], n, &out[r * n]);
  }
  const auto id = a.node();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return finish(a.tracked() ? a.tape() : nullptr, {rows.size(), n}, std::move(out), tracked_nodes({&a}),
                [id, idx, m, n](std::span<const double> up, Tape& t) {
                  std::vector<double> g(m * n, 0.0);
                  for (std::size_t r = 0; r < idx.size(); ++r)
                    for (std::size_t j = 0; j < n; ++j) g[idx[r] * n + j] += up[r * n + j];
                  t.accumulate(*id, g);
                });
}

Tensor repeat_rows(const Tensor& a, std::size_t count) {
  if (a.rank() != 2 || a.shape()[0] != 1) shape_fail("repeat_rows", a.shape());
  const std::size_t n = a.shape()[1];
  const auto v = a.data();
  std::vector<double> out(count * n);
  for (std::size_t i = 0; i < count; ++i) std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(i * n));
  const auto id = a.node();
  return finish(a.tracked() ? a.tape() : nullptr, {count, n}, std::move(out), tracked_nodes({&a}),
                [id, count, n](std::span<const double> up, Tape& t) {
                  std::vector<double> g(n, 0.0);
                  for (std::size_t i = 0; i < count; ++i)
                    for (std::size_t j = 0; j < n; ++j) g[j] += up[i * n + j];
                  t.accumulate(*id, g);
                });
}

Tensor detach(const Tensor& a) { return Tensor::constant(a.shape(), a.values()); }

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) shape_fail("reshape", a.shape(), shape);
  const auto id = a.node();
  return finish(a.tracked() ? a.tape() : nullptr, std::move(shape), a.values(), tracked_nodes({&a}),
                [id](std::span<const double> up, Tape& t) { t.accumulate(*id, up); });
}

}  // namespace nalign::ad
