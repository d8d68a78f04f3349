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

#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "nalign/autodiff.hpp"
#include "nalign/gradcheck.hpp"
#include "nalign/random.hpp"

namespace {

using namespace nalign;
using ad::Parameter;
using ad::Tape;
using ad::Tensor;

// Central difference of a scalar function of one parameter, computed here
// independently of check_gradients.
std::vector<double> numeric_grad(const std::function<double(const Parameter&)>& f, Parameter p, double h = 1e-6) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p.value[i];
    p.value[i] = v + h;
    const double up = f(p);
    p.value[i] = v - h;
    const double dn = f(p);
    p.value[i] = v;
    g[i] = (up - dn) / (2 * h);
  }
  return g;
}

TEST(Autodiff, SquareValueAndGradient) {
  Parameter x("x", {1, 1}, {3.0});
  Tape tape;
  const Tensor y = ad::square(tape.param(x));
  EXPECT_EQ(y.item(), 9.0);
  tape.backward(sum(y));
  EXPECT_DOUBLE_EQ(tape.grad(x)[0], 6.0);
}

TEST(Autodiff, LogsumexpOfZeros) {
  Parameter x("x", {1, 2}, {0.0, 0.0});
  Tape tape;
  const Tensor y = ad::logsumexp(tape.param(x), 1);
  EXPECT_NEAR(y.item(), std::log(2.0), 1e-15);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(tape.grad(x)[0], 0.5);
  EXPECT_DOUBLE_EQ(tape.grad(x)[1], 0.5);
}

TEST(Autodiff, LogsumexpIsStableForLargeInputs) {
  Tape tape;
  const Tensor y = ad::logsumexp(tape.variable({1, 2}, {1000.0, 1000.0}), 1);
  EXPECT_NEAR(y.item(), 1000.0 + std::log(2.0), 1e-12);
}

TEST(Autodiff, MatmulIdentity) {
  Parameter v("v", {2, 1}, {1.5, -2.0});
  Tape tape;
  const Tensor eye = Tensor::constant({2, 2}, {1, 0, 0, 1});
  const Tensor y = ad::matmul(eye, tape.param(v));
  EXPECT_EQ(y.values(), v.value);
  tape.backward(sum(y));
  EXPECT_EQ(tape.grad(v), (std::vector<double>{1.0, 1.0}));
}

TEST(Autodiff, BackwardSumOfSquares) {
  Parameter x("x", {1, 2}, {1.0, 2.0});
  Tape tape;
  const Tensor t = tape.param(x);
  tape.backward(sum(t * t));
  EXPECT_EQ(tape.grad(x), (std::vector<double>{2.0, 4.0}));
}

TEST(Autodiff, LogOfExpHasUnitGradient) {
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    Parameter x("x", {1, 1}, {rng.uniform(-5, 5)});
    Tape tape;
    tape.backward(sum(ad::log(ad::exp(tape.param(x)))));
    EXPECT_NEAR(tape.grad(x)[0], 1.0, 1e-12);
  }
}

TEST(Autodiff, RootGradientIsOne) {
  Tape tape;
  const Tensor x = tape.variable({1, 1}, {2.0});
  const Tensor y = sum(ad::square(x));
  tape.backward(y);
  EXPECT_EQ(tape.grad(y)[0], 1.0);
}

TEST(Autodiff, NonScalarRootThrows) {
  Tape tape;
  const Tensor x = tape.variable({1, 2}, {1.0, 2.0});
  EXPECT_THROW(tape.backward(x), std::exception);
}

TEST(Autodiff, ShapeMismatchNamesShapes) {
  Tape tape;
  const Tensor a = tape.variable({2, 3}, std::vector<double>(6, 1.0));
  const Tensor b = tape.variable({3, 2}, std::vector<double>(6, 1.0));
  try {
    (void)ad::add(a, b);
    FAIL() << "no throw";
  } catch (const ad::ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("add"), std::string::npos) << what;
    EXPECT_NE(what.find(ad::to_string(a.shape())), std::string::npos) << what;
    EXPECT_NE(what.find(ad::to_string(b.shape())), std::string::npos) << what;
  }
  EXPECT_THROW((void)ad::matmul(a, a), ad::ShapeError);
}

TEST(Autodiff, TopologicalOrder) {
  Tape tape;
  const Tensor x = tape.variable({1, 3}, {1, 2, 3});
  const Tensor y = sum(ad::tanh(x) * ad::exp(x) + ad::square(x));
  (void)y;
  for (std::size_t n = 0; n < tape.size(); ++n)
    for (std::size_t in : tape.inputs_of(n)) EXPECT_LT(in, n);
}

TEST(Autodiff, MultipleUsesAccumulate) {
  Parameter x("x", {1, 3}, {0.3, -1.2, 2.0});
  Tape one;
  one.backward(sum(ad::tanh(one.param(x))));
  const std::vector<double> g1 = one.grad(x);
  for (int k = 2; k <= 4; ++k) {
    Tape tape;
    const Tensor t = tape.param(x);
    Tensor acc = ad::tanh(t);
    for (int i = 1; i < k; ++i) acc = acc + ad::tanh(t);
    tape.backward(sum(acc));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(tape.grad(x)[i], k * g1[i], 1e-14);
  }
}

TEST(Autodiff, BackwardIsDeterministic) {
  Rng rng(3);
  Parameter w("w", {3, 2}, rng.normals(6));
  auto run = [&] {
    Tape tape;
    const Tensor x = Tensor::constant({4, 3}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 2, 3});
    tape.backward(sum(ad::softplus(ad::matmul(x, tape.param(w)))));
    return tape.grad(w);
  };
  EXPECT_EQ(run(), run());
}

// Every primitive against central differences on random inputs in [-3, 3].
struct UnaryCase {
  const char* name;
  std::function<Tensor(const Tensor&)> f;
  double lo, hi;
};

TEST(Autodiff, PrimitiveGradientsMatchFiniteDifferences) {
  const std::vector<UnaryCase> cases = {
      {"exp", [](const Tensor& a) { return ad::exp(a); }, -3, 3},
      {"log", [](const Tensor& a) { return ad::log(a); }, 0.2, 3},
      {"tanh", [](const Tensor& a) { return ad::tanh(a); }, -3, 3},
      {"relu", [](const Tensor& a) { return ad::relu(a); }, -3, 3},
      {"softplus", [](const Tensor& a) { return ad::softplus(a); }, -3, 3},
      {"square", [](const Tensor& a) { return ad::square(a); }, -3, 3},
      {"sqrt", [](const Tensor& a) { return ad::sqrt(a); }, 0.2, 3},
      {"neg", [](const Tensor& a) { return -a; }, -3, 3},
      {"scale", [](const Tensor& a) { return a * 2.5; }, -3, 3},
      {"shift", [](const Tensor& a) { return a + 1.5; }, -3, 3},
      {"sum_axis0", [](const Tensor& a) { return ad::sum(a, 0); }, -3, 3},
      {"mean_axis1", [](const Tensor& a) { return ad::mean(a, 1); }, -3, 3},
      {"logsumexp0", [](const Tensor& a) { return ad::logsumexp(a, 0); }, -3, 3},
      {"logsumexp1", [](const Tensor& a) { return ad::logsumexp(a, 1); }, -3, 3},
      {"mean", [](const Tensor& a) { return ad::mean(a); }, -3, 3},
      {"slice", [](const Tensor& a) { return ad::slice_cols(a, 1, 3); }, -3, 3},
      {"gather", [](const Tensor& a) {
         const std::vector<std::size_t> rows{1, 0, 1};
         return ad::gather_rows(a, rows);
       }, -3, 3},
      {"concat", [](const Tensor& a) { return ad::concat({a, ad::square(a)}, 1); }, -3, 3},
      {"repeat", [](const Tensor& a) { return ad::repeat_rows(ad::gather_rows(a, std::vector<std::size_t>{1}), 3); }, -3, 3},
  };
  Rng rng(11);
  for (const auto& c : cases) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> v(6);
      for (double& e : v) e = rng.uniform(c.lo, c.hi);
      // Relu's kink is measure-zero but a random draw near it ruins the difference.
      if (std::string(c.name) == "relu")
        for (double& e : v)
          if (std::abs(e) < 1e-3) e = 0.5;
      Parameter p("p", {2, 3}, v);
      // Weighted sum so a symmetric output cannot hide a wrong rule.
      auto value = [&](const Parameter& q) {
        Tape t;
        const Tensor out = c.f(t.param(q));
        const std::vector<double> o = out.values();
        double s = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i) s += o[i] * (0.5 + 0.1 * static_cast<double>(i));
        return s;
      };
      Tape tape;
      const Tensor out = c.f(tape.param(p));
      std::vector<double> wv(out.size());
      for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = 0.5 + 0.1 * static_cast<double>(i);
      tape.backward(sum(out * Tensor::constant(out.shape(), wv)));
      const std::vector<double> analytic = tape.grad(p);
      const std::vector<double> numeric = numeric_grad(value, p);
      for (std::size_t i = 0; i < 6; ++i)
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i])));
    }
    EXPECT_LT(worst, 1e-6) << c.name;
  }
}

TEST(Autodiff, BinaryGradientsMatchFiniteDifferences) {
  Rng rng(12);
  const std::vector<std::pair<const char*, std::function<Tensor(const Tensor&, const Tensor&)>>> cases = {
      {"add", [](const Tensor& a, const Tensor& b) { return a + b; }},
      {"sub", [](const Tensor& a, const Tensor& b) { return a - b; }},
      {"mul", [](const Tensor& a, const Tensor& b) { return a * b; }},
      {"div", [](const Tensor& a, const Tensor& b) { return a / (ad::square(b) + 1.0); }},
      {"matmul", [](const Tensor& a, const Tensor& b) { return ad::matmul(a, ad::reshape(b, {3, 2})); }},
  };
  for (const auto& [name, f] : cases) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Parameter a("a", {2, 3});
      Parameter b("b", {2, 3});
      for (int i = 0; i < 6; ++i) {
        a.value[i] = rng.uniform(-3, 3);
        b.value[i] = rng.uniform(-3, 3);
      }
      auto objective = [&](Tape& t) { return sum(ad::tanh(f(t.param(a), t.param(b)))); };
      worst = std::max(worst, ad::check_gradients(objective, {&a, &b}, 1e-6).max_rel_error);
    }
    EXPECT_LT(worst, 1e-6) << name;
  }
}

TEST(GradCheck, SquareAtTwo) {
  Parameter x("x", {1, 1}, {2.0});
  const auto r = ad::check_gradients([&](Tape& t) { return sum(ad::square(t.param(x))); }, {&x}, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(GradCheck, DetectsWrongGradient) {
  Parameter x("x", {1, 1}, {2.0});
  // detach hides the dependence from the tape; the finite difference sees it.
  const auto r = ad::check_gradients(
      [&](Tape& t) {
        const Tensor p = t.param(x);
        return sum(p + ad::square(ad::detach(p)));
      },
      {&x});
  EXPECT_GT(r.max_rel_error, 0.5);
}

TEST(GradCheck, NonFiniteObjectiveThrows) {
  Parameter x("x", {1, 1}, {0.0});
  EXPECT_THROW(ad::check_gradients([&](Tape& t) { return sum(ad::log(t.param(x))); }, {&x}), std::exception);
}

}  // namespace
