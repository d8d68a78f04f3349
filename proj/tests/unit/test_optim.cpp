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
#include <vector>

#include <gtest/gtest.h>

#include "nalign/optim.hpp"

namespace {

using namespace nalign;

TEST(Adam, ZeroGradientsLeaveParameters) {
  ad::Parameter p("p", {1, 3}, {1.0, -2.0, 3.0});
  optim::Adam adam({&p});
  for (int i = 0; i < 10; ++i) adam.step({{0.0, 0.0, 0.0}});
  EXPECT_EQ(p.value, (std::vector<double>{1.0, -2.0, 3.0}));
}

TEST(Adam, ConstantGradientStepsAtLearningRate) {
  ad::Parameter p("p", {1, 2}, {0.0, 0.0});
  optim::Adam adam({&p}, {0.01});
  std::vector<double> prev = p.value;
  for (int i = 0; i < 2000; ++i) {
    prev = p.value;
    adam.step({{3.0, -0.2}});
  }
  EXPECT_NEAR(p.value[0] - prev[0], -0.01, 1e-8);
  EXPECT_NEAR(p.value[1] - prev[1], 0.01, 1e-7);
  EXPECT_EQ(adam.steps(), 2000u);
}

TEST(Adam, FirstStepIsBiasCorrected) {
  ad::Parameter p("p", {1, 1}, {1.0});
  optim::Adam adam({&p}, {0.1});
  adam.step({{5.0}});
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.value[0], 1.0 - 0.1 * 5.0 / (5.0 + 1e-8), 1e-15);
}

TEST(Adam, QuadraticBowlConverges) {
  ad::Parameter p("p", {1, 2}, {3.0, -4.0});
  const double target[2] = {0.5, 1.5};
  optim::Adam adam({&p}, {1e-2});
  int steps = 0;
  for (; steps < 5000; ++steps) {
    ad::Tape tape;
    const ad::Tensor x = tape.param(p);
    tape.backward(ad::sum(ad::square(x - ad::Tensor::constant({1, 2}, {target[0], target[1]}))));
    adam.step(tape);
    if (std::abs(p.value[0] - target[0]) < 1e-6 && std::abs(p.value[1] - target[1]) < 1e-6) break;
  }
  EXPECT_LT(steps, 5000);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  ad::Parameter a("alpha", {1, 1}, {1.0}), b("beta", {1, 1}, {1.0});
  optim::Adam adam({&a, &b});
  try {
    adam.step({{0.1}, {NAN}});
    FAIL();
  } catch (const optim::NonFiniteGradient& e) {
    EXPECT_EQ(e.parameter(), "beta");
  }
  EXPECT_EQ(a.value[0], 1.0);
  EXPECT_THROW(adam.step({{0.1}}), std::invalid_argument);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    ad::Parameter p("p", {1, 2}, {0.3, 0.7});
    optim::Adam adam({&p});
    for (int i = 0; i < 50; ++i) adam.step({{std::sin(double(i)), std::cos(double(i))}});
    return p.value;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
