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

#include "nalign/quadrature.hpp"

namespace {

using namespace nalign;
using oracle::Mixture1D;
using oracle::Quadrature1D;

const double kLn2 = std::log(2.0);

double jsd(const Mixture1D& a, const Mixture1D& b) {
  return oracle::jsd_quadrature(a, b, Quadrature1D::covering(a, b)).value;
}

std::pair<Mixture1D, Mixture1D> random_pair(Rng& rng) {
  auto one = [&] { return rng.uniform() < 0.5 ? Mixture1D::gaussian(rng.uniform(-4, 4), rng.uniform(0.3, 3))
                                              : Mixture1D::random(1 + rng.index(3), rng); };
  return {one(), one()};
}

TEST(JsdQuadrature, IdenticalGaussiansGiveZero) {
  const Mixture1D a = Mixture1D::gaussian(1.5, 2.0);
  EXPECT_NEAR(jsd(a, a), 0.0, 1e-9);
}

TEST(JsdQuadrature, FarGaussiansSaturateAtLn2) {
  EXPECT_NEAR(jsd(Mixture1D::gaussian(-20, 1), Mixture1D::gaussian(20, 1)), kLn2, 1e-9);
}

TEST(JsdQuadrature, SymmetricOnSymmetricGrid) {
  const Mixture1D a = Mixture1D::gaussian(-1.3, 0.7), b = Mixture1D::gaussian(2.1, 1.9);
  const Quadrature1D q(-30, 30, 20001);
  EXPECT_EQ(oracle::jsd_quadrature(a, b, q).value, oracle::jsd_quadrature(b, a, q).value);
}

TEST(JsdQuadrature, CoverageWarning) {
  const Mixture1D a = Mixture1D::gaussian(0, 1), b = Mixture1D::gaussian(10, 1);
  EXPECT_TRUE(oracle::jsd_quadrature(a, b, Quadrature1D(-3, 3, 2001)).coverage_warning);
  EXPECT_FALSE(oracle::jsd_quadrature(a, b, Quadrature1D::covering(a, b)).coverage_warning);
}

TEST(Quadrature1D, RejectsCoarseOrEmptyGrids) {
  EXPECT_THROW(Quadrature1D(0, 1, 1000), std::invalid_argument);
  EXPECT_THROW(Quadrature1D(1, 1, 2001), std::invalid_argument);
}

TEST(NjsdQuadrature, ZeroNoiseIsPlainJsd) {
  const Mixture1D a = Mixture1D::gaussian(-2, 1), b = Mixture1D::gaussian(3, 0.5);
  const Quadrature1D q = Quadrature1D::covering(a, b);
  EXPECT_EQ(oracle::njsd_quadrature(a, b, 0.0, q).value, oracle::jsd_quadrature(a, b, q).value);
}

TEST(NjsdQuadrature, GaussianConvolutionIdentity) {
  const Mixture1D a = Mixture1D::gaussian(-20, 1), b = Mixture1D::gaussian(20, 1);
  const Mixture1D sa = Mixture1D::gaussian(-20, 101), sb = Mixture1D::gaussian(20, 101);
  const double n = oracle::njsd_quadrature(a, b, 100.0).value;
  EXPECT_NEAR(n, jsd(sa, sb), 1e-12);
  // Smoothing pulls the saturated pair off ln 2.
  EXPECT_LT(n, oracle::jsd_quadrature(a, b, Quadrature1D::covering(a, b)).value - 0.05);
}

TEST(NjsdQuadrature, NegativeNoiseThrows) {
  const Mixture1D a = Mixture1D::gaussian(0, 1);
  EXPECT_THROW(oracle::njsd_quadrature(a, a, -1.0), std::invalid_argument);
}

TEST(NjsdQuadrature, DivergencePropertiesOnRandomPairs) {
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto [a, b] = random_pair(rng);
    const double plain = jsd(a, b);
    for (double s2 : {0.5, 4.0, 100.0}) {
      const double n = oracle::njsd_quadrature(a, b, s2).value;
      EXPECT_GE(n, 0.0);
      EXPECT_LE(n, plain + 1e-9);
    }
    EXPECT_NEAR(oracle::njsd_quadrature(a, a, 4.0).value, 0.0, 1e-9);
  }
}

TEST(Nsj, SingleLevelIsNjsd) {
  const Mixture1D a = Mixture1D::gaussian(0, 1), b = Mixture1D::gaussian(3, 2);
  EXPECT_EQ(oracle::nsj(a, b, {{9.0, 1.0}}).value, oracle::njsd_quadrature(a, b, 9.0).value);
}

TEST(Nsj, WeightedAverage) {
  const Mixture1D a = Mixture1D::gaussian(0, 1), b = Mixture1D::gaussian(3, 2);
  const double v = oracle::nsj(a, b, {{1.0, 0.25}, {16.0, 0.75}}).value;
  EXPECT_NEAR(v, 0.25 * oracle::njsd_quadrature(a, b, 1.0).value + 0.75 * oracle::njsd_quadrature(a, b, 16.0).value,
              1e-15);
}

TEST(Nsj, ZeroExactlyForIdenticalDensities) {
  Rng rng(22);
  for (int i = 0; i < 20; ++i) {
    const auto [a, b] = random_pair(rng);
    EXPECT_EQ(oracle::nsj(a, a, {{1.0, 0.5}, {4.0, 0.5}}).value, 0.0);
    EXPECT_GT(oracle::nsj(a, b, {{1.0, 0.5}, {4.0, 0.5}}).value, 0.0);
  }
}

TEST(Nsj, RejectsBadLevelLists) {
  const Mixture1D a = Mixture1D::gaussian(0, 1);
  EXPECT_THROW(oracle::nsj(a, a, {}), std::invalid_argument);
  EXPECT_THROW(oracle::nsj(a, a, {{1.0, 0.7}}), std::invalid_argument);
  EXPECT_THROW(oracle::nsj(a, a, {{1.0, -0.5}, {2.0, 1.5}}), std::invalid_argument);
}

TEST(EntropyQuadrature, GaussianClosedForm) {
  for (double var : {0.25, 1.0, 50.0})
    EXPECT_NEAR(oracle::entropy_quadrature(Mixture1D::gaussian(3, var)),
                0.5 * std::log(2 * M_PI * M_E * var), 1e-9);
}

TEST(Landscape, OffsetZeroIsExactlyZero) {
  for (auto f : {oracle::LandscapeFamily::kTwoGaussian, oracle::LandscapeFamily::kShiftedGmm})
    for (double s2 : {0.0, 1.0, 64.0, 100.0}) EXPECT_EQ(oracle::landscape_value(f, 0.0, s2), 0.0);
}

TEST(Landscape, TwoGaussianPlateau) {
  const auto f = oracle::LandscapeFamily::kTwoGaussian;
  EXPECT_LT(std::abs(oracle::landscape_slope(f, 40.0, 0.0)), 1e-8);
  EXPECT_GT(std::abs(oracle::landscape_slope(f, 40.0, 100.0)), 1e-4);
  EXPECT_NEAR(oracle::landscape_value(f, 40.0, 0.0), kLn2, 1e-9);
}

TEST(Landscape, FamilyNames) {
  EXPECT_EQ(oracle::parse_family("two-gaussian"), oracle::LandscapeFamily::kTwoGaussian);
  EXPECT_EQ(oracle::parse_family("shifted-gmm"), oracle::LandscapeFamily::kShiftedGmm);
  EXPECT_EQ(oracle::family_name(oracle::LandscapeFamily::kShiftedGmm), "shifted-gmm");
  EXPECT_THROW(oracle::parse_family("nope"), std::invalid_argument);
  const Mixture1D base = oracle::family_base(oracle::LandscapeFamily::kShiftedGmm);
  EXPECT_EQ(base.means, (std::vector<double>{0.0, 8.0}));
  EXPECT_EQ(base.vars, (std::vector<double>{1.0, 1.0}));
}

TEST(Landscape, TableShapeAndSlopes) {
  const std::vector<double> offsets{-1, 0, 1, 2};
  const auto l = oracle::njsd_landscape(oracle::LandscapeFamily::kTwoGaussian, offsets, {0.0, 4.0});
  ASSERT_EQ(l.values.size(), 2u);
  ASSERT_EQ(l.values[0].size(), 4u);
  EXPECT_EQ(l.values[1][1], 0.0);
  EXPECT_NEAR(l.slopes[0][1], (l.values[0][2] - l.values[0][0]) / 2.0, 1e-15);
  EXPECT_NEAR(l.slopes[0][3], l.values[0][3] - l.values[0][2], 1e-15);
}

TEST(Landscape, CountInteriorMinima) {
  EXPECT_EQ(oracle::count_interior_minima({3, 1, 2, 0, 4}), 2u);
  EXPECT_EQ(oracle::count_interior_minima({1, 1, 1}), 0u);
  EXPECT_EQ(oracle::count_interior_minima({0, 1, 2}), 0u);
}

TEST(NoisyBound, SmoothedCellDensityNormalizes) {
  const std::vector<double> probs{0.2, 0.5, 0.3};
  const Quadrature1D q(-40, 42, 20001);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.n; ++i)
    acc += (i == 0 || i + 1 == q.n ? 0.5 : 1.0) * std::exp(oracle::smoothed_cell_log_density(probs, 4.0, q.point(i)));
  EXPECT_NEAR(acc * q.step(), 1.0, 1e-9);
}

TEST(NoisyBound, EnumeratedBoundDominatesQuadrature) {
  Rng rng(23);
  for (int i = 0; i < 5; ++i) {
    const oracle::DiscreteWorld w = oracle::DiscreteWorld::random(3, 4, 2, rng);
    for (double s2 : {1.0, 100.0}) {
      const auto c = oracle::noisy_bound_check(w, s2);
      EXPECT_GE(c.nvaub, c.ngjsd - 1e-6);
      EXPECT_GE(c.ngjsd, 0.0);
    }
  }
}

}  // namespace
