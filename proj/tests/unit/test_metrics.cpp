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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "nalign/metrics.hpp"
#include "nalign/random.hpp"

namespace {

using namespace nalign;
using metrics::SampleSet;

Matrix normals(Rng& rng, std::size_t n, std::size_t d, double mean = 0.0, double scale = 1.0) {
  Matrix m(n, d);
  for (double& v : m.data) v = mean + scale * rng.normal();
  return m;
}

SampleSet pooled(const Matrix& a, const Matrix& b) {
  SampleSet s{Matrix(a.rows + b.rows, a.cols), {}};
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) s.points(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) s.points(a.rows + i, j) = b(i, j);
  s.domain.assign(a.rows, 0);
  s.domain.resize(a.rows + b.rows, 1);
  return s;
}

std::vector<double> covariance(const Matrix& x) {
  const std::size_t d = x.cols;
  std::vector<double> mean(d, 0.0), cov(d * d, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / x.rows;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) cov[j * d + k] += (x(i, j) - mean[j]) * (x(i, k) - mean[k]) / x.rows;
  return cov;
}

Matrix affine(const Matrix& x, const std::vector<double>& A, const std::vector<double>& t) {
  Matrix out(x.rows, 2);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < 2; ++j) out(i, j) = A[2 * j] * x(i, 0) + A[2 * j + 1] * x(i, 1) + t[j];
  return out;
}

TEST(Wasserstein1, EqualAndShifted) {
  Rng rng(1);
  std::vector<double> a = rng.normals(200), b = a;
  EXPECT_EQ(metrics::wasserstein1(a, b), 0.0);
  for (double& v : b) v += 2.5;
  EXPECT_NEAR(metrics::wasserstein1(a, b), 2.5, 1e-12);
  EXPECT_THROW(metrics::wasserstein1({}, {1.0}), std::invalid_argument);
}

TEST(Wasserstein1, UnequalSizesUseInterpolatedQuantiles) {
  EXPECT_NEAR(metrics::wasserstein1({2.0}, {5.0, 5.0, 5.0}), 3.0, 1e-15);
  // Quantile of {-1, 1} runs linearly from -1 to 1 on [1/4, 3/4]: 1/4 + 1/4 + 1/4.
  EXPECT_NEAR(metrics::wasserstein1({0.0}, {-1.0, 1.0}), 0.75, 1e-15);
}

TEST(Swd, IdentityShiftAndSymmetry) {
  Rng rng(2);
  const Matrix a = normals(rng, 100, 2), b = normals(rng, 120, 2, 1.0);
  EXPECT_EQ(metrics::swd(a, a, 50, 3), 0.0);
  EXPECT_EQ(metrics::swd(a, b, 50, 3), metrics::swd(b, a, 50, 3));
  Matrix x = normals(rng, 50, 1), y = x;
  for (double& v : y.data) v -= 4.0;
  EXPECT_NEAR(metrics::swd(x, y, 10, 0), 4.0, 1e-12);
  EXPECT_EQ(metrics::swd(a, b, 50, 9), metrics::swd(a, b, 50, 9));
  EXPECT_THROW(metrics::swd(a, Matrix(0, 2), 5, 0), std::invalid_argument);
  EXPECT_THROW(metrics::swd(a, b, 0, 0), std::invalid_argument);
}

TEST(Swd, TriangleInequality1D) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = normals(rng, 30, 1, rng.uniform(-2, 2)), b = normals(rng, 30, 1, rng.uniform(-2, 2)),
                 c = normals(rng, 30, 1, rng.uniform(-2, 2));
    EXPECT_LE(metrics::swd(a, c, 1, 0), metrics::swd(a, b, 1, 0) + metrics::swd(b, c, 1, 0) + 1e-9);
  }
}

TEST(Swd, FiniteSampleBiasOfStandardNormals) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    EXPECT_LT(metrics::swd(normals(rng, 500, 2), normals(rng, 500, 2), 1000, seed), 0.15) << seed;
  }
}

TEST(Whiten, PooledCovarianceIsIdentity) {
  Rng rng(4);
  Matrix x = affine(normals(rng, 400, 2), {3.0, 1.0, -0.5, 0.2}, {4.0, -7.0});
  const Matrix w = metrics::whiten(x);
  const auto cov = covariance(w);
  // The ridge (1e-6 of the mean variance) shrinks the thin direction, whose
  // variance is about 0.12 of 5.1 here, by under 1e-4.
  EXPECT_NEAR(cov[0], 1.0, 1e-4);
  EXPECT_NEAR(cov[3], 1.0, 1e-4);
  EXPECT_NEAR(cov[1], 0.0, 1e-4);
  // The ridge is relative to the trace, so a global scale changes nothing.
  Matrix big = x;
  for (double& v : big.data) v *= 10.0;
  const Matrix wb = metrics::whiten(big);
  for (std::size_t i = 0; i < w.data.size(); ++i) EXPECT_NEAR(wb.data[i], w.data[i], 1e-9);
}

TEST(Whiten, RankDeficientStaysFinite) {
  Matrix line(2, 2, std::vector<double>{1.0, 2.0, 3.0, 6.0});
  const Matrix w = metrics::whiten(line);
  for (double v : w.data) EXPECT_TRUE(std::isfinite(v));
  // Centered points are +-(1, 2); the null direction (2, -1) carries nothing.
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(2 * w(i, 0) - w(i, 1), 0.0, 1e-9);
  Matrix bad(3, 1, std::vector<double>{1.0, NAN, 2.0});
  EXPECT_THROW(metrics::whiten(bad), std::invalid_argument);
}

TEST(WhitenedSwd, AffineInvariant) {
  Rng rng(5);
  const Matrix a = normals(rng, 200, 2), b = affine(normals(rng, 200, 2), {1.2, 0.3, 0.0, 0.8}, {1.0, 0.5});
  const double base = metrics::whitened_swd(a, b, 200, 1);
  // Scale and shift leave the whitened points unchanged.
  const std::vector<double> S{2.5, 0.0, 0.0, 2.5}, t{-4.0, 9.0};
  EXPECT_NEAR(metrics::whitened_swd(affine(a, S, t), affine(b, S, t), 200, 1), base, 1e-9);
  // A general map leaves them rotated, which moves the estimate only by the
  // spread of the random projections.
  const std::vector<double> A{2.0, -1.0, 0.5, 3.0};
  EXPECT_NEAR(metrics::whitened_swd(affine(a, A, t), affine(b, A, t), 1000, 1),
              metrics::whitened_swd(a, b, 1000, 1), 0.02);
}

TEST(DomainSeparability, NoSignalNearChance) {
  Rng rng(6);
  const SampleSet s = pooled(normals(rng, 300, 2), normals(rng, 300, 2));
  EXPECT_NEAR(metrics::domain_separability(s, 0, {600}), 0.5, 0.1);
}

TEST(DomainSeparability, DisjointClustersSeparate) {
  Rng rng(7);
  const SampleSet s = pooled(normals(rng, 200, 2, -5.0), normals(rng, 200, 2, 5.0));
  EXPECT_GE(metrics::domain_separability(s, 1), 0.99);
}

TEST(DomainSeparability, LabelPermutationAndRotationInvariant) {
  Rng rng(8);
  const SampleSet s = pooled(normals(rng, 150, 2, -0.5), normals(rng, 150, 2, 0.7));
  const double base = metrics::domain_separability(s, 2);
  SampleSet flipped = s;
  for (auto& d : flipped.domain) d = 1 - d;
  EXPECT_NEAR(metrics::domain_separability(flipped, 2), base, 1e-12);
  SampleSet rotated = s;
  const double c = std::cos(1.1), sn = std::sin(1.1);
  rotated.points = affine(s.points, {c, -sn, sn, c}, {0.0, 0.0});
  EXPECT_NEAR(metrics::domain_separability(rotated, 2), base, 1e-9);
  SampleSet single = s;
  std::fill(single.domain.begin(), single.domain.end(), 0);
  EXPECT_THROW(metrics::domain_separability(single, 0), std::invalid_argument);
}

TEST(HistogramJsd, Examples) {
  Rng rng(9);
  const std::vector<double> a = rng.normals(1000);
  EXPECT_EQ(metrics::histogram_jsd(a, a, 50), 0.0);
  EXPECT_NEAR(metrics::histogram_jsd({0.0, 0.1, 0.2}, {5.0, 5.1}, 10), std::log(2.0), 1e-15);
  EXPECT_LT(metrics::histogram_jsd(rng.normals(10000), rng.normals(10000), 50), 0.02);
}

TEST(DpGap, Examples) {
  EXPECT_EQ(metrics::dp_gap({1, 0, 1, 0}, {0, 0, 1, 1}), 0.0);
  EXPECT_EQ(metrics::dp_gap({1, 1, 0, 0}, {0, 0, 1, 1}), 1.0);
  std::vector<std::size_t> pred, dom;
  for (int i = 0; i < 20; ++i) {
    pred.push_back(i < 12 ? 1 : 0);
    dom.push_back(0);
  }
  for (int i = 0; i < 20; ++i) {
    pred.push_back(i < 7 ? 1 : 0);
    dom.push_back(1);
  }
  EXPECT_NEAR(metrics::dp_gap(pred, dom), 0.25, 1e-15);
  EXPECT_THROW(metrics::dp_gap({1, 0}, {0, 0}), std::invalid_argument);
}

TEST(Accuracy, Basic) {
  EXPECT_DOUBLE_EQ(metrics::accuracy({1, 0, 1, 1}, {1, 1, 1, 0}), 0.5);
  EXPECT_THROW(metrics::accuracy({1}, {1, 0}), std::invalid_argument);
}

}  // namespace
