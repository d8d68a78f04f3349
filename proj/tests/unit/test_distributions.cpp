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

#include "nalign/distributions.hpp"
#include "nalign/gradcheck.hpp"

namespace {

using namespace nalign;
using ad::Tape;
using ad::Tensor;
using dist::DiagGaussian;

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 ln(2 pi)

DiagGaussian gauss(std::vector<double> mean, std::vector<double> log_var) {
  const std::size_t d = mean.size();
  return DiagGaussian::make(Tensor::constant({1, d}, std::move(mean)), Tensor::constant({1, d}, std::move(log_var)));
}

double log_prob(double x, const DiagGaussian& g) {
  return dist::gaussian_log_prob(Tensor::constant({1, 1}, {x}), g).item();
}

dist::Gmm gmm(std::vector<double> logits, std::vector<double> means, std::vector<double> log_vars, std::size_t dim = 1) {
  const std::size_t k = logits.size();
  return {Tensor::constant({1, k}, std::move(logits)), Tensor::constant({k, dim}, std::move(means)),
          Tensor::constant({k, dim}, std::move(log_vars))};
}

TEST(GaussianLogProb, StandardAtZeroAndOne) {
  EXPECT_NEAR(log_prob(0.0, gauss({0}, {0})), -0.918938533204672742, 1e-15);
  EXPECT_NEAR(log_prob(1.0, gauss({0}, {0})), -1.418938533204672742, 1e-15);
}

TEST(GaussianLogProb, AtMeanIsNormalizer) {
  const std::vector<double> mu{0.3, -1.0, 4.0}, lv{0.5, -2.0, 1.0};
  const double lp = dist::gaussian_log_prob(Tensor::constant({1, 3}, mu), gauss(mu, lv)).item();
  EXPECT_NEAR(lp, -3 * kHalfLog2Pi - 0.5 * (0.5 - 2.0 + 1.0), 1e-14);
}

TEST(GaussianLogProb, DimensionMismatchThrows) {
  EXPECT_THROW(dist::gaussian_log_prob(Tensor::constant({1, 2}, {0, 0}), gauss({0}, {0})), std::exception);
}

TEST(GaussianLogProb, IntegratesToOne) {
  for (auto [mu, lv] : {std::pair{0.0, 0.0}, {3.0, 2.0}, {-5.0, -3.0}}) {
    const std::size_t n = 20001;
    const double s = std::exp(lv / 2);
    const double lo = mu - 10 * s, h = 20 * s / (n - 1);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = lo + i * h;
    const DiagGaussian g = DiagGaussian::make(Tensor::full({n, 1}, mu), Tensor::full({n, 1}, lv));
    const std::vector<double> lp = dist::gaussian_log_prob(Tensor::constant({n, 1}, xs), g).values();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (i == 0 || i == n - 1 ? 0.5 : 1.0) * std::exp(lp[i]);
    EXPECT_NEAR(acc * h, 1.0, 1e-6);
  }
}

TEST(GaussianLogProb, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    ad::Parameter mu("mu", {3, 2}, rng.normals(6)), lv("lv", {3, 2}, rng.normals(6));
    ad::Parameter x("x", {3, 2}, rng.normals(6));
    const auto r = ad::check_gradients(
        [&](Tape& tape) {
          return ad::sum(dist::gaussian_log_prob(tape.param(x), DiagGaussian::make(tape.param(mu), tape.param(lv))));
        },
        {&mu, &lv, &x});
    EXPECT_LT(r.max_rel_error, 1e-5);
  }
}

TEST(DiagGaussian, LogVarClamped) {
  const DiagGaussian g = gauss({0, 0}, {-50, 50});
  EXPECT_EQ(g.log_var.values(), (std::vector<double>{dist::kLogVarMin, dist::kLogVarMax}));
  EXPECT_EQ(dist::kLogVarMin, -12.0);
  EXPECT_EQ(dist::kLogVarMax, 12.0);
}

TEST(GaussianEntropy, ClosedForms) {
  EXPECT_NEAR(dist::gaussian_entropy(gauss({0}, {0})).item(), 1.418938533204672742, 1e-15);
  EXPECT_NEAR(dist::gaussian_entropy(gauss({5}, {std::log(4.0)})).item(), 1.418938533204672742 + std::log(2.0),
              1e-15);
  EXPECT_EQ(dist::gaussian_entropy(gauss({-3}, {0.7})).item(), dist::gaussian_entropy(gauss({8}, {0.7})).item());
}

TEST(ReparamSample, ZeroNoiseGivesMean) {
  const DiagGaussian g = gauss({1.25, -3.5}, {0.3, 2.0});
  EXPECT_EQ(dist::reparam_sample(g, Tensor::zeros({1, 2})).values(), g.mean.values());
}

TEST(ReparamSample, FloorVarianceStaysNearMean) {
  const DiagGaussian g = gauss({2.0}, {-12.0});
  for (double e : {-3.0, -1.0, 1.0, 3.0})
    EXPECT_LT(std::abs(dist::reparam_sample(g, Tensor::constant({1, 1}, {e})).item() - 2.0), 0.01);
}

TEST(ReparamSample, EmpiricalMeanWithinClt) {
  Rng rng(8);
  const std::size_t n = 100000;
  const DiagGaussian g = DiagGaussian::make(Tensor::full({n, 1}, 1.5), Tensor::full({n, 1}, std::log(4.0)));
  const std::vector<double> s = dist::reparam_sample(g, Tensor::constant({n, 1}, rng.normals(n))).values();
  const double m = std::accumulate(s.begin(), s.end(), 0.0) / n;
  EXPECT_LT(std::abs(m - 1.5), 3 * 2.0 / std::sqrt(double(n)));
}

TEST(KlGaussGauss, ClosedForms) {
  EXPECT_EQ(dist::kl_gauss_gauss(gauss({0}, {0}), gauss({0}, {0})).item(), 0.0);
  EXPECT_NEAR(dist::kl_gauss_gauss(gauss({1}, {0}), gauss({0}, {0})).item(), 0.5, 1e-15);
  EXPECT_NEAR(dist::kl_gauss_gauss(gauss({0}, {std::log(4.0)}), gauss({0}, {0})).item(), 0.806852819440054719, 1e-15);
}

TEST(ConvolveGaussian, AddsVariance) {
  const DiagGaussian c = dist::convolve_gaussian(gauss({0}, {0}), 9.0);
  EXPECT_NEAR(std::exp(c.log_var.item()), 10.0, 1e-13);
  EXPECT_EQ(c.mean.item(), 0.0);
  const DiagGaussian same = dist::convolve_gaussian(gauss({0.5}, {0.25}), 0.0);
  EXPECT_EQ(same.log_var.item(), 0.25);
  EXPECT_THROW(dist::convolve_gaussian(gauss({0}, {0}), -1.0), std::invalid_argument);
}

TEST(ConvolveGaussian, GmmWeightsAndMeansUnchanged) {
  const dist::Gmm p = gmm({0.2, -1.0}, {-2, 3}, {0, 1});
  const dist::Gmm c = dist::convolve_gaussian(p, 4.0);
  EXPECT_EQ(c.weight_logits.values(), p.weight_logits.values());
  EXPECT_EQ(c.means.values(), p.means.values());
  EXPECT_NEAR(std::exp(c.log_vars.values()[1]), std::exp(1.0) + 4.0, 1e-12);
  EXPECT_THROW(dist::convolve_gaussian(p, -0.5), std::invalid_argument);
}

TEST(GmmLogProb, SingleComponentIsGaussian) {
  const double z = 0.7;
  EXPECT_NEAR(dist::gmm_log_prob(Tensor::constant({1, 1}, {z}), gmm({0.3}, {1.0}, {0.5})).item(),
              log_prob(z, gauss({1.0}, {0.5})), 1e-15);
}

TEST(GmmLogProb, DuplicateComponentsCollapse) {
  const Tensor z = Tensor::constant({3, 1}, {-1.0, 0.2, 4.0});
  const std::vector<double> one = dist::gmm_log_prob(z, gmm({0}, {1.0}, {0.5})).values();
  const std::vector<double> two = dist::gmm_log_prob(z, gmm({1.3, 1.3}, {1.0, 1.0}, {0.5, 0.5})).values();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(one[i], two[i], 1e-14);
}

TEST(GmmLogProb, FarComponentsStable) {
  // ln(0.5 phi(20) + 0.5 phi(-20)) = ln phi(20) = -0.5 ln(2 pi) - 200.
  const double v = dist::gmm_log_prob(Tensor::constant({1, 1}, {0.0}), gmm({0, 0}, {-20, 20}, {0, 0})).item();
  EXPECT_NEAR(v, -kHalfLog2Pi - 200.0, 1e-12);
}

TEST(GmmLogProb, LowerBoundedByEachComponent) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> logits = rng.normals(3), means = rng.normals(6), lvs = rng.normals(6);
    const dist::Gmm p = gmm(logits, means, lvs, 2);
    const Tensor z = Tensor::constant({1, 2}, rng.normals(2));
    const double total = dist::gmm_log_prob(z, p).item();
    const std::vector<double> lw = p.log_weights().values();
    for (std::size_t k = 0; k < 3; ++k) {
      const DiagGaussian g = gauss({means[2 * k], means[2 * k + 1]}, {lvs[2 * k], lvs[2 * k + 1]});
      EXPECT_GE(total, lw[k] + dist::gaussian_log_prob(z, g).item() - 1e-12);
    }
  }
}

TEST(GmmPrior, WeightsSumToOneAndGradientsMatch) {
  Rng rng(10);
  dist::GmmPrior prior(4, 2, 3.0, rng);
  for (ad::Parameter* p : prior.parameters())
    for (double& v : p->value) v += 0.3 * rng.normal();
  const std::vector<double> w = prior.weights();
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  const Tensor z = Tensor::constant({5, 2}, rng.normals(10));
  const auto r =
      ad::check_gradients([&](Tape& tape) { return ad::sum(dist::gmm_log_prob(z, prior.bind(tape))); }, prior.parameters());
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(GmmPrior, InitialMeansWithinScale) {
  Rng rng(1);
  dist::GmmPrior prior(10, 1, 20.0, rng);
  for (double m : prior.means().value) {
    EXPECT_LE(std::abs(m), 20.0);
  }
  for (double lv : prior.log_vars().value) EXPECT_EQ(lv, 0.0);
  for (double w : prior.weights()) EXPECT_NEAR(w, 0.1, 1e-15);
}

TEST(Categorical, Invariants) {
  const dist::Categorical c({0.25, 0.75});
  EXPECT_NEAR(c.entropy(), -(0.25 * std::log(0.25) + 0.75 * std::log(0.75)), 1e-15);
  EXPECT_THROW(dist::Categorical({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(dist::Categorical({-0.1, 1.1}), std::invalid_argument);
  EXPECT_EQ(dist::Categorical({1.0, 0.0}).entropy(), 0.0);
}

}  // namespace
