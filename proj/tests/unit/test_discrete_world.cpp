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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "nalign/discrete_world.hpp"

namespace {

using namespace nalign;
using oracle::DiscreteWorld;

const double kLn2 = std::log(2.0);

// One-symbol data space, uniform domains, the given q(z | d) rows and uniform
// decoder and prior tables.
DiscreteWorld latent_only(const std::vector<std::vector<double>>& q_z_given_d) {
  const std::size_t nd = q_z_given_d.size(), nz = q_z_given_d[0].size();
  DiscreteWorld w(1, nz, nd);
  for (std::size_t d = 0; d < nd; ++d) {
    w.q_xd(0, d) = 1.0 / static_cast<double>(nd);
    for (std::size_t z = 0; z < nz; ++z) {
      w.q_z_given_xd(z, 0, d) = q_z_given_d[d][z];
      w.p_x_given_zd(0, z, d) = 1.0;
    }
  }
  for (std::size_t z = 0; z < nz; ++z) w.p_z(z) = 1.0 / static_cast<double>(nz);
  w.validate();
  return w;
}

// GJSD by direct entropy enumeration on plain arrays, for uniform q(d).
double gjsd_by_hand(const std::vector<std::vector<double>>& rows) {
  std::vector<double> mix(rows[0].size(), 0.0);
  double mean_h = 0.0;
  for (const auto& r : rows) {
    for (std::size_t z = 0; z < r.size(); ++z) mix[z] += r[z] / static_cast<double>(rows.size());
    mean_h += oracle::entropy(r) / static_cast<double>(rows.size());
  }
  return oracle::entropy(mix) - mean_h;
}

// Relabels latent symbols by perm: new z' = perm[z].
DiscreteWorld permute_latents(const DiscreteWorld& w, const std::vector<std::size_t>& perm) {
  DiscreteWorld out(w.nx(), w.nz(), w.nd());
  for (std::size_t x = 0; x < w.nx(); ++x)
    for (std::size_t d = 0; d < w.nd(); ++d) {
      out.q_xd(x, d) = w.q_xd(x, d);
      for (std::size_t z = 0; z < w.nz(); ++z) {
        out.q_z_given_xd(perm[z], x, d) = w.q_z_given_xd(z, x, d);
        out.p_x_given_zd(x, perm[z], d) = w.p_x_given_zd(x, z, d);
      }
    }
  for (std::size_t z = 0; z < w.nz(); ++z) out.p_z(perm[z]) = w.p_z(z);
  return out;
}

// Deterministic encoder z = perm[x] in every domain, q(x | d) = px[d], with
// the optimal decoder and prior.
DiscreteWorld bijective_world(const std::vector<std::vector<double>>& px, const std::vector<std::size_t>& perm) {
  const std::size_t nd = px.size(), n = perm.size();
  DiscreteWorld w(n, n, nd);
  for (std::size_t d = 0; d < nd; ++d)
    for (std::size_t x = 0; x < n; ++x) {
      w.q_xd(x, d) = px[d][x] / static_cast<double>(nd);
      for (std::size_t z = 0; z < n; ++z) {
        w.q_z_given_xd(z, x, d) = z == perm[x] ? 1.0 : 0.0;
        w.p_x_given_zd(x, z, d) = 1.0 / static_cast<double>(n);
      }
    }
  for (std::size_t z = 0; z < n; ++z) w.p_z(z) = 1.0 / static_cast<double>(n);
  w.validate();
  return oracle::with_optimal_variational(w);
}

TEST(Gjsd, IdenticalConditionalsGiveZero) {
  const auto g = oracle::gjsd_exact(latent_only({{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}}));
  EXPECT_NEAR(g.gjsd, 0.0, 1e-15);
  EXPECT_NEAR(g.mutual_information, 0.0, 1e-15);
}

TEST(Gjsd, DisjointSupportsGiveLn2) {
  const auto g = oracle::gjsd_exact(latent_only({{1, 0}, {0, 1}}));
  EXPECT_NEAR(g.gjsd, kLn2, 1e-15);
  EXPECT_NEAR(g.mutual_information, kLn2, 1e-15);
}

TEST(Gjsd, ThreeQuarterExample) {
  const std::vector<std::vector<double>> rows{{0.75, 0.25}, {0.25, 0.75}};
  // ln 2 - H(3/4, 1/4), evaluated to 30 digits offline.
  const double frozen = 0.130812035941136959;
  EXPECT_NEAR(gjsd_by_hand(rows), frozen, 1e-15);
  const auto g = oracle::gjsd_exact(latent_only(rows));
  EXPECT_NEAR(g.gjsd, frozen, 1e-15);
  EXPECT_NEAR(g.mutual_information, frozen, 1e-15);
}

TEST(Gjsd, EqualsMutualInformationOnRandomWorlds) {
  Rng rng(0);
  for (int i = 0; i < 200; ++i) {
    const DiscreteWorld w =
        DiscreteWorld::random(2 + rng.index(6), 2 + rng.index(6), 2 + rng.index(3), rng);
    const auto g = oracle::gjsd_exact(w);
    EXPECT_NEAR(g.gjsd, g.mutual_information, 1e-12);
  }
}

TEST(OptimalVariational, UniformWorldGivesUniformTables) {
  DiscreteWorld w(3, 4, 2);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t d = 0; d < 2; ++d) {
      w.q_xd(x, d) = 1.0 / 6.0;
      for (std::size_t z = 0; z < 4; ++z) w.q_z_given_xd(z, x, d) = 0.25;
      for (std::size_t z = 0; z < 4; ++z) w.p_x_given_zd(x, z, d) = 1.0 / 3.0;
    }
  for (std::size_t z = 0; z < 4; ++z) w.p_z(z) = 0.25;
  const auto opt = oracle::optimal_variational(w);
  for (double p : opt.p_z) EXPECT_NEAR(p, 0.25, 1e-15);
  for (double p : opt.p_x_given_zd) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(OptimalVariational, PermutationEncoderPermutesMarginal) {
  const std::vector<std::vector<double>> px{{0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}};
  const std::vector<std::size_t> perm{2, 0, 1};
  const DiscreteWorld w = bijective_world(px, perm);
  const auto opt = oracle::optimal_variational(w);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(opt.p_z[perm[x]], 0.5 * (px[0][x] + px[1][x]), 1e-15);
}

TEST(OptimalVariational, ClosesTheGap) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const DiscreteWorld w = oracle::with_optimal_variational(DiscreteWorld::random(3, 3, 2, rng));
    const auto v = oracle::vaub_exact(w);
    EXPECT_LE(std::abs(v.gap), 1e-12);
    EXPECT_NEAR(v.vaub, oracle::gjsd_exact(w).gjsd, 1e-12);
  }
}

TEST(Vaub, UpperBoundsGjsdWithTwoKlGap) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const DiscreteWorld w = DiscreteWorld::random(2 + rng.index(5), 2 + rng.index(5), 2 + rng.index(3), rng);
    const auto v = oracle::vaub_exact(w);
    const double g = oracle::gjsd_exact(w).gjsd;
    ASSERT_FALSE(v.infinite);
    EXPECT_GE(v.vaub, g - 1e-12);
    EXPECT_NEAR(v.vaub - g, v.gap, 1e-12);
    EXPECT_NEAR(v.gap, oracle::prior_kl(w) + oracle::decoder_kl(w), 1e-12);
  }
}

TEST(Vaub, IdentityEncoderWithAlignedDomainsIsZero) {
  const DiscreteWorld w = bijective_world({{0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}}, {0, 1, 2});
  const auto v = oracle::vaub_exact(w);
  EXPECT_NEAR(v.vaub, 0.0, 1e-15);
  EXPECT_NEAR(oracle::gjsd_exact(w).gjsd, 0.0, 1e-15);
}

TEST(Vaub, ZeroPriorMassIsFlaggedInfinite) {
  DiscreteWorld w = latent_only({{0.5, 0.5}, {0.5, 0.5}});
  w.p_z(0) = 0.0;
  w.p_z(1) = 1.0;
  const auto v = oracle::vaub_exact(w);
  EXPECT_TRUE(v.infinite);
  EXPECT_EQ(v.vaub, std::numeric_limits<double>::infinity());
}

TEST(EntropyChangeOfVariables, ResidualOnRandomWorlds) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const DiscreteWorld w = DiscreteWorld::random(2 + rng.index(6), 2 + rng.index(6), 2, rng);
    for (std::size_t d = 0; d < 2; ++d) EXPECT_LT(oracle::entropy_cov_check(w, d), 1e-12);
  }
}

TEST(EntropyChangeOfVariables, BijectiveEncoderPreservesEntropy) {
  const std::vector<std::vector<double>> px{{0.6, 0.3, 0.1}, {0.25, 0.25, 0.5}};
  const DiscreteWorld w = bijective_world(px, {1, 2, 0});
  for (std::size_t d = 0; d < 2; ++d) {
    std::vector<double> qz(3);
    for (std::size_t z = 0; z < 3; ++z) qz[z] = w.q_z_given_d(z, d);
    EXPECT_NEAR(oracle::entropy(qz), oracle::entropy(px[d]), 1e-15);
    EXPECT_LT(oracle::entropy_cov_check(w, d), 1e-12);
  }
}

TEST(EntropyChangeOfVariables, PosteriorDecoderZeroesKl) {
  Rng rng(4);
  const DiscreteWorld w = oracle::with_optimal_variational(DiscreteWorld::random(4, 3, 2, rng));
  EXPECT_NEAR(oracle::decoder_kl(w), 0.0, 1e-15);
  EXPECT_LT(oracle::entropy_cov_check(w, 0), 1e-12);
}

TEST(FixedPrior, MatchedPriorHasZeroKl) {
  Rng rng(5);
  const DiscreteWorld w = DiscreteWorld::random(3, 4, 2, rng);
  std::vector<double> qz(4);
  for (std::size_t z = 0; z < 4; ++z) qz[z] = w.q_z(z);
  const auto c = oracle::fixed_prior_decomposition_check(w, qz);
  EXPECT_NEAR(c.kl_to_fixed, 0.0, 1e-15);
  EXPECT_NEAR(c.fixed_prior_objective, c.learned_prior_objective, 1e-12);
  EXPECT_LT(c.residual, 1e-12);
}

TEST(FixedPrior, UniformPriorOnSkewedMarginal) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const DiscreteWorld w = DiscreteWorld::random(4, 5, 3, rng);
    const auto c = oracle::fixed_prior_decomposition_check(w, std::vector<double>(5, 0.2));
    EXPECT_LT(c.residual, 1e-12);
    EXPECT_GT(c.kl_to_fixed, 0.0);
  }
}

TEST(FixedPrior, RelabelingSymmetry) {
  Rng rng(7);
  const DiscreteWorld w = DiscreteWorld::random(3, 4, 2, rng);
  const std::vector<double> u{0.1, 0.2, 0.3, 0.4};
  const std::vector<std::size_t> perm{3, 1, 0, 2};
  std::vector<double> pu(4);
  for (std::size_t z = 0; z < 4; ++z) pu[perm[z]] = u[z];
  const auto a = oracle::fixed_prior_decomposition_check(w, u);
  const auto b = oracle::fixed_prior_decomposition_check(permute_latents(w, perm), pu);
  EXPECT_NEAR(a.kl_to_fixed, b.kl_to_fixed, 1e-14);
  EXPECT_NEAR(a.fixed_prior_objective, b.fixed_prior_objective, 1e-14);
  EXPECT_LT(b.residual, 1e-12);
}

TEST(FixedPrior, ZeroMassFlagged) {
  Rng rng(8);
  const DiscreteWorld w = DiscreteWorld::random(3, 3, 2, rng);
  EXPECT_TRUE(oracle::fixed_prior_decomposition_check(w, {0.5, 0.5, 0.0}).infinite);
}

TEST(MiReconstruction, BoundWithExactSlack) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const DiscreteWorld w = DiscreteWorld::random(2 + rng.index(6), 2 + rng.index(6), 2, rng);
    const auto c = oracle::mi_reconstruction_check(w);
    EXPECT_LE(c.bound, c.mutual_information + 1e-12);
    EXPECT_LT(c.residual, 1e-12);
    EXPECT_GE(c.kl_term, 0.0);
  }
}

TEST(DiscreteWorld, ValidateRejectsBadTables) {
  DiscreteWorld w = latent_only({{0.5, 0.5}, {0.5, 0.5}});
  w.q_z_given_xd(0, 0, 0) = 0.9;
  EXPECT_THROW(w.validate(), std::invalid_argument);
  EXPECT_THROW(DiscreteWorld(oracle::kMaxAlphabet + 1, 2, 2), std::invalid_argument);
}

TEST(InformationHelpers, KlAndEntropy) {
  EXPECT_EQ(oracle::entropy({1.0, 0.0}), 0.0);
  EXPECT_NEAR(oracle::entropy({0.5, 0.5}), kLn2, 1e-16);
  EXPECT_EQ(oracle::kl({0.5, 0.5}, {1.0, 0.0}), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(oracle::kl({1.0, 0.0}, {0.5, 0.5}), kLn2, 1e-16);
}

}  // namespace
