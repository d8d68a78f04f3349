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

// Exact information quantities on finite worlds.
//
// A world fixes the data distribution q(x, d), an encoder q(z | x, d), a
// decoder p(x | z, d) and a shared prior p(z). Every expectation is a finite
// sum, so alignment bounds and their gaps can be checked to rounding error.
// 0 log 0 is taken as 0 throughout.

#include <cstddef>
#include <vector>

#include "nalign/random.hpp"

namespace nalign::oracle {

inline constexpr std::size_t kMaxAlphabet = 16;
inline constexpr std::size_t kMaxDomains = 4;

class DiscreteWorld {
 public:
  DiscreteWorld(std::size_t nx, std::size_t nz, std::size_t nd);

  /// Dirichlet(1) joint q(x, d), Dirichlet(1) conditional slices and prior.
  static DiscreteWorld random(std::size_t nx, std::size_t nz, std::size_t nd, Rng& rng);

  std::size_t nx() const { return nx_; }
  std::size_t nz() const { return nz_; }
  std::size_t nd() const { return nd_; }

  double& q_xd(std::size_t x, std::size_t d) { return q_xd_[x * nd_ + d]; }
  double q_xd(std::size_t x, std::size_t d) const { return q_xd_[x * nd_ + d]; }
  double& q_z_given_xd(std::size_t z, std::size_t x, std::size_t d) { return q_z_xd_[(z * nx_ + x) * nd_ + d]; }
  double q_z_given_xd(std::size_t z, std::size_t x, std::size_t d) const { return q_z_xd_[(z * nx_ + x) * nd_ + d]; }
  double& p_x_given_zd(std::size_t x, std::size_t z, std::size_t d) { return p_x_zd_[(x * nz_ + z) * nd_ + d]; }
  double p_x_given_zd(std::size_t x, std::size_t z, std::size_t d) const { return p_x_zd_[(x * nz_ + z) * nd_ + d]; }
  double& p_z(std::size_t z) { return p_z_[z]; }
  double p_z(std::size_t z) const { return p_z_[z]; }

  // Marginals derived from the tables on every call.
  double q_d(std::size_t d) const;
  double q_x_given_d(std::size_t x, std::size_t d) const;
  double q_z_given_d(std::size_t z, std::size_t d) const;
  double q_z(std::size_t z) const;
  /// Encoder posterior q(x | z, d) by Bayes; 0 where q(z | d) = 0.
  double q_x_given_zd(std::size_t x, std::size_t z, std::size_t d) const;

  /// Throws std::invalid_argument naming the first violated table invariant.
  void validate(double tol = 1e-12) const;

 private:
  std::size_t nx_, nz_, nd_;
  std::vector<double> q_xd_;
  std::vector<double> q_z_xd_;
  std::vector<double> p_x_zd_;
  std::vector<double> p_z_;
};

struct GjsdValue {
  /// H(E_d q(z|d)) - E_d H(q(z|d)).
  double gjsd = 0.0;
  /// sum q(z,d) log q(z,d) / (q(z) q(d)), computed independently.
  double mutual_information = 0.0;
};
GjsdValue gjsd_exact(const DiscreteWorld& w);

struct VariationalOptimum {
  std::vector<double> p_z;           // q(z)
  std::vector<double> p_x_given_zd;  // q(x|z,d), uniform on empty z slices
};
VariationalOptimum optimal_variational(const DiscreteWorld& w);
/// Copy of `w` with the optimal prior and decoder plugged in.
DiscreteWorld with_optimal_variational(const DiscreteWorld& w);

struct VaubValue {
  double vaub = 0.0;
  /// KL(q(z) || p(z)) + E_{q(d) q(z|d)} KL(q(x|z,d) || p(x|z,d)).
  double gap = 0.0;
  /// Set when p assigns zero mass where q has mass; vaub and gap are then +inf.
  bool infinite = false;
};
/// VAUB including the constant -E_d H(q(x|d)).
VaubValue vaub_exact(const DiscreteWorld& w);

/// |H(q(z|d)) - H(q(x|d)) - E[log p(x|z,d) / q(z|x,d)] - E KL(q(x|z,d) || p(x|z,d))|.
double entropy_cov_check(const DiscreteWorld& w, std::size_t d);

struct FixedPriorCheck {
  double residual = 0.0;
  double fixed_prior_objective = 0.0;
  double learned_prior_objective = 0.0;
  double kl_to_fixed = 0.0;
  bool infinite = false;
};
/// Decomposes the fixed-prior objective (with the optimal decoder) into the
/// learned-prior objective plus KL(q(z) || u).
FixedPriorCheck fixed_prior_decomposition_check(const DiscreteWorld& w, const std::vector<double>& u);

struct MiBoundCheck {
  /// I(x; z | d).
  double mutual_information = 0.0;
  /// E[log p(x|z,d)] + H(x|d) with the world's decoder.
  double bound = 0.0;
  /// E_{q(d) q(z|d)} KL(q(x|z,d) || p(x|z,d)).
  double kl_term = 0.0;
  /// |mutual_information - bound - kl_term|.
  double residual = 0.0;
};
MiBoundCheck mi_reconstruction_check(const DiscreteWorld& w);

/// KL(q(z) || p(z)) of the world's prior.
double prior_kl(const DiscreteWorld& w);
/// E_{q(d) q(z|d)} KL(q(x|z,d) || p(x|z,d)) of the world's decoder.
double decoder_kl(const DiscreteWorld& w);
/// E_q[-log p(x|z,d) + log q(z|x,d)], the enumerated encoder/decoder ratio term.
double ratio_term(const DiscreteWorld& w);
/// E_d H(q(x|d)).
double data_entropy(const DiscreteWorld& w);

/// Shannon entropy in nats.
double entropy(const std::vector<double>& p);
/// KL(p || q); +inf when q = 0 where p > 0.
double kl(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace nalign::oracle
