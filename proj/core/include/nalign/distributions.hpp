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

#include <cstddef>
#include <vector>

#include "nalign/autodiff.hpp"
#include "nalign/random.hpp"

namespace nalign::dist {

inline constexpr double kLogVarMin = -12.0;
inline constexpr double kLogVarMax = 12.0;

/// A batch of independent diagonal Gaussians, one per row of `mean`.
///
/// Build with make(); it clamps log-variances to [kLogVarMin, kLogVarMax] so a
/// collapsing encoder variance cannot produce infinite log-densities.
struct DiagGaussian {
  ad::Tensor mean;
  ad::Tensor log_var;

  static DiagGaussian make(ad::Tensor mean, ad::Tensor log_var);
  static DiagGaussian standard(std::size_t rows, std::size_t dim);

  std::size_t rows() const { return mean.rows(); }
  std::size_t dim() const { return mean.cols(); }
};

/// Row-wise log N(x; mean, diag(exp(log_var))), summed over dimensions. Shape {n, 1}.
ad::Tensor gaussian_log_prob(const ad::Tensor& x, const DiagGaussian& g);
/// Row-wise differential entropy, 0.5 * sum(ln(2 pi e) + log_var). Shape {n, 1}.
ad::Tensor gaussian_entropy(const DiagGaussian& g);
/// mean + exp(log_var / 2) * eps. The caller owns the noise.
ad::Tensor reparam_sample(const DiagGaussian& g, const ad::Tensor& eps);
/// Row-wise closed-form KL(a || b). Shape {n, 1}.
ad::Tensor kl_gauss_gauss(const DiagGaussian& a, const DiagGaussian& b);
/// Adds sigma2 to every variance. sigma2 == 0 returns the input unchanged.
DiagGaussian convolve_gaussian(const DiagGaussian& g, double sigma2);

/// Tensor view of a diagonal Gaussian mixture, bound to a tape or constant.
struct Gmm {
  ad::Tensor weight_logits;  // {1, K}
  ad::Tensor means;          // {K, D}
  ad::Tensor log_vars;       // {K, D}

  std::size_t components() const { return means.rows(); }
  std::size_t dim() const { return means.cols(); }
  /// log softmax(weight_logits), shape {1, K}.
  ad::Tensor log_weights() const;
};

/// logsumexp_k [log w_k + log N(z; mean_k, var_k)] per row of z. Shape {n, 1}.
ad::Tensor gmm_log_prob(const ad::Tensor& z, const Gmm& p);
Gmm convolve_gaussian(const Gmm& p, double sigma2);

/// Learnable shared prior p(z). Weights are trained through softmax logits.
class GmmPrior {
 public:
  GmmPrior() = default;
  /// Means uniform in [-init_scale, init_scale], unit variances, equal weights.
  GmmPrior(std::size_t components, std::size_t dim, double init_scale, Rng& rng);

  Gmm bind(ad::Tape& tape) const;
  Gmm constant() const;

  std::size_t components() const { return means_.shape.empty() ? 0 : means_.shape[0]; }
  std::size_t dim() const { return means_.shape.size() < 2 ? 0 : means_.shape[1]; }

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;

  ad::Parameter& weight_logits() { return weight_logits_; }
  ad::Parameter& means() { return means_; }
  ad::Parameter& log_vars() { return log_vars_; }

  /// Normalized mixture weights.
  std::vector<double> weights() const;

 private:
  ad::Parameter weight_logits_;
  ad::Parameter means_;
  ad::Parameter log_vars_;
};

class Categorical {
 public:
  /// Throws std::invalid_argument unless probs >= 0 and |sum - 1| < 1e-12.
  explicit Categorical(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  /// Shannon entropy in nats with 0 log 0 = 0.
  double entropy() const;

 private:
  std::vector<double> probs_;
};

}  // namespace nalign::dist
