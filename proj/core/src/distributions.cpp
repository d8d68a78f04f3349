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

#include "nalign/distributions.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nalign::dist {

using ad::Tensor;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ad::ShapeError(std::string(op) + ": dimension mismatch " + ad::to_string(a.shape()) + " vs " +
                         ad::to_string(b.shape()));
}

}  // namespace

DiagGaussian DiagGaussian::make(Tensor mean, Tensor log_var) {
  require_same_shape("DiagGaussian", mean, log_var);
  return DiagGaussian{std::move(mean), ad::clamp(log_var, kLogVarMin, kLogVarMax)};
}

DiagGaussian DiagGaussian::standard(std::size_t rows, std::size_t dim) {
  return DiagGaussian{Tensor::zeros({rows, dim}), Tensor::zeros({rows, dim})};
}

Tensor gaussian_log_prob(const Tensor& x, const DiagGaussian& g) {
  require_same_shape("gaussian_log_prob", x, g.mean);
  const Tensor diff = x - g.mean;
  const Tensor quad = ad::square(diff) * ad::exp(-g.log_var);
  const Tensor per_dim = (g.log_var * -0.5) - (quad * 0.5) - kHalfLog2Pi;
  return ad::sum(per_dim, 1);
}

Tensor gaussian_entropy(const DiagGaussian& g) {
  constexpr double kLog2PiE = 2.83787706640934548356;  // ln(2 pi e)
  return ad::sum((g.log_var + kLog2PiE) * 0.5, 1);
}

Tensor reparam_sample(const DiagGaussian& g, const Tensor& eps) {
  require_same_shape("reparam_sample", eps, g.mean);
  return g.mean + ad::exp(g.log_var * 0.5) * eps;
}

Tensor kl_gauss_gauss(const DiagGaussian& a, const DiagGaussian& b) {
  require_same_shape("kl_gauss_gauss", a.mean, b.mean);
  const Tensor ratio = (ad::exp(a.log_var) + ad::square(a.mean - b.mean)) * ad::exp(-b.log_var);
  return ad::sum((b.log_var - a.log_var + ratio - 1.0) * 0.5, 1);
}

DiagGaussian convolve_gaussian(const DiagGaussian& g, double sigma2) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("convolve_gaussian: sigma2 must be >= 0");
  if (sigma2 == 0.0) return g;
  return DiagGaussian{g.mean, ad::log(ad::exp(g.log_var) + sigma2)};
}

Tensor Gmm::log_weights() const { return weight_logits - ad::logsumexp(weight_logits, 1); }

Tensor gmm_log_prob(const Tensor& z, const Gmm& p) {
  if (z.rank() != 2 || z.cols() != p.dim())
    throw ad::ShapeError("gmm_log_prob: points of shape " + ad::to_string(z.shape()) + " for a mixture of dim " +
                         std::to_string(p.dim()));
  const std::size_t n = z.rows();
  std::vector<Tensor> columns;
  columns.reserve(p.components());
  for (std::size_t k = 0; k < p.components(); ++k) {
    const std::size_t row[] = {k};
    DiagGaussian comp{ad::repeat_rows(ad::gather_rows(p.means, row), n),
                      ad::repeat_rows(ad::clamp(ad::gather_rows(p.log_vars, row), kLogVarMin, kLogVarMax), n)};
    columns.push_back(gaussian_log_prob(z, comp));
  }
  const Tensor joint = ad::concat(columns, 1) + ad::repeat_rows(p.log_weights(), n);
  return ad::logsumexp(joint, 1);
}

Gmm convolve_gaussian(const Gmm& p, double sigma2) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("convolve_gaussian: sigma2 must be >= 0");
  if (sigma2 == 0.0) return p;
  return Gmm{p.weight_logits, p.means, ad::log(ad::exp(p.log_vars) + sigma2)};
}

GmmPrior::GmmPrior(std::size_t components, std::size_t dim, double init_scale, Rng& rng)
    : weight_logits_("prior.weight_logits", {1, components}),
      means_("prior.means", {components, dim}),
      log_vars_("prior.log_vars", {components, dim}) {
  if (components == 0 || dim == 0) throw std::invalid_argument("GmmPrior: empty mixture");
  for (double& m : means_.value) m = rng.uniform(-1.0, 1.0) * init_scale;
}

Gmm GmmPrior::bind(ad::Tape& tape) const {
  return Gmm{tape.param(weight_logits_), tape.param(means_), tape.param(log_vars_)};
}

Gmm GmmPrior::constant() const {
  return Gmm{Tensor::constant(weight_logits_.shape, weight_logits_.value), Tensor::constant(means_.shape, means_.value),
             Tensor::constant(log_vars_.shape, log_vars_.value)};
}

std::vector<ad::Parameter*> GmmPrior::parameters() { return {&weight_logits_, &means_, &log_vars_}; }
std::vector<const ad::Parameter*> GmmPrior::parameters() const { return {&weight_logits_, &means_, &log_vars_}; }

std::vector<double> GmmPrior::weights() const {
  const auto lw = constant().log_weights().values();
  std::vector<double> w(lw.size());
  for (std::size_t k = 0; k < lw.size(); ++k) w[k] = std::exp(lw[k]);
  return w;
}

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("Categorical: negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) >= 1e-12) throw std::invalid_argument("Categorical: probabilities do not sum to 1");
}

double Categorical::entropy() const {
  double h = 0.0;
  for (double p : probs_)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace nalign::dist
