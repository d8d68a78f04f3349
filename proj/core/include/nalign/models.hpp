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
#include <string>
#include <vector>

#include "nalign/autodiff.hpp"
#include "nalign/distributions.hpp"
#include "nalign/random.hpp"

namespace nalign::models {

using ad::Parameter;
using ad::Tape;
using ad::Tensor;

/// Fully connected network: tanh on hidden layers, linear output.
class Mlp {
 public:
  Mlp() = default;
  /// `dims` = {in, hidden..., out}. Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  Mlp(const std::string& name, std::vector<std::size_t> dims, Rng& rng);

  /// x: {n, in} -> {n, out}.
  Tensor forward(Tape& tape, const Tensor& x) const;

  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Zeroes the last layer so the network outputs exactly 0.
  void zero_output();
  void zero_all();

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

/// Hidden widths for a network with `layers` fully connected layers.
std::vector<std::size_t> layer_dims(std::size_t in, std::size_t hidden, std::size_t layers, std::size_t out);

struct EncoderConfig {
  std::size_t input_dim = 2;
  std::size_t latent_dim = 1;
  std::size_t hidden = 20;
  std::size_t layers = 3;
  std::size_t domains = 2;
  /// One trunk for all domains: q(z|x,d) = q(z|x).
  bool shared = false;
  /// mean = x + network(x); needs input_dim == latent_dim.
  bool skip = false;
};

/// Domain-conditional Gaussian encoder q(z | x, d).
class CondEncoder {
 public:
  CondEncoder() = default;
  CondEncoder(const EncoderConfig& cfg, Rng& rng);

  /// x: {n, input_dim}, all rows from domain d.
  dist::DiagGaussian encode(Tape& tape, const Tensor& x, std::size_t d) const;

  const EncoderConfig& config() const { return cfg_; }
  Mlp& trunk(std::size_t d) { return trunks_[cfg_.shared ? 0 : d]; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  EncoderConfig cfg_;
  std::vector<Mlp> trunks_;
};

struct DecoderConfig {
  std::size_t latent_dim = 1;
  std::size_t output_dim = 2;
  std::size_t hidden = 20;
  std::size_t layers = 3;
  std::size_t domains = 2;
  /// Per-domain learned log-variance vector instead of an input-dependent head.
  bool constant_log_var = false;
  /// mean = z + network(z); needs latent_dim == output_dim.
  bool skip = false;
};

/// Domain-conditional Gaussian decoder p(x | z, d). Always one network per domain.
class CondDecoder {
 public:
  CondDecoder() = default;
  CondDecoder(const DecoderConfig& cfg, Rng& rng);

  dist::DiagGaussian decode(Tape& tape, const Tensor& z, std::size_t d) const;

  const DecoderConfig& config() const { return cfg_; }
  Mlp& network(std::size_t d) { return nets_[d]; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  DecoderConfig cfg_;
  std::vector<Mlp> nets_;
  std::vector<Parameter> log_vars_;
};

struct FlowConfig {
  std::size_t dim = 1;
  std::size_t domains = 2;
  /// Affine blocks; for dim >= 2 an additive coupling follows every affine block but the last.
  std::size_t blocks = 3;
  std::size_t hidden = 16;
};

struct FlowOutput {
  Tensor z;
  /// Row-wise log |det J|, shape {n, 1}.
  Tensor log_det;
};

/// Per-domain invertible aligner built from elementwise affine maps
/// (z = exp(a) * x + t) and additive coupling layers. Starts as the identity.
class FlowAligner {
 public:
  FlowAligner() = default;
  FlowAligner(const FlowConfig& cfg, Rng& rng);

  FlowOutput forward(Tape& tape, const Tensor& x, std::size_t d) const;
  /// Exact inverse on plain values.
  Tensor inverse(const Tensor& z, std::size_t d) const;

  /// Random non-identity parameters, for tests and demos.
  void randomize(Rng& rng, double scale = 0.5);

  /// Single affine parameters of block b (log-scale a and shift t), each {1, dim}.
  Parameter& log_scale(std::size_t d, std::size_t b) { return domains_[d].log_scales[b]; }
  Parameter& shift(std::size_t d, std::size_t b) { return domains_[d].shifts[b]; }

  const FlowConfig& config() const { return cfg_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  struct DomainFlow {
    std::vector<Parameter> log_scales;
    std::vector<Parameter> shifts;
    std::vector<Mlp> couplings;
  };
  Tensor couple(Tape& tape, const Tensor& x, const Mlp& net, std::size_t index, bool inverse) const;

  FlowConfig cfg_;
  std::vector<DomainFlow> domains_;
};

struct DiscriminatorConfig {
  std::size_t latent_dim = 1;
  std::size_t hidden = 20;
  std::size_t layers = 3;
  std::size_t domains = 2;
};

/// Probabilistic domain classifier f(d | z).
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const DiscriminatorConfig& cfg, Rng& rng);

  Tensor logits(Tape& tape, const Tensor& z) const;
  /// Row-wise log-softmax, {n, domains}.
  Tensor log_probs(Tape& tape, const Tensor& z) const;
  /// Row-wise softmax, {n, domains}.
  Tensor discriminate(Tape& tape, const Tensor& z) const;

  Mlp& network() { return net_; }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  DiscriminatorConfig cfg_;
  Mlp net_;
};

/// {n, 1} column repeated into {n, cols}.
Tensor repeat_cols(const Tensor& column, std::size_t cols);
/// Row-wise log-softmax of {n, k} logits.
Tensor log_softmax_rows(const Tensor& logits);
/// {n, k} one-hot rows for the given labels.
Tensor one_hot(const std::vector<std::size_t>& labels, std::size_t classes);

template <class... Models>
std::vector<Parameter*> collect(Models&... ms) {
  std::vector<Parameter*> out;
  (
      [&](auto& m) {
        for (Parameter* p : m.parameters()) out.push_back(p);
      }(ms),
      ...);
  return out;
}

}  // namespace nalign::models
