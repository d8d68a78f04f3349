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

// Alignment objectives over a minibatch.
//
// Every loss is the batch mean of a per-row term. Rows are grouped by domain
// so each group runs through its own conditional networks; all noise is
// supplied by the batch, which makes every loss a deterministic function of
// the parameters.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nalign/autodiff.hpp"
#include "nalign/distributions.hpp"
#include "nalign/models.hpp"

namespace nalign::losses {

using ad::Tape;
using ad::Tensor;

enum class LossKind { kAdv, kAub, kNaub, kVaub, kBetaVaub, kNvaub, kPnp };

/// Accepts "adv", "aub", "naub", "vaub", "beta-vaub", "nvaub", "pnp" (case-insensitive, '_' or '-').
LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);
const std::vector<LossKind>& all_loss_kinds();

struct LossSpec {
  LossKind kind = LossKind::kVaub;
  /// In (0, 1]. beta = 1 / (1 + lambda_mi).
  double beta = 1.0;
  std::optional<double> lambda_mi;
  /// Latent noise variance; > 0 for NAUB and NVAUB.
  double sigma2_noise = 0.0;
  /// Weight of the alignment term against a task loss.
  double lambda_align = 1.0;

  /// beta, or 1 / (1 + lambda_mi) when only lambda_mi was given.
  double effective_beta() const;
  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
};

struct Batch {
  Tensor x;                    // {n, dim}
  std::vector<std::size_t> d;  // n domain labels
  std::vector<std::size_t> y;  // optional task labels
  Tensor eps_z;                // {n, latent_dim} standard normals
  Tensor eps_noise;            // {n, latent_dim} standard normals
  std::size_t domains = 2;

  std::size_t size() const { return d.size(); }
  /// Row indices of each domain, in batch order.
  std::vector<std::vector<std::size_t>> groups() const;
  /// Throws std::invalid_argument on non-finite rows or mismatched shapes.
  void validate(std::size_t latent_dim) const;
};

/// Raised when a loss term is non-finite; names the diverging component.
class LossError : public std::runtime_error {
 public:
  LossError(const std::string& component, double value);
  const std::string& component() const { return component_; }

 private:
  std::string component_;
};

struct LossValue {
  Tensor total;
  /// Batch means of the named terms, in a fixed order.
  std::vector<std::pair<std::string, double>> components;

  double component(const std::string& name) const;
};

/// Conditional latent density q(z | x, d) for rows of a single domain.
using EncoderFn = std::function<dist::DiagGaussian(Tape&, const Tensor& x, std::size_t d)>;
EncoderFn encoder_fn(const models::CondEncoder& enc);

/// Plug-and-play encoder: deterministic features g(x) with a trainable
/// log-variance head over x concatenated with a one-hot domain code. When
/// `conditional`, g itself reads that code too, i.e. g(x | d).
struct PnpEncoder {
  models::Mlp g;
  models::Mlp sigma_head;
  std::size_t domains = 2;
  bool conditional = false;

  PnpEncoder() = default;
  /// A conditional g must take input_dim = data dim + domains.
  PnpEncoder(models::Mlp g, std::size_t domains, std::size_t hidden, std::size_t layers, Rng& rng,
             bool domain_input = false);

  /// The deterministic representation for rows of domain d.
  Tensor features(Tape& tape, const Tensor& x, std::size_t d) const;
  dist::DiagGaussian encode(Tape& tape, const Tensor& x, std::size_t d) const;
  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
};
EncoderFn encoder_fn(const PnpEncoder& enc);

LossValue vaub_loss(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                    const dist::GmmPrior& prior);
LossValue beta_vaub_loss(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                         const dist::GmmPrior& prior, double beta);
/// Prior evaluated at z + sqrt(sigma2) * eps_noise; the other terms use the clean z.
LossValue nvaub_loss(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                     const dist::GmmPrior& prior, double beta, double sigma2);
LossValue aub_loss(Tape& tape, const Batch& b, const models::FlowAligner& flow, const dist::GmmPrior& prior);
LossValue naub_loss(Tape& tape, const Batch& b, const models::FlowAligner& flow, const dist::GmmPrior& prior,
                    double sigma2);
/// sigma2 > 0 evaluates the prior at noisy latents, as in nvaub_loss.
LossValue pnp_loss(Tape& tape, const Batch& b, const PnpEncoder& enc, const models::CondDecoder& dec,
                   const dist::GmmPrior& prior, double beta, double sigma2 = 0.0);

struct AdversarialLosses {
  /// -mean log f_d(z) on detached latents.
  Tensor d_loss;
  /// +mean log f_d(z) through the aligner.
  Tensor g_loss;
};
/// z holds latents in batch row order.
AdversarialLosses adversarial_losses(Tape& tape, const Batch& b, const Tensor& z, const models::Discriminator& disc);

struct AutoencoderTerms {
  /// Batch mean of -log p(x | z, d).
  Tensor recon;
  /// Reparameterized latents in batch row order.
  Tensor z;
};
/// Reconstruction term and latents for aligners trained against a discriminator.
AutoencoderTerms autoencoder_terms(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec);

/// Batch mean of log p(x | z, d) with one reparameterized z per row.
double mi_reconstruction_bound(const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec);

/// Reparameterized latents in batch row order.
Tensor sample_latents(Tape& tape, const Batch& b, const EncoderFn& enc);
/// Encoder means in batch row order.
Tensor latent_means(Tape& tape, const Batch& b, const EncoderFn& enc);
/// Flow outputs in batch row order.
Tensor flow_latents(Tape& tape, const Batch& b, const models::FlowAligner& flow);

/// Per-row values of per-domain groups, reassembled into batch order.
Tensor scatter_groups(const std::vector<Tensor>& parts, const std::vector<std::vector<std::size_t>>& groups,
                      std::size_t n);

}  // namespace nalign::losses
