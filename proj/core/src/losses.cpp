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

#include "nalign/losses.hpp"

#include <cctype>
#include <cmath>

namespace nalign::losses {

namespace {

std::string normalize(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

void require_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1], got " + std::to_string(beta));
}

void require_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("noise variance must be positive, got " + std::to_string(sigma2));
}

void check_finite(const LossValue& v) {
  for (const auto& [name, value] : v.components)
    if (!std::isfinite(value)) throw LossError(name, value);
  if (!std::isfinite(v.total.item())) throw LossError("total", v.total.item());
}

Tensor rows_of(const Tensor& t, const std::vector<std::size_t>& idx) { return ad::gather_rows(t, idx); }

// Per-row terms of the variational objective, each {n, 1} in grouped order.
struct VariationalRows {
  Tensor recon;     // -log p(x | z, d)
  Tensor enc;       // log q(z | x, d)
  Tensor z;         // clean latents
  Tensor eps_noise; // matching noise rows
};

VariationalRows variational_rows(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec) {
  std::vector<Tensor> recon, encp, zs, noise;
  const auto groups = b.groups();
  for (std::size_t d = 0; d < groups.size(); ++d) {
    const auto& idx = groups[d];
    if (idx.empty()) continue;
    const Tensor x = rows_of(b.x, idx);
    const dist::DiagGaussian q = enc(tape, x, d);
    const Tensor z = dist::reparam_sample(q, rows_of(b.eps_z, idx));
    recon.push_back(-dist::gaussian_log_prob(x, dec.decode(tape, z, d)));
    encp.push_back(dist::gaussian_log_prob(z, q));
    zs.push_back(z);
    if (b.eps_noise.size() > 0) noise.push_back(rows_of(b.eps_noise, idx));
  }
  VariationalRows r{ad::concat(recon, 0), ad::concat(encp, 0), ad::concat(zs, 0), Tensor()};
  if (!noise.empty()) r.eps_noise = ad::concat(noise, 0);
  return r;
}

LossValue assemble_variational(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                               const dist::GmmPrior& prior, double beta, double sigma2) {
  b.validate(dec.config().latent_dim);
  const VariationalRows r = variational_rows(tape, b, enc, dec);
  Tensor z_prior = r.z;
  if (sigma2 > 0.0) {
    if (r.eps_noise.size() == 0) throw std::invalid_argument("noisy loss needs eps_noise in the batch");
    z_prior = r.z + r.eps_noise * std::sqrt(sigma2);
  }
  const Tensor recon = ad::mean(r.recon);
  const Tensor encp = ad::mean(r.enc);
  const Tensor priorp = ad::mean(dist::gmm_log_prob(z_prior, prior.bind(tape)));
  LossValue v{recon + (encp - priorp) * beta,
              {{"recon", recon.item()}, {"enc_logprob", encp.item()}, {"prior_logprob", priorp.item()}}};
  check_finite(v);
  return v;
}

LossValue assemble_flow(Tape& tape, const Batch& b, const models::FlowAligner& flow, const dist::GmmPrior& prior,
                        double sigma2) {
  b.validate(flow.config().dim);
  std::vector<Tensor> zs, dets, noise;
  const auto groups = b.groups();
  for (std::size_t d = 0; d < groups.size(); ++d) {
    const auto& idx = groups[d];
    if (idx.empty()) continue;
    const models::FlowOutput out = flow.forward(tape, rows_of(b.x, idx), d);
    zs.push_back(out.z);
    dets.push_back(out.log_det);
    if (sigma2 > 0.0) noise.push_back(rows_of(b.eps_noise, idx));
  }
  Tensor z = ad::concat(zs, 0);
  if (sigma2 > 0.0) {
    if (b.eps_noise.size() == 0) throw std::invalid_argument("noisy loss needs eps_noise in the batch");
    z = z + ad::concat(noise, 0) * std::sqrt(sigma2);
  }
  const Tensor log_det = ad::mean(ad::concat(dets, 0));
  const Tensor priorp = ad::mean(dist::gmm_log_prob(z, prior.bind(tape)));
  LossValue v{-log_det - priorp, {{"log_det", log_det.item()}, {"prior_logprob", priorp.item()}}};
  check_finite(v);
  return v;
}

}  // namespace

LossKind parse_loss_kind(const std::string& name) {
  const std::string n = normalize(name);
  if (n == "adv") return LossKind::kAdv;
  if (n == "aub") return LossKind::kAub;
  if (n == "naub") return LossKind::kNaub;
  if (n == "vaub") return LossKind::kVaub;
  if (n == "beta-vaub") return LossKind::kBetaVaub;
  if (n == "nvaub") return LossKind::kNvaub;
  if (n == "pnp") return LossKind::kPnp;
  throw std::invalid_argument("unknown loss kind '" + name + "'");
}

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kAdv: return "adv";
    case LossKind::kAub: return "aub";
    case LossKind::kNaub: return "naub";
    case LossKind::kVaub: return "vaub";
    case LossKind::kBetaVaub: return "beta-vaub";
    case LossKind::kNvaub: return "nvaub";
    case LossKind::kPnp: return "pnp";
  }
  return "unknown";
}

const std::vector<LossKind>& all_loss_kinds() {
  static const std::vector<LossKind> kinds{LossKind::kAdv,      LossKind::kAub,   LossKind::kNaub, LossKind::kVaub,
                                           LossKind::kBetaVaub, LossKind::kNvaub, LossKind::kPnp};
  return kinds;
}

double LossSpec::effective_beta() const {
  if (lambda_mi && beta == 1.0) return 1.0 / (1.0 + *lambda_mi);
  return beta;
}

void LossSpec::validate() const {
  require_beta(beta);
  if (lambda_mi) {
    if (!(*lambda_mi >= 0.0)) throw std::invalid_argument("lambda_mi must be >= 0");
    if (beta != 1.0 && std::abs(beta - 1.0 / (1.0 + *lambda_mi)) > 1e-12)
      throw std::invalid_argument("beta and lambda_mi disagree: beta must equal 1 / (1 + lambda_mi)");
  }
  if (!(sigma2_noise >= 0.0)) throw std::invalid_argument("sigma2_noise must be >= 0");
  if ((kind == LossKind::kNaub || kind == LossKind::kNvaub) && !(sigma2_noise > 0.0))
    throw std::invalid_argument(loss_kind_name(kind) + " needs sigma2_noise > 0");
  if (!(lambda_align >= 0.0)) throw std::invalid_argument("lambda_align must be >= 0");
}

std::vector<std::vector<std::size_t>> Batch::groups() const {
  std::vector<std::vector<std::size_t>> g(domains);
  for (std::size_t i = 0; i < d.size(); ++i) g[d[i]].push_back(i);
  return g;
}

void Batch::validate(std::size_t latent_dim) const {
  const std::size_t n = d.size();
  if (n == 0) throw std::invalid_argument("batch: empty");
  if (x.rank() != 2 || x.rows() != n)
    throw std::invalid_argument("batch: x shape " + ad::to_string(x.shape()) + " for " + std::to_string(n) + " labels");
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] >= domains) throw std::invalid_argument("batch: domain label " + std::to_string(d[i]) + " out of range");
  if (!y.empty() && y.size() != n) throw std::invalid_argument("batch: task labels do not match rows");
  for (double v : x.data())
    if (!std::isfinite(v)) throw std::invalid_argument("batch: non-finite input");
  const ad::Shape eps_shape{n, latent_dim};
  if (eps_z.size() > 0 && eps_z.shape() != eps_shape)
    throw std::invalid_argument("batch: eps_z shape " + ad::to_string(eps_z.shape()) + ", expected " +
                                ad::to_string(eps_shape));
  if (eps_noise.size() > 0 && eps_noise.shape() != eps_shape)
    throw std::invalid_argument("batch: eps_noise shape " + ad::to_string(eps_noise.shape()) + ", expected " +
                                ad::to_string(eps_shape));
}

LossError::LossError(const std::string& component, double value)
    : std::runtime_error("loss component '" + component + "' is non-finite (" + std::to_string(value) + ")"),
      component_(component) {}

double LossValue::component(const std::string& name) const {
  for (const auto& [n, v] : components)
    if (n == name) return v;
  throw std::out_of_range("no loss component '" + name + "'");
}

EncoderFn encoder_fn(const models::CondEncoder& enc) {
  return [&enc](Tape& tape, const Tensor& x, std::size_t d) { return enc.encode(tape, x, d); };
}

PnpEncoder::PnpEncoder(models::Mlp features, std::size_t nd, std::size_t hidden, std::size_t layers, Rng& rng,
                       bool domain_input)
    : g(std::move(features)), domains(nd), conditional(domain_input) {
  if (conditional && g.input_dim() <= nd)
    throw std::invalid_argument("pnp encoder: domain-conditioned features need input_dim > domains");
  const std::size_t x_dim = conditional ? g.input_dim() - nd : g.input_dim();
  sigma_head = models::Mlp("pnp.sigma", models::layer_dims(x_dim + nd, hidden, layers, g.output_dim()), rng);
}

Tensor PnpEncoder::features(Tape& tape, const Tensor& x, std::size_t d) const {
  if (!conditional) return g.forward(tape, x);
  return g.forward(tape, ad::concat({x, models::one_hot(std::vector<std::size_t>(x.rows(), d), domains)}, 1));
}

dist::DiagGaussian PnpEncoder::encode(Tape& tape, const Tensor& x, std::size_t d) const {
  if (d >= domains) throw std::out_of_range("pnp encode: unknown domain " + std::to_string(d));
  const Tensor code = models::one_hot(std::vector<std::size_t>(x.rows(), d), domains);
  return dist::DiagGaussian::make(features(tape, x, d), sigma_head.forward(tape, ad::concat({x, code}, 1)));
}

std::vector<ad::Parameter*> PnpEncoder::parameters() { return models::collect(g, sigma_head); }

std::vector<const ad::Parameter*> PnpEncoder::parameters() const {
  std::vector<const ad::Parameter*> out = g.parameters();
  for (const ad::Parameter* p : sigma_head.parameters()) out.push_back(p);
  return out;
}

EncoderFn encoder_fn(const PnpEncoder& enc) {
  return [&enc](Tape& tape, const Tensor& x, std::size_t d) { return enc.encode(tape, x, d); };
}

LossValue vaub_loss(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                    const dist::GmmPrior& prior) {
  return assemble_variational(tape, b, enc, dec, prior, 1.0, 0.0);
}

LossValue beta_vaub_loss(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                         const dist::GmmPrior& prior, double beta) {
  require_beta(beta);
  return assemble_variational(tape, b, enc, dec, prior, beta, 0.0);
}

LossValue nvaub_loss(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec,
                     const dist::GmmPrior& prior, double beta, double sigma2) {
  require_beta(beta);
  require_sigma2(sigma2);
  return assemble_variational(tape, b, enc, dec, prior, beta, sigma2);
}

LossValue aub_loss(Tape& tape, const Batch& b, const models::FlowAligner& flow, const dist::GmmPrior& prior) {
  return assemble_flow(tape, b, flow, prior, 0.0);
}

LossValue naub_loss(Tape& tape, const Batch& b, const models::FlowAligner& flow, const dist::GmmPrior& prior,
                    double sigma2) {
  require_sigma2(sigma2);
  return assemble_flow(tape, b, flow, prior, sigma2);
}

LossValue pnp_loss(Tape& tape, const Batch& b, const PnpEncoder& enc, const models::CondDecoder& dec,
                   const dist::GmmPrior& prior, double beta, double sigma2) {
  require_beta(beta);
  if (sigma2 != 0.0) require_sigma2(sigma2);
  return assemble_variational(tape, b, encoder_fn(enc), dec, prior, beta, sigma2);
}

AdversarialLosses adversarial_losses(Tape& tape, const Batch& b, const Tensor& z, const models::Discriminator& disc) {
  if (z.rank() != 2 || z.rows() != b.size())
    throw ad::ShapeError("adversarial_losses: latent shape " + ad::to_string(z.shape()) + " for " +
                         std::to_string(b.size()) + " rows");
  const Tensor code = models::one_hot(b.d, b.domains);
  const Tensor own = ad::sum(disc.log_probs(tape, z) * code, 1);
  const Tensor own_detached = ad::sum(disc.log_probs(tape, ad::detach(z)) * code, 1);
  return AdversarialLosses{-ad::mean(own_detached), ad::mean(own)};
}

AutoencoderTerms autoencoder_terms(Tape& tape, const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec) {
  b.validate(dec.config().latent_dim);
  const auto groups = b.groups();
  std::vector<Tensor> recon, zs(groups.size());
  for (std::size_t d = 0; d < groups.size(); ++d) {
    const auto& idx = groups[d];
    if (idx.empty()) continue;
    const Tensor x = rows_of(b.x, idx);
    zs[d] = dist::reparam_sample(enc(tape, x, d), rows_of(b.eps_z, idx));
    recon.push_back(-dist::gaussian_log_prob(x, dec.decode(tape, zs[d], d)));
  }
  const Tensor r = ad::mean(ad::concat(recon, 0));
  if (!std::isfinite(r.item())) throw LossError("recon", r.item());
  return AutoencoderTerms{r, scatter_groups(zs, groups, b.size())};
}

double mi_reconstruction_bound(const Batch& b, const EncoderFn& enc, const models::CondDecoder& dec) {
  b.validate(dec.config().latent_dim);
  Tape tape;
  return -ad::mean(variational_rows(tape, b, enc, dec).recon).item();
}

Tensor scatter_groups(const std::vector<Tensor>& parts, const std::vector<std::vector<std::size_t>>& groups,
                      std::size_t n) {
  std::vector<Tensor> nonempty;
  std::vector<std::size_t> position(n);
  std::size_t offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    nonempty.push_back(parts[g]);
    for (std::size_t k = 0; k < groups[g].size(); ++k) position[groups[g][k]] = offset + k;
    offset += groups[g].size();
  }
  if (offset != n) throw std::invalid_argument("scatter_groups: groups do not cover the batch");
  return ad::gather_rows(ad::concat(nonempty, 0), position);
}

namespace {

template <class F>
Tensor per_group(const Batch& b, F&& f) {
  const auto groups = b.groups();
  std::vector<Tensor> parts(groups.size());
  for (std::size_t d = 0; d < groups.size(); ++d)
    if (!groups[d].empty()) parts[d] = f(groups[d], d);
  return scatter_groups(parts, groups, b.size());
}

}  // namespace

Tensor sample_latents(Tape& tape, const Batch& b, const EncoderFn& enc) {
  return per_group(b, [&](const std::vector<std::size_t>& idx, std::size_t d) {
    return dist::reparam_sample(enc(tape, rows_of(b.x, idx), d), rows_of(b.eps_z, idx));
  });
}

Tensor latent_means(Tape& tape, const Batch& b, const EncoderFn& enc) {
  return per_group(b, [&](const std::vector<std::size_t>& idx, std::size_t d) {
    return enc(tape, rows_of(b.x, idx), d).mean;
  });
}

Tensor flow_latents(Tape& tape, const Batch& b, const models::FlowAligner& flow) {
  return per_group(b, [&](const std::vector<std::size_t>& idx, std::size_t d) {
    return flow.forward(tape, rows_of(b.x, idx), d).z;
  });
}

}  // namespace nalign::losses
