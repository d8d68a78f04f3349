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

#include "nalign/models.hpp"

#include <cmath>
#include <stdexcept>

namespace nalign::models {

std::vector<std::size_t> layer_dims(std::size_t in, std::size_t hidden, std::size_t layers, std::size_t out) {
  if (layers == 0) throw std::invalid_argument("layer_dims: need at least one layer");
  std::vector<std::size_t> dims{in};
  for (std::size_t i = 0; i + 1 < layers; ++i) dims.push_back(hidden);
  dims.push_back(out);
  return dims;
}

Tensor repeat_cols(const Tensor& column, std::size_t cols) {
  return ad::matmul(column, Tensor::full({1, cols}, 1.0));
}

Tensor log_softmax_rows(const Tensor& logits) {
  return logits - repeat_cols(ad::logsumexp(logits, 1), logits.cols());
}

Tensor one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  std::vector<double> v(labels.size() * classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw std::out_of_range("one_hot: label " + std::to_string(labels[i]) + " out of range");
    v[i * classes + labels[i]] = 1.0;
  }
  return Tensor::constant({labels.size(), classes}, std::move(v));
}

// --- Mlp ---------------------------------------------------------------------

Mlp::Mlp(const std::string& name, std::vector<std::size_t> dims, Rng& rng) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp: need input and output dims");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t in = dims_[l], out = dims_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Parameter w(name + ".w" + std::to_string(l), {in, out});
    for (double& v : w.value) v = rng.uniform(-bound, bound);
    weights_.push_back(std::move(w));
    biases_.emplace_back(name + ".b" + std::to_string(l), ad::Shape{1, out});
  }
}

Tensor Mlp::forward(Tape& tape, const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != input_dim())
    throw ad::ShapeError("Mlp: input shape " + ad::to_string(x.shape()) + " for input dim " + std::to_string(input_dim()));
  Tensor h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ad::matmul(h, tape.param(weights_[l])) + ad::repeat_rows(tape.param(biases_[l]), h.rows());
    if (l + 1 < weights_.size()) h = ad::tanh(h);
  }
  return h;
}

void Mlp::zero_output() {
  for (double& v : weights_.back().value) v = 0.0;
  for (double& v : biases_.back().value) v = 0.0;
}

void Mlp::zero_all() {
  for (auto& w : weights_)
    for (double& v : w.value) v = 0.0;
  for (auto& b : biases_)
    for (double& v : b.value) v = 0.0;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Parameter*> Mlp::parameters() const {
  std::vector<const Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

// --- CondEncoder -------------------------------------------------------------

CondEncoder::CondEncoder(const EncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.skip && cfg.input_dim != cfg.latent_dim)
    throw std::invalid_argument("CondEncoder: skip connection needs input_dim == latent_dim");
  const std::size_t n = cfg.shared ? 1 : cfg.domains;
  for (std::size_t d = 0; d < n; ++d)
    trunks_.emplace_back("encoder" + std::to_string(d),
                         layer_dims(cfg.input_dim, cfg.hidden, cfg.layers, 2 * cfg.latent_dim), rng);
}

dist::DiagGaussian CondEncoder::encode(Tape& tape, const Tensor& x, std::size_t d) const {
  if (d >= cfg_.domains) throw std::out_of_range("encode: unknown domain " + std::to_string(d));
  const Tensor out = trunks_[cfg_.shared ? 0 : d].forward(tape, x);
  Tensor mean = ad::slice_cols(out, 0, cfg_.latent_dim);
  if (cfg_.skip) mean = mean + x;
  return dist::DiagGaussian::make(mean, ad::slice_cols(out, cfg_.latent_dim, 2 * cfg_.latent_dim));
}

std::vector<Parameter*> CondEncoder::parameters() {
  std::vector<Parameter*> out;
  for (auto& t : trunks_)
    for (Parameter* p : t.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> CondEncoder::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& t : trunks_)
    for (const Parameter* p : t.parameters()) out.push_back(p);
  return out;
}

// --- CondDecoder -------------------------------------------------------------

CondDecoder::CondDecoder(const DecoderConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.skip && cfg.latent_dim != cfg.output_dim)
    throw std::invalid_argument("CondDecoder: skip connection needs latent_dim == output_dim");
  const std::size_t head = cfg.constant_log_var ? cfg.output_dim : 2 * cfg.output_dim;
  for (std::size_t d = 0; d < cfg.domains; ++d) {
    nets_.emplace_back("decoder" + std::to_string(d), layer_dims(cfg.latent_dim, cfg.hidden, cfg.layers, head), rng);
    if (cfg.constant_log_var)
      log_vars_.emplace_back("decoder" + std::to_string(d) + ".log_var", ad::Shape{1, cfg.output_dim});
  }
}

dist::DiagGaussian CondDecoder::decode(Tape& tape, const Tensor& z, std::size_t d) const {
  if (d >= cfg_.domains) throw std::out_of_range("decode: unknown domain " + std::to_string(d));
  const Tensor out = nets_[d].forward(tape, z);
  Tensor mean = ad::slice_cols(out, 0, cfg_.output_dim);
  if (cfg_.skip) mean = mean + z;
  Tensor log_var = cfg_.constant_log_var ? ad::repeat_rows(tape.param(log_vars_[d]), z.rows())
                                         : ad::slice_cols(out, cfg_.output_dim, 2 * cfg_.output_dim);
  return dist::DiagGaussian::make(mean, log_var);
}

std::vector<Parameter*> CondDecoder::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t d = 0; d < nets_.size(); ++d) {
    for (Parameter* p : nets_[d].parameters()) out.push_back(p);
    if (cfg_.constant_log_var) out.push_back(&log_vars_[d]);
  }
  return out;
}

std::vector<const Parameter*> CondDecoder::parameters() const {
  std::vector<const Parameter*> out;
  for (std::size_t d = 0; d < nets_.size(); ++d) {
    for (const Parameter* p : nets_[d].parameters()) out.push_back(p);
    if (cfg_.constant_log_var) out.push_back(&log_vars_[d]);
  }
  return out;
}

// --- FlowAligner -------------------------------------------------------------

namespace {

struct Split {
  std::size_t cond_begin, cond_end, other_begin, other_end;
};

// Even-indexed couplings condition the second half on the first; odd ones swap.
Split coupling_split(std::size_t dim, std::size_t index) {
  const std::size_t h = dim / 2;
  if (index % 2 == 0) return {0, h, h, dim};
  return {h, dim, 0, h};
}

}  // namespace

FlowAligner::FlowAligner(const FlowConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.dim == 0 || cfg.blocks == 0) throw std::invalid_argument("FlowAligner: empty flow");
  for (std::size_t d = 0; d < cfg.domains; ++d) {
    DomainFlow f;
    const std::string base = "flow" + std::to_string(d);
    for (std::size_t b = 0; b < cfg.blocks; ++b) {
      f.log_scales.emplace_back(base + ".a" + std::to_string(b), ad::Shape{1, cfg.dim});
      f.shifts.emplace_back(base + ".t" + std::to_string(b), ad::Shape{1, cfg.dim});
      if (cfg.dim >= 2 && b + 1 < cfg.blocks) {
        const Split s = coupling_split(cfg.dim, b);
        Mlp net(base + ".c" + std::to_string(b),
                {s.cond_end - s.cond_begin, cfg.hidden, s.other_end - s.other_begin}, rng);
        net.zero_output();
        f.couplings.push_back(std::move(net));
      }
    }
    domains_.push_back(std::move(f));
  }
}

Tensor FlowAligner::couple(Tape& tape, const Tensor& x, const Mlp& net, std::size_t index, bool inverse) const {
  const Split s = coupling_split(cfg_.dim, index);
  const Tensor cond = ad::slice_cols(x, s.cond_begin, s.cond_end);
  const Tensor other = ad::slice_cols(x, s.other_begin, s.other_end);
  const Tensor shift = net.forward(tape, cond);
  const Tensor moved = inverse ? other - shift : other + shift;
  return index % 2 == 0 ? ad::concat({cond, moved}, 1) : ad::concat({moved, cond}, 1);
}

FlowOutput FlowAligner::forward(Tape& tape, const Tensor& x, std::size_t d) const {
  if (d >= cfg_.domains) throw std::out_of_range("flow_forward: unknown domain " + std::to_string(d));
  if (x.rank() != 2 || x.cols() != cfg_.dim)
    throw ad::ShapeError("flow_forward: input shape " + ad::to_string(x.shape()) + " for flow dim " +
                         std::to_string(cfg_.dim));
  const DomainFlow& f = domains_[d];
  const std::size_t n = x.rows();
  Tensor z = x;
  Tensor log_det_row = Tensor::zeros({1, 1});
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    const Tensor a = tape.param(f.log_scales[b]);
    z = z * ad::exp(ad::repeat_rows(a, n)) + ad::repeat_rows(tape.param(f.shifts[b]), n);
    log_det_row = log_det_row + ad::sum(a, 1);
    if (b < f.couplings.size()) z = couple(tape, z, f.couplings[b], b, false);
  }
  return FlowOutput{z, ad::repeat_rows(log_det_row, n)};
}

Tensor FlowAligner::inverse(const Tensor& z, std::size_t d) const {
  if (d >= cfg_.domains) throw std::out_of_range("flow_inverse: unknown domain " + std::to_string(d));
  const DomainFlow& f = domains_[d];
  const std::size_t n = z.rows();
  Tape scratch;
  Tensor x = ad::detach(z);
  for (std::size_t b = cfg_.blocks; b-- > 0;) {
    if (b < f.couplings.size()) x = ad::detach(couple(scratch, x, f.couplings[b], b, true));
    const Tensor a = Tensor::constant(f.log_scales[b].shape, f.log_scales[b].value);
    const Tensor t = Tensor::constant(f.shifts[b].shape, f.shifts[b].value);
    x = (x - ad::repeat_rows(t, n)) * ad::exp(ad::repeat_rows(-a, n));
  }
  return x;
}

void FlowAligner::randomize(Rng& rng, double scale) {
  for (auto& f : domains_) {
    for (auto& a : f.log_scales)
      for (double& v : a.value) v = rng.uniform(-scale, scale);
    for (auto& t : f.shifts)
      for (double& v : t.value) v = rng.uniform(-scale, scale);
    for (auto& c : f.couplings)
      for (Parameter* p : c.parameters())
        for (double& v : p->value) v = rng.uniform(-scale, scale);
  }
}

std::vector<Parameter*> FlowAligner::parameters() {
  std::vector<Parameter*> out;
  for (auto& f : domains_)
    for (std::size_t b = 0; b < cfg_.blocks; ++b) {
      out.push_back(&f.log_scales[b]);
      out.push_back(&f.shifts[b]);
      if (b < f.couplings.size())
        for (Parameter* p : f.couplings[b].parameters()) out.push_back(p);
    }
  return out;
}

std::vector<const Parameter*> FlowAligner::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& f : domains_)
    for (std::size_t b = 0; b < cfg_.blocks; ++b) {
      out.push_back(&f.log_scales[b]);
      out.push_back(&f.shifts[b]);
      if (b < f.couplings.size())
        for (const Parameter* p : f.couplings[b].parameters()) out.push_back(p);
    }
  return out;
}

// --- Discriminator -----------------------------------------------------------

Discriminator::Discriminator(const DiscriminatorConfig& cfg, Rng& rng)
    : cfg_(cfg), net_("disc", layer_dims(cfg.latent_dim, cfg.hidden, cfg.layers, cfg.domains), rng) {}

Tensor Discriminator::logits(Tape& tape, const Tensor& z) const { return net_.forward(tape, z); }

Tensor Discriminator::log_probs(Tape& tape, const Tensor& z) const { return log_softmax_rows(logits(tape, z)); }

Tensor Discriminator::discriminate(Tape& tape, const Tensor& z) const { return ad::exp(log_probs(tape, z)); }

std::vector<Parameter*> Discriminator::parameters() { return net_.parameters(); }
std::vector<const Parameter*> Discriminator::parameters() const { return net_.parameters(); }

}  // namespace nalign::models
