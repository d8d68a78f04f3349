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

#include "nalign/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nalign/checkpoint.hpp"
#include "nalign/metrics.hpp"

namespace nalign::train {

using losses::LossKind;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Noise substream reserved for the epoch-0 loss evaluation.
constexpr std::uint64_t kInitialEvalStream = 0xFFFFFFFFull;

std::uint64_t epoch_stream(std::size_t epoch) { return static_cast<std::uint64_t>(epoch); }

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment.kind",        "experiment.seed",          "experiment.epochs",
      "experiment.batch_size",  "experiment.cadence",       "experiment.mc_samples",
      "experiment.swd_projections", "experiment.histogram_bins", "experiment.target_swd",
      "experiment.track_every_epoch", "experiment.divergence_threshold",
      "loss.kind",              "loss.beta",                "loss.lambda_mi",
      "loss.sigma2_noise",      "loss.lambda_align",
      "model.latent_dim",       "model.hidden",             "model.layers",
      "model.prior_components", "model.prior_init_scale",   "model.prior_means",
      "model.shared_encoder",   "model.encoder_skip",       "model.decoder_skip",
      "model.decoder_constant_log_var", "model.flow_blocks", "model.flow_hidden",
      "model.classifier_hidden", "model.domain_features",
      "optim.lr",               "optim.beta1",              "optim.beta2",
      "optim.eps",
      "data.n_per_domain",      "data.noise",               "data.theta",
      "data.sx",                "data.sy",                  "data.noise_after_transform",
      "data.gaussian_n",        "data.gaussian_means",      "data.gaussian_var"};
  return keys;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Rows `idx` repeated `mc` times, with fresh standard normals for every row.
losses::Batch make_batch(const data::Dataset& ds, const std::vector<std::size_t>& idx, std::size_t mc,
                         std::size_t latent_dim, Rng& eps) {
  losses::Batch b;
  b.domains = ds.domains();
  std::vector<double> x;
  x.reserve(idx.size() * mc * ds.dim());
  for (std::size_t r = 0; r < mc; ++r)
    for (std::size_t i : idx) {
      const auto row = ds.x.row(i);
      x.insert(x.end(), row.begin(), row.end());
      b.d.push_back(ds.d[i]);
      if (!ds.y.empty()) b.y.push_back(ds.y[i]);
    }
  const std::size_t n = b.d.size();
  b.x = ad::Tensor::constant({n, ds.dim()}, std::move(x));
  b.eps_z = ad::Tensor::constant({n, latent_dim}, eps.normals(n * latent_dim));
  b.eps_noise = ad::Tensor::constant({n, latent_dim}, eps.normals(n * latent_dim));
  return b;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

std::size_t latent_dim_of(const AlignmentModels& m, const ExperimentConfig& cfg, std::size_t data_dim) {
  return m.uses_flow() ? data_dim : cfg.latent_dim;
}

struct StepValue {
  ad::Tensor total;
  std::vector<std::pair<std::string, double>> components;
};

// Loss of the aligner for one batch. For the adversarial kind this is the
// aligner's objective against the current discriminator.
StepValue aligner_loss(ad::Tape& tape, const losses::Batch& b, const AlignmentModels& m,
                       const losses::LossSpec& spec) {
  const auto enc = losses::encoder_fn(m.encoder);
  const double beta = spec.effective_beta();
  losses::LossValue v;
  switch (spec.kind) {
    case LossKind::kVaub: v = losses::vaub_loss(tape, b, enc, m.decoder, m.prior); break;
    case LossKind::kBetaVaub: v = losses::beta_vaub_loss(tape, b, enc, m.decoder, m.prior, beta); break;
    case LossKind::kNvaub:
      v = losses::nvaub_loss(tape, b, enc, m.decoder, m.prior, beta, spec.sigma2_noise);
      break;
    case LossKind::kAub: v = losses::aub_loss(tape, b, m.flow, m.prior); break;
    case LossKind::kNaub: v = losses::naub_loss(tape, b, m.flow, m.prior, spec.sigma2_noise); break;
    case LossKind::kAdv: {
      const auto terms = losses::autoencoder_terms(tape, b, enc, m.decoder);
      const auto adv = losses::adversarial_losses(tape, b, terms.z, m.discriminator);
      StepValue s{terms.recon + adv.g_loss * spec.lambda_align,
                  {{"recon", terms.recon.item()}, {"d_loss", adv.d_loss.item()}}};
      if (!std::isfinite(s.total.item())) throw losses::LossError("total", s.total.item());
      return s;
    }
    case LossKind::kPnp: throw std::invalid_argument("pnp loss is trained by the domain-adaptation driver");
  }
  return StepValue{v.total, v.components};
}

struct EpochAccumulator {
  double loss = 0.0;
  std::vector<std::pair<std::string, double>> components;
  double rows = 0.0;

  void add(const StepValue& v, double n) {
    loss += v.total.item() * n;
    if (components.empty())
      for (const auto& [k, _] : v.components) components.emplace_back(k, 0.0);
    for (std::size_t i = 0; i < v.components.size(); ++i) components[i].second += v.components[i].second * n;
    rows += n;
  }
  StepValue mean() const {
    StepValue s{ad::Tensor::scalar(loss / rows), components};
    for (auto& [_, c] : s.components) c /= rows;
    return s;
  }
};

// Histogram counts of the first latent coordinate for each domain on shared bins.
void append_histogram(CsvTable& table, std::size_t epoch, const Matrix& z, const std::vector<std::size_t>& d,
                      std::size_t bins, std::size_t domains) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < z.rows; ++i) {
    lo = std::min(lo, z(i, 0));
    hi = std::max(hi, z(i, 0));
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double w = (hi - lo) / static_cast<double>(bins);
  std::vector<std::vector<double>> counts(domains, std::vector<double>(bins, 0.0));
  for (std::size_t i = 0; i < z.rows; ++i)
    counts[d[i]][std::min(bins - 1, static_cast<std::size_t>((z(i, 0) - lo) / w))] += 1.0;
  for (std::size_t k = 0; k < bins; ++k) {
    std::vector<double> row{static_cast<double>(epoch), lo + w * static_cast<double>(k),
                            lo + w * static_cast<double>(k + 1)};
    for (std::size_t dd = 0; dd < domains; ++dd) row.push_back(counts[dd][k]);
    table.add(std::move(row));
  }
}

metrics::SampleSet sample_set(const Matrix& z, const std::vector<std::size_t>& d) { return {z, d}; }

}  // namespace

// --- configuration -----------------------------------------------------------

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "moons") return ExperimentKind::kMoons;
  if (name == "plateau") return ExperimentKind::kPlateau;
  if (name == "da") return ExperimentKind::kDa;
  throw ConfigError("config: unknown experiment kind '" + name + "'");
}

std::string experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kMoons: return "moons";
    case ExperimentKind::kPlateau: return "plateau";
    case ExperimentKind::kDa: return "da";
  }
  return "unknown";
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::kMoons:
      c.loss.kind = LossKind::kBetaVaub;
      c.loss.beta = 0.1;
      c.epochs = 5000;
      c.batch_size = 128;
      c.cadence = 100;
      c.target_swd = 0.15;
      c.decoder_constant_log_var = true;
      break;
    case ExperimentKind::kPlateau:
      c.loss.kind = LossKind::kNvaub;
      c.loss.sigma2_noise = 100.0;
      c.epochs = 3000;
      c.batch_size = 0;
      c.cadence = 100;
      c.hidden = 10;
      c.prior_components = 2;
      c.prior_means = {-20.0, 20.0};
      c.prior_init_scale = 20.0;
      c.encoder_skip = true;
      c.decoder_skip = true;
      c.target_swd = 0.5;
      c.track_every_epoch = true;
      c.adam.lr = 1e-2;
      break;
    case ExperimentKind::kDa:
      c.loss.kind = LossKind::kPnp;
      c.loss.beta = 0.1;
      c.loss.lambda_align = 10.0;
      c.epochs = 300;
      c.batch_size = 128;
      c.cadence = 50;
      c.latent_dim = 2;
      c.hidden = 32;
      c.classifier_hidden = 16;
      c.domain_features = true;
      c.decoder_constant_log_var = true;
      c.target_swd = 0.15;
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
  for (const auto& [k, _] : kv.entries())
    if (!known_keys().count(k)) throw ConfigError("config: unknown key '" + k + "'");
  ExperimentConfig c = defaults(parse_experiment_kind(kv.get_string("experiment.kind", "moons")));
  c.seed = kv.get_size("experiment.seed", c.seed);
  c.epochs = kv.get_size("experiment.epochs", c.epochs);
  c.batch_size = kv.get_size("experiment.batch_size", c.batch_size);
  c.cadence = kv.get_size("experiment.cadence", c.cadence);
  c.mc_samples = kv.get_size("experiment.mc_samples", c.mc_samples);
  c.swd_projections = kv.get_size("experiment.swd_projections", c.swd_projections);
  c.histogram_bins = kv.get_size("experiment.histogram_bins", c.histogram_bins);
  c.target_swd = kv.get_double("experiment.target_swd", c.target_swd);
  c.track_every_epoch = kv.get_bool("experiment.track_every_epoch", c.track_every_epoch);
  c.divergence_threshold = kv.get_double("experiment.divergence_threshold", c.divergence_threshold);

  if (auto k = kv.get("loss.kind")) {
    try {
      c.loss.kind = losses::parse_loss_kind(*k);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  c.loss.beta = kv.get_double("loss.beta", c.loss.beta);
  if (kv.contains("loss.lambda_mi")) c.loss.lambda_mi = kv.get_double("loss.lambda_mi", 0.0);
  c.loss.sigma2_noise = kv.get_double("loss.sigma2_noise", c.loss.sigma2_noise);
  c.loss.lambda_align = kv.get_double("loss.lambda_align", c.loss.lambda_align);

  c.latent_dim = kv.get_size("model.latent_dim", c.latent_dim);
  c.hidden = kv.get_size("model.hidden", c.hidden);
  c.layers = kv.get_size("model.layers", c.layers);
  c.prior_components = kv.get_size("model.prior_components", c.prior_components);
  c.prior_init_scale = kv.get_double("model.prior_init_scale", c.prior_init_scale);
  if (kv.contains("model.prior_means")) {
    const std::string v = kv.get_string("model.prior_means", "");
    c.prior_means = v.empty() || v == "none" ? std::vector<double>{} : kv.get_doubles("model.prior_means", {});
  }
  c.shared_encoder = kv.get_bool("model.shared_encoder", c.shared_encoder);
  c.encoder_skip = kv.get_bool("model.encoder_skip", c.encoder_skip);
  c.decoder_skip = kv.get_bool("model.decoder_skip", c.decoder_skip);
  c.decoder_constant_log_var = kv.get_bool("model.decoder_constant_log_var", c.decoder_constant_log_var);
  c.flow_blocks = kv.get_size("model.flow_blocks", c.flow_blocks);
  c.flow_hidden = kv.get_size("model.flow_hidden", c.flow_hidden);
  c.classifier_hidden = kv.get_size("model.classifier_hidden", c.classifier_hidden);
  c.domain_features = kv.get_bool("model.domain_features", c.domain_features);

  c.adam.lr = kv.get_double("optim.lr", c.adam.lr);
  c.adam.beta1 = kv.get_double("optim.beta1", c.adam.beta1);
  c.adam.beta2 = kv.get_double("optim.beta2", c.adam.beta2);
  c.adam.eps = kv.get_double("optim.eps", c.adam.eps);

  c.moons.n_per_domain = kv.get_size("data.n_per_domain", c.moons.n_per_domain);
  c.moons.noise = kv.get_double("data.noise", c.moons.noise);
  c.moons.theta = kv.get_double("data.theta", c.moons.theta);
  c.moons.sx = kv.get_double("data.sx", c.moons.sx);
  c.moons.sy = kv.get_double("data.sy", c.moons.sy);
  c.moons.noise_after_transform = kv.get_bool("data.noise_after_transform", c.moons.noise_after_transform);
  c.gaussian_n = kv.get_size("data.gaussian_n", c.gaussian_n);
  c.gaussian_means = kv.get_doubles("data.gaussian_means", c.gaussian_means);
  c.gaussian_var = kv.get_double("data.gaussian_var", c.gaussian_var);
  c.validate();
  return c;
}

KeyValueConfig ExperimentConfig::to_config() const {
  KeyValueConfig kv;
  kv.set("experiment.kind", experiment_kind_name(experiment));
  kv.set("experiment.seed", std::to_string(seed));
  kv.set("experiment.epochs", std::to_string(epochs));
  kv.set("experiment.batch_size", std::to_string(batch_size));
  kv.set("experiment.cadence", std::to_string(cadence));
  kv.set("experiment.mc_samples", std::to_string(mc_samples));
  kv.set("experiment.swd_projections", std::to_string(swd_projections));
  kv.set("experiment.histogram_bins", std::to_string(histogram_bins));
  kv.set("experiment.target_swd", format_double(target_swd));
  kv.set("experiment.track_every_epoch", bool_str(track_every_epoch));
  kv.set("experiment.divergence_threshold", format_double(divergence_threshold));
  kv.set("loss.kind", losses::loss_kind_name(loss.kind));
  kv.set("loss.beta", format_double(loss.beta));
  if (loss.lambda_mi) kv.set("loss.lambda_mi", format_double(*loss.lambda_mi));
  kv.set("loss.sigma2_noise", format_double(loss.sigma2_noise));
  kv.set("loss.lambda_align", format_double(loss.lambda_align));
  kv.set("model.latent_dim", std::to_string(latent_dim));
  kv.set("model.hidden", std::to_string(hidden));
  kv.set("model.layers", std::to_string(layers));
  kv.set("model.prior_components", std::to_string(prior_components));
  kv.set("model.prior_init_scale", format_double(prior_init_scale));
  kv.set("model.prior_means", prior_means.empty() ? "none" : format_doubles(prior_means));
  kv.set("model.shared_encoder", bool_str(shared_encoder));
  kv.set("model.encoder_skip", bool_str(encoder_skip));
  kv.set("model.decoder_skip", bool_str(decoder_skip));
  kv.set("model.decoder_constant_log_var", bool_str(decoder_constant_log_var));
  kv.set("model.flow_blocks", std::to_string(flow_blocks));
  kv.set("model.flow_hidden", std::to_string(flow_hidden));
  kv.set("model.classifier_hidden", std::to_string(classifier_hidden));
  kv.set("model.domain_features", bool_str(domain_features));
  kv.set("optim.lr", format_double(adam.lr));
  kv.set("optim.beta1", format_double(adam.beta1));
  kv.set("optim.beta2", format_double(adam.beta2));
  kv.set("optim.eps", format_double(adam.eps));
  kv.set("data.n_per_domain", std::to_string(moons.n_per_domain));
  kv.set("data.noise", format_double(moons.noise));
  kv.set("data.theta", format_double(moons.theta));
  kv.set("data.sx", format_double(moons.sx));
  kv.set("data.sy", format_double(moons.sy));
  kv.set("data.noise_after_transform", bool_str(moons.noise_after_transform));
  kv.set("data.gaussian_n", std::to_string(gaussian_n));
  kv.set("data.gaussian_means", format_doubles(gaussian_means));
  kv.set("data.gaussian_var", format_double(gaussian_var));
  return kv;
}

json ExperimentConfig::to_json() const {
  json j = json::object();
  const KeyValueConfig kv = to_config();
  for (const auto& [k, v] : kv.entries()) j[k] = v;
  return j;
}

void ExperimentConfig::validate() const {
  try {
    loss.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cadence == 0) throw ConfigError("config: experiment.cadence must be >= 1");
  if (mc_samples == 0) throw ConfigError("config: experiment.mc_samples must be >= 1");
  if (swd_projections == 0) throw ConfigError("config: experiment.swd_projections must be >= 1");
  if (histogram_bins == 0) throw ConfigError("config: experiment.histogram_bins must be >= 1");
  if (latent_dim == 0 || hidden == 0 || layers == 0) throw ConfigError("config: model sizes must be >= 1");
  if (prior_components == 0) throw ConfigError("config: model.prior_components must be >= 1");
  if (!prior_means.empty() && prior_means.size() != prior_components * latent_dim)
    throw ConfigError("config: model.prior_means needs prior_components x latent_dim values");
  if (!(adam.lr > 0.0)) throw ConfigError("config: optim.lr must be positive");
  if (moons.n_per_domain == 0 || moons.n_per_domain % 2 != 0)
    throw ConfigError("config: data.n_per_domain must be positive and even");
  if (!(divergence_threshold > 0.0)) throw ConfigError("config: experiment.divergence_threshold must be positive");
}

// --- models ------------------------------------------------------------------

AlignmentModels AlignmentModels::build(const ExperimentConfig& cfg, std::size_t data_dim, std::size_t domains) {
  Rng rng(cfg.seed, Stream::kInit);
  AlignmentModels m;
  m.kind = cfg.loss.kind;
  const bool flow = m.uses_flow();
  const std::size_t latent = flow ? data_dim : cfg.latent_dim;

  models::EncoderConfig ec;
  ec.input_dim = data_dim;
  ec.latent_dim = cfg.latent_dim;
  ec.hidden = cfg.hidden;
  ec.layers = cfg.layers;
  ec.domains = domains;
  ec.shared = cfg.shared_encoder;
  ec.skip = cfg.encoder_skip;
  m.encoder = models::CondEncoder(ec, rng);

  models::DecoderConfig dc;
  dc.latent_dim = cfg.latent_dim;
  dc.output_dim = data_dim;
  dc.hidden = cfg.hidden;
  dc.layers = cfg.layers;
  dc.domains = domains;
  dc.constant_log_var = cfg.decoder_constant_log_var;
  dc.skip = cfg.decoder_skip;
  m.decoder = models::CondDecoder(dc, rng);

  m.prior = dist::GmmPrior(cfg.prior_components, latent, cfg.prior_init_scale, rng);
  if (!cfg.prior_means.empty()) {
    if (cfg.prior_means.size() != m.prior.means().size())
      throw ConfigError("config: model.prior_means does not match the prior shape");
    m.prior.means().value = cfg.prior_means;
  }

  models::FlowConfig fc;
  fc.dim = data_dim;
  fc.domains = domains;
  fc.blocks = cfg.flow_blocks;
  fc.hidden = cfg.flow_hidden;
  m.flow = models::FlowAligner(fc, rng);

  models::DiscriminatorConfig disc;
  disc.latent_dim = cfg.latent_dim;
  disc.hidden = cfg.hidden;
  disc.layers = cfg.layers;
  disc.domains = domains;
  m.discriminator = models::Discriminator(disc, rng);
  return m;
}

bool AlignmentModels::uses_flow() const { return kind == LossKind::kAub || kind == LossKind::kNaub; }

std::vector<ad::Parameter*> AlignmentModels::trainable() {
  if (uses_flow()) return models::collect(flow, prior);
  if (kind == LossKind::kAdv) return models::collect(encoder, decoder);
  return models::collect(encoder, decoder, prior);
}

std::vector<ad::Parameter*> AlignmentModels::discriminator_parameters() { return discriminator.parameters(); }

std::vector<ad::Parameter*> AlignmentModels::saved_mutable() {
  auto out = trainable();
  if (kind == LossKind::kAdv)
    for (auto* p : discriminator.parameters()) out.push_back(p);
  return out;
}

std::vector<const ad::Parameter*> AlignmentModels::saved() const {
  return nalign::as_const(const_cast<AlignmentModels*>(this)->saved_mutable());
}

// --- data --------------------------------------------------------------------

data::Dataset plateau_data(const ExperimentConfig& cfg) {
  return data::make_gaussians(cfg.gaussian_n, cfg.gaussian_means, cfg.gaussian_var, cfg.seed);
}

data::Dataset experiment_data(const ExperimentConfig& cfg) {
  if (cfg.experiment == ExperimentKind::kPlateau) return plateau_data(cfg);
  return data::make_rotated_moons(cfg.moons, cfg.seed);
}

// --- training loop -------------------------------------------------------------

Matrix encode_dataset(const AlignmentModels& m, const data::Dataset& ds, Rng& rng) {
  const std::size_t latent = m.uses_flow() ? ds.dim() : m.encoder.config().latent_dim;
  const losses::Batch b = make_batch(ds, all_rows(ds.size()), 1, latent, rng);
  ad::Tape tape;
  const ad::Tensor z = m.uses_flow() ? losses::flow_latents(tape, b, m.flow)
                                     : losses::sample_latents(tape, b, losses::encoder_fn(m.encoder));
  return Matrix::from_tensor(z);
}

TrainResult train_alignment(const ExperimentConfig& cfg, const data::Dataset& ds, AlignmentModels& m,
                            RunDirectory* run) {
  cfg.validate();
  ds.validate();
  if (ds.domains() != 2) throw std::invalid_argument("train_alignment: expects exactly two domains");
  if (cfg.loss.kind == LossKind::kPnp) throw std::invalid_argument("pnp loss is trained by the DA driver");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = ds.size();
  const std::size_t latent = latent_dim_of(m, cfg, ds.dim());
  const bool adversarial = cfg.loss.kind == LossKind::kAdv;

  optim::Adam opt(m.trainable(), cfg.adam);
  optim::Adam disc_opt;
  if (adversarial) disc_opt = optim::Adam(m.discriminator_parameters(), cfg.adam);

  Rng shuffle(cfg.seed, Stream::kShuffle);
  Rng eps(cfg.seed, Stream::kEps);
  std::vector<std::size_t> order = all_rows(n);
  const std::size_t bs = cfg.batch_size == 0 || cfg.batch_size >= n ? n : cfg.batch_size;

  TrainResult result;
  CsvTable hist{{"epoch", "bin_lo", "bin_hi", "count_d0", "count_d1"}, {}};
  if (run) run->begin_metrics(cfg.to_json());

  auto latent_swd = [&](std::size_t epoch, Matrix* keep) {
    Rng r = Rng(cfg.seed, Stream::kMetrics).split(epoch_stream(epoch));
    Matrix z = encode_dataset(m, ds, r);
    const double s = metrics::whitened_swd(sample_set(z, ds.d), cfg.swd_projections, cfg.seed);
    if (keep) *keep = std::move(z);
    return s;
  };

  auto emit = [&](std::size_t epoch, const StepValue& v, double grad_norm) {
    MetricRecord rec;
    rec.epoch = epoch;
    rec.loss = v.total.item();
    rec.components = v.components;
    Matrix z;
    rec.swd_whitened = latent_swd(epoch, &z);
    const metrics::SampleSet s = sample_set(z, ds.d);
    rec.histogram_jsd = metrics::histogram_jsd(s.of_domain(0).column(0), s.of_domain(1).column(0), cfg.histogram_bins);
    rec.grad_norm = grad_norm;
    rec.wall_ms = elapsed_ms(start);
    if (run) {
      run->append(rec);
      append_histogram(hist, epoch, z, ds.d, cfg.histogram_bins, 2);
    }
    result.records.push_back(rec);
  };

  {
    Rng r(cfg.seed, Stream::kMetrics);
    Rng init_eps = r.split(kInitialEvalStream);
    ad::Tape tape;
    const StepValue v = aligner_loss(tape, make_batch(ds, order, cfg.mc_samples, latent, init_eps), m, cfg.loss);
    emit(0, v, 0.0);
    if (cfg.track_every_epoch) {
      result.epoch_swd.push_back(result.records.back().swd_whitened);
      if (result.epoch_swd.back() < cfg.target_swd) result.reached_epoch = 0;
    }
  }

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Checkpoint last_good = snapshot(m.saved());
    EpochAccumulator acc;
    double grad_norm = 0.0;
    shuffle.shuffle(order);
    try {
      for (std::size_t begin = 0; begin < n; begin += bs) {
        const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(n, begin + bs)));
        const losses::Batch b = make_batch(ds, idx, cfg.mc_samples, latent, eps);
        if (adversarial) {
          ad::Tape dtape;
          const auto terms = losses::autoencoder_terms(dtape, b, losses::encoder_fn(m.encoder), m.decoder);
          const auto adv = losses::adversarial_losses(dtape, b, terms.z, m.discriminator);
          dtape.backward(adv.d_loss);
          disc_opt.step(dtape);
        }
        ad::Tape tape;
        const StepValue v = aligner_loss(tape, b, m, cfg.loss);
        if (!(std::abs(v.total.item()) <= cfg.divergence_threshold))
          throw losses::LossError("total", v.total.item());
        tape.backward(v.total);
        grad_norm = opt.step(tape);
        acc.add(v, static_cast<double>(b.size()));
      }
    } catch (const losses::LossError& e) {
      result.diverged = true;
      result.divergence = "epoch " + std::to_string(epoch) + ": " + e.what();
    } catch (const optim::NonFiniteGradient& e) {
      result.diverged = true;
      result.divergence = "epoch " + std::to_string(epoch) + ": " + e.what();
    }
    if (result.diverged) {
      restore(last_good, m.saved_mutable());
      break;
    }
    result.epochs_completed = epoch;
    const StepValue mean = acc.mean();
    result.epoch_loss.push_back(mean.total.item());
    const bool tick = epoch % cfg.cadence == 0 || epoch == cfg.epochs;
    if (cfg.track_every_epoch) {
      const double s = tick ? std::numeric_limits<double>::quiet_NaN() : latent_swd(epoch, nullptr);
      if (tick) emit(epoch, mean, grad_norm);
      result.epoch_swd.push_back(tick ? result.records.back().swd_whitened : s);
      if (!result.reached_epoch && result.epoch_swd.back() < cfg.target_swd) result.reached_epoch = epoch;
    } else if (tick) {
      emit(epoch, mean, grad_norm);
    }
  }

  if (run) {
    run->write_config(cfg.to_config());
    save_checkpoint(run->path("checkpoint.final"), m.saved(), {{"config", cfg.to_json()}});
    CsvTable loss{{"epoch", "loss"}, {}};
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
      loss.add({static_cast<double>(e + 1), result.epoch_loss[e]});
    loss.save(run->curve("loss.csv"));
    hist.save(run->curve("latent_histograms.csv"));
    if (!result.epoch_swd.empty()) {
      CsvTable swd{{"epoch", "swd_whitened"}, {}};
      for (std::size_t e = 0; e < result.epoch_swd.size(); ++e) swd.add({static_cast<double>(e), result.epoch_swd[e]});
      swd.save(run->curve("swd.csv"));
    }
    json info = {{"epochs_completed", result.epochs_completed}, {"total_ms", elapsed_ms(start)}};
    if (result.diverged) info["divergence"] = result.divergence;
    run->write_run_info(info);
  }
  return result;
}

// --- moons ---------------------------------------------------------------------

bool MoonsEvaluation::passes(double swd_max, double mse_max, double flip_max) const {
  if (!(latent_swd < swd_max)) return false;
  for (double v : recon_mse)
    if (!(v < mse_max)) return false;
  for (double v : flip_swd)
    if (!(v < flip_max)) return false;
  return true;
}

MoonsEvaluation evaluate_moons(const ExperimentConfig& cfg, const AlignmentModels& m, const data::Dataset& ds) {
  const std::size_t nd = ds.domains();
  const std::uint64_t eval_stream = 0xE7A1ull;
  Rng rng = Rng(cfg.seed, Stream::kMetrics).split(eval_stream);
  MoonsEvaluation ev;
  ev.latents = encode_dataset(m, ds, rng);
  const metrics::SampleSet zs = sample_set(ev.latents, ds.d);
  ev.latent_swd = metrics::whitened_swd(zs, cfg.swd_projections, cfg.seed);
  ev.histogram_jsd =
      metrics::histogram_jsd(zs.of_domain(0).column(0), zs.of_domain(1).column(0), cfg.histogram_bins);

  const std::size_t dim = ds.dim();
  ev.reconstructions = Matrix(ds.size(), dim);
  ev.flipped = Matrix(ds.size(), dim);
  std::vector<double> sq(nd, 0.0), count(nd, 0.0);
  for (std::size_t d = 0; d < nd; ++d) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.d[i] == d) idx.push_back(i);
    const Matrix zd = ev.latents.select_rows(idx);
    const std::size_t other = (d + 1) % nd;
    Matrix recon, flip;
    if (m.uses_flow()) {
      recon = Matrix::from_tensor(m.flow.inverse(zd.tensor(), d));
      flip = Matrix::from_tensor(m.flow.inverse(zd.tensor(), other));
    } else {
      ad::Tape tape;
      recon = Matrix::from_tensor(m.decoder.decode(tape, zd.tensor(), d).mean);
      const dist::DiagGaussian g = m.decoder.decode(tape, zd.tensor(), other);
      const ad::Tensor eps = ad::Tensor::constant({idx.size(), dim}, rng.normals(idx.size() * dim));
      flip = Matrix::from_tensor(dist::reparam_sample(g, eps));
    }
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t j = 0; j < dim; ++j) {
        const double e = recon(k, j) - ds.x(idx[k], j);
        sq[d] += e * e;
        count[d] += 1.0;
        ev.reconstructions(idx[k], j) = recon(k, j);
        ev.flipped(idx[k], j) = flip(k, j);
      }
  }
  for (std::size_t d = 0; d < nd; ++d) ev.recon_mse.push_back(sq[d] / count[d]);

  // Points encoded from domain d and decoded as `other` against `other`'s data.
  ev.flip_swd.assign(nd, 0.0);
  for (std::size_t target = 0; target < nd; ++target) {
    std::vector<std::size_t> moved, real;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if ((ds.d[i] + 1) % nd == target) moved.push_back(i);
      if (ds.d[i] == target) real.push_back(i);
    }
    ev.flip_swd[target] = metrics::whitened_swd(ev.flipped.select_rows(moved), ds.x.select_rows(real),
                                                cfg.swd_projections, cfg.seed);
  }
  return ev;
}

MoonsRun run_moons(const ExperimentConfig& cfg, RunDirectory* run) {
  MoonsRun out;
  out.config = cfg;
  const data::Dataset ds = experiment_data(cfg);
  AlignmentModels m = AlignmentModels::build(cfg, ds.dim(), ds.domains());
  out.train = train_alignment(cfg, ds, m, run);
  out.eval = evaluate_moons(cfg, m, ds);
  if (run) {
    CsvTable lat{{"domain", "z0"}, {}};
    for (std::size_t j = 1; j < out.eval.latents.cols; ++j) lat.header.push_back("z" + std::to_string(j));
    CsvTable rec{{"domain", "x0", "x1", "recon0", "recon1"}, {}};
    CsvTable flip{{"source_domain", "x0", "x1", "flipped0", "flipped1"}, {}};
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::vector<double> row{static_cast<double>(ds.d[i])};
      for (std::size_t j = 0; j < out.eval.latents.cols; ++j) row.push_back(out.eval.latents(i, j));
      lat.add(row);
      rec.add({static_cast<double>(ds.d[i]), ds.x(i, 0), ds.x(i, 1), out.eval.reconstructions(i, 0),
               out.eval.reconstructions(i, 1)});
      flip.add({static_cast<double>(ds.d[i]), ds.x(i, 0), ds.x(i, 1), out.eval.flipped(i, 0), out.eval.flipped(i, 1)});
    }
    lat.save(run->curve("latents.csv"));
    rec.save(run->curve("reconstruction.csv"));
    flip.save(run->curve("flip.csv"));
    json summary = {{"latent_swd", out.eval.latent_swd},     {"recon_mse", out.eval.recon_mse},
                    {"flip_swd", out.eval.flip_swd},         {"histogram_jsd", out.eval.histogram_jsd},
                    {"epochs_completed", out.train.epochs_completed}, {"diverged", out.train.diverged},
                    {"passes", out.eval.passes()}};
    run->write_text("summary.json", summary.dump(2) + "\n");
  }
  return out;
}

// --- plateau -------------------------------------------------------------------

PlateauRun run_plateau_compare(const ExperimentConfig& cfg, RunDirectory* run) {
  const data::Dataset ds = plateau_data(cfg);
  PlateauRun out;
  ExperimentConfig vcfg = cfg, ncfg = cfg;
  vcfg.loss.kind = LossKind::kVaub;
  vcfg.loss.beta = 1.0;
  vcfg.loss.lambda_mi.reset();
  vcfg.loss.sigma2_noise = 0.0;
  ncfg.loss.kind = LossKind::kNvaub;
  ncfg.loss.beta = 1.0;
  ncfg.loss.lambda_mi.reset();
  if (!(ncfg.loss.sigma2_noise > 0.0)) ncfg.loss.sigma2_noise = 100.0;
  vcfg.track_every_epoch = ncfg.track_every_epoch = true;

  std::optional<RunDirectory> vrun, nrun;
  if (run) {
    vrun.emplace(run->root() / "vaub");
    nrun.emplace(run->root() / "nvaub");
  }
  AlignmentModels vm = AlignmentModels::build(vcfg, ds.dim(), ds.domains());
  out.vaub = train_alignment(vcfg, ds, vm, vrun ? &*vrun : nullptr);
  AlignmentModels nm = AlignmentModels::build(ncfg, ds.dim(), ds.domains());
  out.nvaub = train_alignment(ncfg, ds, nm, nrun ? &*nrun : nullptr);

  if (run) {
    run->write_config(cfg.to_config());
    CsvTable cmp{{"epoch", "loss_vaub", "loss_nvaub", "swd_vaub", "swd_nvaub"}, {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t rows = std::max(out.vaub.epoch_swd.size(), out.nvaub.epoch_swd.size());
    for (std::size_t e = 0; e < rows; ++e) {
      auto at = [&](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : nan; };
      cmp.add({static_cast<double>(e), e ? at(out.vaub.epoch_loss, e - 1) : nan,
               e ? at(out.nvaub.epoch_loss, e - 1) : nan, at(out.vaub.epoch_swd, e), at(out.nvaub.epoch_swd, e)});
    }
    cmp.save(run->curve("compare.csv"));
    auto reached = [](const TrainResult& r) { return r.reached_epoch ? json(*r.reached_epoch) : json(nullptr); };
    json summary = {{"budget", cfg.epochs},
                    {"target_swd", cfg.target_swd},
                    {"vaub_reached_epoch", reached(out.vaub)},
                    {"nvaub_reached_epoch", reached(out.nvaub)}};
    run->write_text("summary.json", summary.dump(2) + "\n");
  }
  return out;
}

// --- plug-and-play domain adaptation ------------------------------------------

namespace {

struct DaModels {
  losses::PnpEncoder encoder;  // encoder.g is the shared feature map
  models::Mlp classifier;
  models::CondDecoder decoder;
  dist::GmmPrior prior;

  static DaModels build(const ExperimentConfig& cfg, std::size_t data_dim) {
    Rng rng(cfg.seed, Stream::kInit);
    DaModels m;
    const std::size_t in = data_dim + (cfg.domain_features ? 2 : 0);
    models::Mlp g("features", models::layer_dims(in, cfg.hidden, cfg.layers, cfg.latent_dim), rng);
    m.classifier = models::Mlp("classifier", models::layer_dims(cfg.latent_dim, cfg.classifier_hidden, 2, 2), rng);
    m.encoder = losses::PnpEncoder(std::move(g), 2, cfg.hidden, 2, rng, cfg.domain_features);
    models::DecoderConfig dc;
    dc.latent_dim = cfg.latent_dim;
    dc.output_dim = data_dim;
    dc.hidden = cfg.hidden;
    dc.layers = cfg.layers;
    dc.domains = 2;
    dc.constant_log_var = cfg.decoder_constant_log_var;
    m.decoder = models::CondDecoder(dc, rng);
    m.prior = dist::GmmPrior(cfg.prior_components, cfg.latent_dim, cfg.prior_init_scale, rng);
    return m;
  }

  std::vector<ad::Parameter*> trainable(bool align) {
    if (!align) return models::collect(encoder.g, classifier);
    return models::collect(encoder.g, classifier, encoder.sigma_head, decoder, prior);
  }
};

ad::Tensor feature_rows(ad::Tape& tape, const DaModels& m, const ad::Tensor& x, const std::vector<std::size_t>& d) {
  if (!m.encoder.conditional) return m.encoder.g.forward(tape, x);
  return m.encoder.g.forward(tape, ad::concat({x, models::one_hot(d, m.encoder.domains)}, 1));
}

ad::Tensor class_log_probs(ad::Tape& tape, const DaModels& m, const ad::Tensor& x, const std::vector<std::size_t>& d) {
  return models::log_softmax_rows(m.classifier.forward(tape, feature_rows(tape, m, x, d)));
}

DaEvaluation evaluate_da(const ExperimentConfig& cfg, const DaModels& m, const data::Dataset& ds) {
  ad::Tape tape;
  const ad::Tensor lp = class_log_probs(tape, m, ds.x.tensor(), ds.d);
  const Matrix z = Matrix::from_tensor(feature_rows(tape, m, ds.x.tensor(), ds.d));
  std::vector<std::size_t> pred(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) pred[i] = lp(i, 1) > lp(i, 0) ? 1 : 0;
  std::vector<std::size_t> ps, ys, pt, yt;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.d[i] == 0 ? ps : pt).push_back(pred[i]);
    (ds.d[i] == 0 ? ys : yt).push_back(ds.y[i]);
  }
  DaEvaluation ev;
  ev.source_accuracy = metrics::accuracy(ps, ys);
  ev.target_accuracy = metrics::accuracy(pt, yt);
  ev.latent_swd = metrics::whitened_swd(sample_set(z, ds.d), cfg.swd_projections, cfg.seed);
  ev.dp_gap = metrics::dp_gap(pred, ds.d);
  return ev;
}

}  // namespace

DaEvaluation train_da_once(const ExperimentConfig& cfg, double lambda_align, TrainResult* result_out, RunDirectory* run,
                           const std::string& tag) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const data::Dataset ds = experiment_data(cfg);
  DaModels m = DaModels::build(cfg, ds.dim());
  const bool align = lambda_align > 0.0;
  optim::Adam opt(m.trainable(align), cfg.adam);
  Rng shuffle(cfg.seed, Stream::kShuffle);
  Rng eps(cfg.seed, Stream::kEps);
  const std::size_t n = ds.size();
  std::vector<std::size_t> order = all_rows(n);
  const std::size_t bs = cfg.batch_size == 0 || cfg.batch_size >= n ? n : cfg.batch_size;
  const double beta = cfg.loss.effective_beta();
  TrainResult result;
  ExperimentConfig logged = cfg;
  logged.loss.lambda_align = lambda_align;
  if (run) run->begin_metrics(logged.to_json());

  auto step_loss = [&](ad::Tape& tape, const losses::Batch& b) {
    std::vector<std::size_t> src;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b.d[i] == 0) src.push_back(i);
    StepValue v{ad::Tensor::scalar(0.0), {}};
    if (!src.empty()) {
      std::vector<std::size_t> ysrc;
      for (std::size_t i : src) ysrc.push_back(b.y[i]);
      const ad::Tensor lp = class_log_probs(tape, m, ad::gather_rows(b.x, src), std::vector<std::size_t>(src.size(), 0));
      const ad::Tensor ce = -ad::mean(ad::sum(lp * models::one_hot(ysrc, 2), 1));
      v.total = ce;
      v.components.emplace_back("task_ce", ce.item());
    } else {
      v.components.emplace_back("task_ce", 0.0);
    }
    if (align) {
      const losses::LossValue p = losses::pnp_loss(tape, b, m.encoder, m.decoder, m.prior, beta, cfg.loss.sigma2_noise);
      v.total = v.total + p.total * lambda_align;
      v.components.emplace_back("pnp", p.total.item());
    }
    return v;
  };

  auto emit = [&](std::size_t epoch, const StepValue& v, double gn) {
    const DaEvaluation ev = evaluate_da(cfg, m, ds);
    MetricRecord rec;
    rec.epoch = epoch;
    rec.loss = v.total.item();
    rec.components = v.components;
    rec.swd_whitened = ev.latent_swd;
    ad::Tape tape;
    const Matrix z = Matrix::from_tensor(feature_rows(tape, m, ds.x.tensor(), ds.d));
    const metrics::SampleSet s = sample_set(z, ds.d);
    rec.histogram_jsd = metrics::histogram_jsd(s.of_domain(0).column(0), s.of_domain(1).column(0), cfg.histogram_bins);
    rec.grad_norm = gn;
    rec.source_accuracy = ev.source_accuracy;
    rec.target_accuracy = ev.target_accuracy;
    rec.dp_gap = ev.dp_gap;
    rec.wall_ms = elapsed_ms(start);
    if (run) run->append(rec);
    result.records.push_back(rec);
  };

  {
    Rng init_eps = Rng(cfg.seed, Stream::kMetrics).split(kInitialEvalStream);
    ad::Tape tape;
    emit(0, step_loss(tape, make_batch(ds, order, 1, cfg.latent_dim, init_eps)), 0.0);
  }
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Checkpoint last_good = snapshot(nalign::as_const(m.trainable(true)));
    EpochAccumulator acc;
    double gn = 0.0;
    shuffle.shuffle(order);
    try {
      for (std::size_t begin = 0; begin < n; begin += bs) {
        const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(n, begin + bs)));
        const losses::Batch b = make_batch(ds, idx, cfg.mc_samples, cfg.latent_dim, eps);
        ad::Tape tape;
        const StepValue v = step_loss(tape, b);
        if (!(std::abs(v.total.item()) <= cfg.divergence_threshold)) throw losses::LossError("total", v.total.item());
        tape.backward(v.total);
        gn = opt.step(tape);
        acc.add(v, static_cast<double>(b.size()));
      }
    } catch (const losses::LossError& e) {
      result.diverged = true;
      result.divergence = "epoch " + std::to_string(epoch) + ": " + e.what();
    } catch (const optim::NonFiniteGradient& e) {
      result.diverged = true;
      result.divergence = "epoch " + std::to_string(epoch) + ": " + e.what();
    }
    if (result.diverged) {
      restore(last_good, m.trainable(true));
      break;
    }
    result.epochs_completed = epoch;
    const StepValue mean = acc.mean();
    result.epoch_loss.push_back(mean.total.item());
    if (epoch % cfg.cadence == 0 || epoch == cfg.epochs) emit(epoch, mean, gn);
  }
  const DaEvaluation ev = evaluate_da(cfg, m, ds);
  if (run) {
    save_checkpoint(run->path("checkpoint.final"), nalign::as_const(m.trainable(true)),
                    {{"config", logged.to_json()}, {"tag", tag}});
    CsvTable loss{{"epoch", "loss"}, {}};
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
      loss.add({static_cast<double>(e + 1), result.epoch_loss[e]});
    loss.save(run->curve("loss.csv"));
    run->write_config(logged.to_config());
    json info = {{"epochs_completed", result.epochs_completed}, {"total_ms", elapsed_ms(start)}};
    if (result.diverged) info["divergence"] = result.divergence;
    run->write_run_info(info);
  }
  if (result_out) *result_out = std::move(result);
  return ev;
}

DaRun run_da(const ExperimentConfig& cfg, RunDirectory* run) {
  DaRun out;
  std::optional<RunDirectory> arun, brun;
  if (run) {
    arun.emplace(run->root() / "aligned");
    brun.emplace(run->root() / "ablation");
  }
  const double lambda = cfg.loss.lambda_align > 0.0 ? cfg.loss.lambda_align : 1.0;
  out.aligned = train_da_once(cfg, lambda, &out.aligned_train, arun ? &*arun : nullptr, "aligned");
  out.ablation = train_da_once(cfg, 0.0, &out.ablation_train, brun ? &*brun : nullptr, "ablation");
  if (run) {
    run->write_config(cfg.to_config());
    auto to_json = [](const DaEvaluation& e) {
      return json{{"source_accuracy", e.source_accuracy},
                  {"target_accuracy", e.target_accuracy},
                  {"latent_swd", e.latent_swd},
                  {"dp_gap", e.dp_gap}};
    };
    json summary = {{"aligned", to_json(out.aligned)},
                    {"ablation", to_json(out.ablation)},
                    {"target_accuracy_gain", out.aligned.target_accuracy - out.ablation.target_accuracy}};
    run->write_text("summary.json", summary.dump(2) + "\n");
  }
  return out;
}

// --- checkpoint evaluation -------------------------------------------------------

ExperimentConfig config_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("config") || !ckpt.meta["config"].is_object())
    throw CheckpointError("checkpoint: meta has no config object");
  KeyValueConfig kv;
  for (const auto& [k, v] : ckpt.meta["config"].items()) {
    if (!v.is_string()) throw CheckpointError("checkpoint: config value of '" + k + "' is not a string");
    kv.set(k, v.get<std::string>());
  }
  return ExperimentConfig::from_config(kv);
}

json evaluate_checkpoint(const Checkpoint& ckpt, const data::Dataset& ds) {
  ds.validate();
  if (ds.domains() != 2) throw std::invalid_argument("eval: expects exactly two domains");
  const ExperimentConfig cfg = config_from_checkpoint(ckpt);
  const metrics::SeparabilityOptions sep;
  json out = {{"dataset", ds.name}, {"rows", ds.size()}};
  if (cfg.loss.kind == LossKind::kPnp) {
    if (ds.y.empty()) throw std::invalid_argument("eval: DA checkpoints need task labels");
    DaModels m = DaModels::build(cfg, ds.dim());
    restore(ckpt, m.trainable(true));
    const DaEvaluation ev = evaluate_da(cfg, m, ds);
    ad::Tape tape;
    const Matrix z = Matrix::from_tensor(feature_rows(tape, m, ds.x.tensor(), ds.d));
    out["source_accuracy"] = ev.source_accuracy;
    out["target_accuracy"] = ev.target_accuracy;
    out["dp_gap"] = ev.dp_gap;
    out["swd_whitened"] = ev.latent_swd;
    out["domain_separability"] = metrics::domain_separability(sample_set(z, ds.d), cfg.seed, sep);
    return out;
  }
  AlignmentModels m = AlignmentModels::build(cfg, ds.dim(), ds.domains());
  restore(ckpt, m.saved_mutable());
  Rng rng = Rng(cfg.seed, Stream::kMetrics).split(kInitialEvalStream);
  const Matrix z = encode_dataset(m, ds, rng);
  const metrics::SampleSet s = sample_set(z, ds.d);
  out["swd_whitened"] = metrics::whitened_swd(s, cfg.swd_projections, cfg.seed);
  out["histogram_jsd"] =
      metrics::histogram_jsd(s.of_domain(0).column(0), s.of_domain(1).column(0), cfg.histogram_bins);
  out["domain_separability"] = metrics::domain_separability(s, cfg.seed, sep);
  Rng eps = Rng(cfg.seed, Stream::kMetrics).split(kInitialEvalStream);
  ad::Tape tape;
  const StepValue v = aligner_loss(tape, make_batch(ds, all_rows(ds.size()), 1, latent_dim_of(m, cfg, ds.dim()), eps),
                                   m, cfg.loss);
  out["loss"] = v.total.item();
  if (!m.uses_flow()) {
    const MoonsEvaluation ev = evaluate_moons(cfg, m, ds);
    out["recon_mse"] = ev.recon_mse;
    out["flip_swd"] = ev.flip_swd;
  }
  return out;
}

}  // namespace nalign::train
