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

// Experiment configuration, the shared training loop and the three drivers:
// rotated moons, the Gaussian plateau comparison and the plug-and-play
// domain-adaptation demo.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nalign/checkpoint.hpp"
#include "nalign/config.hpp"
#include "nalign/data.hpp"
#include "nalign/distributions.hpp"
#include "nalign/losses.hpp"
#include "nalign/models.hpp"
#include "nalign/optim.hpp"
#include "nalign/run_log.hpp"

namespace nalign::train {

enum class ExperimentKind { kMoons, kPlateau, kDa };
ExperimentKind parse_experiment_kind(const std::string& name);
std::string experiment_kind_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kMoons;
  std::uint64_t seed = 0;
  std::size_t epochs = 5000;
  /// 0 means full batch.
  std::size_t batch_size = 128;
  /// Metric record every `cadence` epochs, plus epoch 0 and the last epoch.
  std::size_t cadence = 100;
  /// Reparameterized samples per datum.
  std::size_t mc_samples = 1;
  std::size_t swd_projections = 1000;
  std::size_t histogram_bins = 50;
  /// Whitened latent SWD threshold tracked every epoch when track_every_epoch.
  double target_swd = 0.5;
  bool track_every_epoch = false;
  /// Loss above this (or non-finite) aborts the run.
  double divergence_threshold = 1e12;

  losses::LossSpec loss;

  std::size_t latent_dim = 1;
  std::size_t hidden = 20;
  std::size_t layers = 3;
  std::size_t prior_components = 10;
  double prior_init_scale = 1.0;
  /// Explicit initial prior means, components x latent_dim; overrides the random draw.
  std::vector<double> prior_means;
  bool shared_encoder = false;
  bool encoder_skip = false;
  bool decoder_skip = false;
  bool decoder_constant_log_var = false;
  std::size_t flow_blocks = 3;
  std::size_t flow_hidden = 16;
  std::size_t classifier_hidden = 20;
  /// DA feature map reads a one-hot domain code as well as x.
  bool domain_features = false;

  optim::AdamOptions adam;

  /// Moons and DA data.
  data::MoonsSpec moons;
  /// Plateau data: one domain per mean.
  std::size_t gaussian_n = 500;
  std::vector<double> gaussian_means{-20.0, 20.0};
  double gaussian_var = 1.0;

  /// Shipped defaults for each experiment.
  static ExperimentConfig defaults(ExperimentKind kind);
  /// Defaults of `experiment.kind`, overridden by every key present. Unknown keys throw.
  static ExperimentConfig from_config(const KeyValueConfig& kv);
  /// Every field, in a fixed order.
  KeyValueConfig to_config() const;
  nlohmann::json to_json() const;
  void validate() const;
};

/// Every model an alignment run may train. All are always constructed, in a
/// fixed order from the init stream, so runs that differ only in the loss
/// start from identical parameters.
struct AlignmentModels {
  models::CondEncoder encoder;
  models::CondDecoder decoder;
  dist::GmmPrior prior;
  models::FlowAligner flow;
  models::Discriminator discriminator;
  losses::LossKind kind = losses::LossKind::kVaub;

  static AlignmentModels build(const ExperimentConfig& cfg, std::size_t data_dim, std::size_t domains);

  bool uses_flow() const;
  /// Parameters updated by the main optimizer.
  std::vector<ad::Parameter*> trainable();
  std::vector<ad::Parameter*> discriminator_parameters();
  /// Everything the loss kind uses, for checkpoints.
  std::vector<const ad::Parameter*> saved() const;
  std::vector<ad::Parameter*> saved_mutable();
};

struct TrainResult {
  std::vector<MetricRecord> records;
  /// Epoch-mean training loss; element e - 1 is epoch e.
  std::vector<double> epoch_loss;
  /// Whitened latent SWD after every epoch (element 0 is the initialization) when tracked.
  std::vector<double> epoch_swd;
  /// First epoch with whitened latent SWD below target_swd (0 = at initialization).
  std::optional<std::size_t> reached_epoch;
  bool diverged = false;
  std::string divergence;
  std::size_t epochs_completed = 0;
};

/// Epoch loop for the alignment losses (all kinds except PnP). Metric records
/// go to `run` when given. Divergence restores the last good parameters.
TrainResult train_alignment(const ExperimentConfig& cfg, const data::Dataset& ds, AlignmentModels& m,
                            RunDirectory* run = nullptr);

/// Latents for every row: z ~ q(z | x, d) for encoders, the flow output otherwise.
Matrix encode_dataset(const AlignmentModels& m, const data::Dataset& ds, Rng& rng);

struct MoonsEvaluation {
  double latent_swd = 0.0;
  std::vector<double> recon_mse;
  /// flip_swd[j]: whitened SWD between points moved into domain j and domain j's data.
  std::vector<double> flip_swd;
  double histogram_jsd = 0.0;
  Matrix latents;
  Matrix reconstructions;
  Matrix flipped;

  bool passes(double swd_max = 0.15, double mse_max = 0.05, double flip_max = 0.3) const;
};
MoonsEvaluation evaluate_moons(const ExperimentConfig& cfg, const AlignmentModels& m, const data::Dataset& ds);

struct MoonsRun {
  ExperimentConfig config;
  TrainResult train;
  MoonsEvaluation eval;
};
MoonsRun run_moons(const ExperimentConfig& cfg, RunDirectory* run = nullptr);

struct PlateauRun {
  TrainResult vaub;
  TrainResult nvaub;
};
/// VAUB and NVAUB from identical initialization and budget. `cfg.loss` supplies sigma2.
PlateauRun run_plateau_compare(const ExperimentConfig& cfg, RunDirectory* run = nullptr);
data::Dataset plateau_data(const ExperimentConfig& cfg);

struct DaEvaluation {
  double source_accuracy = 0.0;
  double target_accuracy = 0.0;
  double latent_swd = 0.0;
  double dp_gap = 0.0;
};
struct DaRun {
  DaEvaluation aligned;
  DaEvaluation ablation;
  TrainResult aligned_train;
  TrainResult ablation_train;
};
/// Shared deterministic encoder + source classifier, trained with and
/// without the plug-and-play alignment term from the same initialization.
DaRun run_da(const ExperimentConfig& cfg, RunDirectory* run = nullptr);
/// One DA training run with the given alignment weight.
DaEvaluation train_da_once(const ExperimentConfig& cfg, double lambda_align, TrainResult* result,
                           RunDirectory* run = nullptr, const std::string& tag = "");

/// Configuration stored in a checkpoint written by one of the drivers.
ExperimentConfig config_from_checkpoint(const Checkpoint& ckpt);
/// Metrics of checkpointed models on `ds`: latent SWD, histogram JSD and
/// domain separability; reconstruction MSE and loss for alignment models;
/// accuracies and dp gap for DA models.
nlohmann::json evaluate_checkpoint(const Checkpoint& ckpt, const data::Dataset& ds);

/// Dataset of an experiment as configured.
data::Dataset experiment_data(const ExperimentConfig& cfg);

}  // namespace nalign::train
