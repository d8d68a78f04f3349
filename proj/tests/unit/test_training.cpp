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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "nalign/experiments.hpp"

namespace {

using namespace nalign;
using train::ExperimentConfig;
using train::ExperimentKind;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nalign_train_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_moons(losses::LossKind kind, std::size_t epochs) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kMoons);
  c.loss.kind = kind;
  if (kind == losses::LossKind::kVaub || kind == losses::LossKind::kAub || kind == losses::LossKind::kAdv)
    c.loss.beta = 1.0;
  if (kind == losses::LossKind::kNvaub || kind == losses::LossKind::kNaub) c.loss.sigma2_noise = 1.0;
  c.epochs = epochs;
  c.cadence = 10;
  c.swd_projections = 50;
  c.moons.n_per_domain = 100;
  return c;
}

std::vector<std::vector<double>> values_of(std::vector<ad::Parameter*> ps) {
  std::vector<std::vector<double>> out;
  for (ad::Parameter* p : ps) out.push_back(p->value);
  return out;
}

TEST(TrainAlignment, ZeroEpochsKeepsInitialParameters) {
  const ExperimentConfig c = small_moons(losses::LossKind::kBetaVaub, 0);
  const data::Dataset ds = train::experiment_data(c);
  auto m = train::AlignmentModels::build(c, ds.dim(), 2);
  const auto before = values_of(m.saved_mutable());
  const train::TrainResult r = train::train_alignment(c, ds, m);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].epoch, 0u);
  EXPECT_TRUE(r.epoch_loss.empty());
  EXPECT_EQ(values_of(m.saved_mutable()), before);
}

TEST(TrainAlignment, CadenceRecords) {
  ExperimentConfig c = small_moons(losses::LossKind::kBetaVaub, 25);
  const data::Dataset ds = train::experiment_data(c);
  auto m = train::AlignmentModels::build(c, ds.dim(), 2);
  const train::TrainResult r = train::train_alignment(c, ds, m);
  std::vector<std::size_t> epochs;
  for (const auto& rec : r.records) epochs.push_back(rec.epoch);
  EXPECT_EQ(epochs, (std::vector<std::size_t>{0, 10, 20, 25}));
  EXPECT_EQ(r.epoch_loss.size(), 25u);
  EXPECT_EQ(r.epochs_completed, 25u);
}

TEST(TrainAlignment, SameSeedIsBitIdentical) {
  for (auto kind : {losses::LossKind::kBetaVaub, losses::LossKind::kAub, losses::LossKind::kAdv}) {
    const ExperimentConfig c = small_moons(kind, 12);
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    {
      RunDirectory ra(a), rb(b);
      train::run_moons(c, &ra);
      train::run_moons(c, &rb);
    }
    for (const char* f : {"metrics.ndjson", "config.ini", "checkpoint.final", "curves/loss.csv",
                          "curves/latent_histograms.csv", "summary.json", "curves/latents.csv", "curves/flip.csv"})
      EXPECT_EQ(slurp(a / f), slurp(b / f)) << losses::loss_kind_name(kind) << " " << f;
  }
}

TEST(TrainAlignment, SeedChangesTheRun) {
  ExperimentConfig c = small_moons(losses::LossKind::kBetaVaub, 3);
  const auto r0 = train::run_moons(c);
  c.seed = 1;
  const auto r1 = train::run_moons(c);
  EXPECT_NE(r0.train.epoch_loss, r1.train.epoch_loss);
}

TEST(TrainAlignment, DivergenceRestoresLastGoodParameters) {
  ExperimentConfig c = small_moons(losses::LossKind::kBetaVaub, 5);
  c.divergence_threshold = 1e-6;
  const data::Dataset ds = train::experiment_data(c);
  auto m = train::AlignmentModels::build(c, ds.dim(), 2);
  const auto before = values_of(m.saved_mutable());
  const train::TrainResult r = train::train_alignment(c, ds, m);
  EXPECT_TRUE(r.diverged);
  EXPECT_NE(r.divergence.find("epoch 1"), std::string::npos) << r.divergence;
  EXPECT_EQ(r.epochs_completed, 0u);
  EXPECT_EQ(values_of(m.saved_mutable()), before);
}

TEST(TrainAlignment, RunDirectoryLayoutAndSchema) {
  ExperimentConfig c = small_moons(losses::LossKind::kBetaVaub, 10);
  const fs::path dir = fresh_dir("layout");
  {
    RunDirectory run(dir);
    train::run_moons(c, &run);
  }
  for (const char* f : {"config.ini", "metrics.ndjson", "checkpoint.final", "run-info.json", "summary.json",
                        "curves/loss.csv", "curves/latent_histograms.csv", "curves/latents.csv",
                        "curves/reconstruction.csv", "curves/flip.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  std::ifstream in(dir / "metrics.ndjson");
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  const nlohmann::json header = nlohmann::json::parse(line);
  EXPECT_EQ(header["type"], "header");
  EXPECT_EQ(header["config"], c.to_json());
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    EXPECT_EQ(j["type"], "metrics");
    for (const char* k : {"epoch", "loss", "components", "swd_whitened", "histogram_jsd", "grad_norm"})
      EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_FALSE(j.contains("wall_ms"));
    EXPECT_TRUE(j["components"].contains("recon"));
    ++n;
  }
  EXPECT_EQ(n, 2u);
  const nlohmann::json info = nlohmann::json::parse(slurp(dir / "run-info.json"));
  EXPECT_EQ(info["timings"].size(), 2u);

  // The stored config reproduces the run's configuration.
  EXPECT_EQ(ExperimentConfig::from_config(KeyValueConfig::load(dir / "config.ini")).to_json(), c.to_json());
}

TEST(TrainAlignment, CheckpointEvaluationMatchesLiveModels) {
  ExperimentConfig c = small_moons(losses::LossKind::kBetaVaub, 5);
  const fs::path dir = fresh_dir("ckpt");
  train::MoonsRun live;
  {
    RunDirectory run(dir);
    live = train::run_moons(c, &run);
  }
  const Checkpoint ckpt = load_checkpoint(dir / "checkpoint.final");
  EXPECT_EQ(train::config_from_checkpoint(ckpt).to_json(), c.to_json());
  const nlohmann::json a = train::evaluate_checkpoint(ckpt, train::experiment_data(c));
  const nlohmann::json b = train::evaluate_checkpoint(ckpt, train::experiment_data(c));
  EXPECT_EQ(a, b);
  for (const char* k : {"swd_whitened", "histogram_jsd", "domain_separability", "recon_mse", "loss"})
    EXPECT_TRUE(a.contains(k)) << k;
}

// Epoch-mean loss at epoch 50 falls below epoch 1 for every shipped
// non-adversarial experiment and loss.
TEST(LossDecrease, MoonsLosses) {
  for (auto kind : {losses::LossKind::kBetaVaub, losses::LossKind::kVaub, losses::LossKind::kNvaub,
                    losses::LossKind::kAub, losses::LossKind::kNaub}) {
    ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kMoons);
    c.loss.kind = kind;
    if (kind == losses::LossKind::kVaub || kind == losses::LossKind::kAub) c.loss.beta = 1.0;
    if (kind == losses::LossKind::kNvaub || kind == losses::LossKind::kNaub) c.loss.sigma2_noise = 1.0;
    c.epochs = 50;
    c.cadence = 50;
    c.swd_projections = 50;
    const auto r = train::run_moons(c);
    ASSERT_EQ(r.train.epoch_loss.size(), 50u);
    EXPECT_LT(r.train.epoch_loss[49], r.train.epoch_loss[0]) << losses::loss_kind_name(kind);
  }
}

TEST(LossDecrease, PlateauBothLosses) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kPlateau);
  c.epochs = 50;
  c.swd_projections = 50;
  const auto r = train::run_plateau_compare(c);
  EXPECT_LT(r.vaub.epoch_loss[49], r.vaub.epoch_loss[0]);
  EXPECT_LT(r.nvaub.epoch_loss[49], r.nvaub.epoch_loss[0]);
}

TEST(LossDecrease, PlugAndPlayDemo) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kDa);
  c.epochs = 50;
  c.swd_projections = 50;
  for (double lambda : {0.0, c.loss.lambda_align}) {
    train::TrainResult r;
    train::train_da_once(c, lambda, &r);
    ASSERT_EQ(r.epoch_loss.size(), 50u);
    EXPECT_LT(r.epoch_loss[49], r.epoch_loss[0]) << lambda;
  }
}

TEST(PlateauCompare, IdenticalInitialization) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kPlateau);
  c.epochs = 0;
  const auto r = train::run_plateau_compare(c);
  ASSERT_EQ(r.vaub.records.size(), 1u);
  ASSERT_EQ(r.nvaub.epoch_swd.size(), 1u);
  // Same parameters and latents at epoch 0, so the same latent SWD.
  EXPECT_EQ(r.vaub.records[0].swd_whitened, r.nvaub.records[0].swd_whitened);
}

TEST(DaDemo, RecordsAccuracies) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kDa);
  c.epochs = 4;
  c.cadence = 2;
  c.swd_projections = 50;
  train::TrainResult r;
  const auto ev = train::train_da_once(c, 1.0, &r);
  EXPECT_GE(ev.source_accuracy, 0.0);
  EXPECT_LE(ev.target_accuracy, 1.0);
  ASSERT_FALSE(r.records.empty());
  EXPECT_TRUE(r.records.back().source_accuracy.has_value());
  EXPECT_TRUE(r.records.back().target_accuracy.has_value());
  EXPECT_TRUE(r.records.back().dp_gap.has_value());
}

}  // namespace
