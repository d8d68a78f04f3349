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
#include <string>

#include <gtest/gtest.h>

#include "nalign/config.hpp"
#include "nalign/experiments.hpp"

namespace {

using namespace nalign;
using train::ExperimentConfig;
using train::ExperimentKind;

TEST(KeyValueConfig, ParseGetAndOverride) {
  KeyValueConfig c = KeyValueConfig::parse("[a]\nx=1.5\nflag=true\n; comment\n[b]\nlist=1,2,3\nname=hi\n");
  EXPECT_EQ(c.get_double("a.x", 0), 1.5);
  EXPECT_TRUE(c.get_bool("a.flag", false));
  EXPECT_EQ(c.get_doubles("b.list", {}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(c.get_string("b.name", ""), "hi");
  EXPECT_EQ(c.get_size("b.missing", 7), 7u);
  c.apply_overrides({"a.x=2", "c.new=5"});
  EXPECT_EQ(c.get_double("a.x", 0), 2.0);
  EXPECT_EQ(c.get_size("c.new", 0), 5u);
  EXPECT_THROW(c.apply_overrides({"novalue"}), ConfigError);
  EXPECT_THROW(c.get_double("b.name", 0), ConfigError);
  EXPECT_THROW(c.set("nosection", "1"), ConfigError);
}

TEST(KeyValueConfig, TextRoundTrip) {
  KeyValueConfig c;
  c.set("s.a", "1");
  c.set("t.b", "x y");
  c.set("s.c", "0.1");
  const KeyValueConfig back = KeyValueConfig::parse(c.to_string());
  for (const auto& [k, v] : c.entries()) EXPECT_EQ(back.get(k), v);
}

TEST(KeyValueConfig, MissingFileNamesPath) {
  try {
    KeyValueConfig::load("/no/such/dir/x.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/no/such/dir/x.ini"), std::string::npos);
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(1e12), "1e+12");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(third)), third);
}

TEST(ExperimentConfig, RoundTripsEveryKind) {
  for (auto kind : {ExperimentKind::kMoons, ExperimentKind::kPlateau, ExperimentKind::kDa}) {
    const ExperimentConfig a = ExperimentConfig::defaults(kind);
    const ExperimentConfig b = ExperimentConfig::from_config(a.to_config());
    EXPECT_EQ(a.to_config().to_string(), b.to_config().to_string());
    EXPECT_EQ(a.to_json(), b.to_json());
    a.validate();
  }
}

TEST(ExperimentConfig, UnknownKeyRejected) {
  KeyValueConfig kv = ExperimentConfig::defaults(ExperimentKind::kMoons).to_config();
  kv.set("model.hiden", "5");
  EXPECT_THROW(ExperimentConfig::from_config(kv), ConfigError);
}

TEST(ExperimentConfig, InvalidValuesRejected) {
  ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kMoons);
  c.loss.beta = 0.0;
  EXPECT_THROW(c.validate(), std::exception);
  c = ExperimentConfig::defaults(ExperimentKind::kPlateau);
  c.prior_means = {1.0};
  EXPECT_THROW(c.validate(), std::exception);
}

TEST(ExperimentConfig, ShippedConfigsMatchDefaults) {
  const std::filesystem::path dir = std::filesystem::path(NALIGN_SOURCE_DIR) / "configs";
  for (auto [file, kind] : {std::pair{"moons.ini", ExperimentKind::kMoons}, {"plateau.ini", ExperimentKind::kPlateau},
                            {"da.ini", ExperimentKind::kDa}}) {
    const ExperimentConfig shipped = ExperimentConfig::from_config(KeyValueConfig::load(dir / file));
    EXPECT_EQ(shipped.to_config().to_string(), ExperimentConfig::defaults(kind).to_config().to_string()) << file;
  }
}

TEST(ExperimentConfig, ShippedParametersForMoons) {
  const ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::kMoons);
  EXPECT_EQ(c.moons.n_per_domain, 500u);
  EXPECT_EQ(c.moons.noise, 0.05);
  EXPECT_EQ(c.latent_dim, 1u);
  EXPECT_EQ(c.hidden, 20u);
  EXPECT_EQ(c.prior_components, 10u);
  EXPECT_EQ(c.loss.kind, losses::LossKind::kBetaVaub);
  EXPECT_EQ(c.loss.beta, 0.1);
  EXPECT_EQ(c.adam.lr, 1e-3);
  EXPECT_LE(c.epochs, 5000u);
}

}  // namespace
