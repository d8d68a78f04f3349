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

// Metric records and the on-disk run directory:
//
//   <out>/config.ini        resolved configuration, every field
//   <out>/metrics.ndjson    header line, then one record per cadence tick
//   <out>/checkpoint.final  JSON checkpoint of every trained parameter
//   <out>/curves/*.csv      curve and scatter exports
//   <out>/run-info.json     wall-clock timings (the only non-deterministic file)

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nalign/config.hpp"

namespace nalign {

struct MetricRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::vector<std::pair<std::string, double>> components;
  double swd_whitened = 0.0;
  double histogram_jsd = 0.0;
  double grad_norm = 0.0;
  std::optional<double> source_accuracy;
  std::optional<double> target_accuracy;
  std::optional<double> dp_gap;
  /// Excluded from metrics.ndjson; written to run-info.json.
  double wall_ms = 0.0;

  /// Deterministic fields only.
  nlohmann::json to_json() const;
};

/// Numeric columns, written with full round-trip precision.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string to_string() const;
  void save(const std::filesystem::path& path) const;
};

class RunDirectory {
 public:
  /// Creates `root` and `root/curves`.
  explicit RunDirectory(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  std::filesystem::path curve(const std::string& name) const { return root_ / "curves" / name; }

  void write_config(const KeyValueConfig& cfg) const;
  /// Truncates metrics.ndjson and writes the header line.
  void begin_metrics(const nlohmann::json& header);
  void append(const MetricRecord& rec);
  void write_run_info(const nlohmann::json& info) const;
  void write_text(const std::string& name, const std::string& text) const;

 private:
  std::filesystem::path root_;
  std::ofstream metrics_;
  std::vector<std::pair<std::size_t, double>> timings_;
};

}  // namespace nalign
