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

#include "nalign/run_log.hpp"

#include <stdexcept>

namespace nalign {

using nlohmann::json;

json MetricRecord::to_json() const {
  json comps = json::object();
  for (const auto& [k, v] : components) comps[k] = v;
  json j = {{"type", "metrics"},           {"epoch", epoch},
            {"loss", loss},                {"components", comps},
            {"swd_whitened", swd_whitened}, {"histogram_jsd", histogram_jsd},
            {"grad_norm", grad_norm}};
  if (source_accuracy) j["source_accuracy"] = *source_accuracy;
  if (target_accuracy) j["target_accuracy"] = *target_accuracy;
  if (dp_gap) j["dp_gap"] = *dp_gap;
  return j;
}

void CsvTable::add(std::vector<double> row) {
  if (row.size() != header.size()) throw std::invalid_argument("csv: row width does not match header");
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) out += (j ? "," : "") + format_double(r[j]);
    out += '\n';
  }
  return out;
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_string();
}

RunDirectory::RunDirectory(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_ / "curves");
}

void RunDirectory::write_config(const KeyValueConfig& cfg) const { cfg.save(path("config.ini")); }

void RunDirectory::begin_metrics(const json& header) {
  metrics_ = std::ofstream(path("metrics.ndjson"), std::ios::trunc);
  if (!metrics_) throw std::runtime_error("cannot write " + path("metrics.ndjson").string());
  metrics_ << json{{"type", "header"}, {"config", header}}.dump() << '\n';
  timings_.clear();
}

void RunDirectory::append(const MetricRecord& rec) {
  metrics_ << rec.to_json().dump() << '\n';
  metrics_.flush();
  timings_.emplace_back(rec.epoch, rec.wall_ms);
}

void RunDirectory::write_run_info(const json& info) const {
  json j = info;
  json t = json::array();
  for (const auto& [e, ms] : timings_) t.push_back({{"epoch", e}, {"wall_ms", ms}});
  j["timings"] = t;
  write_text("run-info.json", j.dump(2) + "\n");
}

void RunDirectory::write_text(const std::string& name, const std::string& text) const {
  std::ofstream out(path(name));
  if (!out) throw std::runtime_error("cannot write " + path(name).string());
  out << text;
}

}  // namespace nalign
