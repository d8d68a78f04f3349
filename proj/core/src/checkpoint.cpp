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

#include "nalign/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

namespace nalign {

using nlohmann::json;

const ad::Parameter* Checkpoint::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

json checkpoint_to_json(const std::vector<const ad::Parameter*>& params, const json& meta) {
  json arr = json::array();
  std::unordered_set<std::string> seen;
  for (const ad::Parameter* p : params) {
    if (!seen.insert(p->name).second) throw CheckpointError("checkpoint: duplicate parameter name '" + p->name + "'");
    for (double v : p->value)
      if (!std::isfinite(v)) throw CheckpointError("checkpoint: non-finite value in '" + p->name + "'");
    arr.push_back({{"name", p->name}, {"shape", p->shape}, {"values", p->value}});
  }
  return {{"format", "nalign-checkpoint"}, {"version", kCheckpointVersion}, {"meta", meta}, {"parameters", arr}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "nalign-checkpoint") throw CheckpointError("checkpoint: unknown format");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint c;
    c.meta = j.value("meta", json::object());
    for (const auto& e : j.at("parameters")) {
      ad::Parameter p(e.at("name").get<std::string>(), e.at("shape").get<ad::Shape>(),
                      e.at("values").get<std::vector<double>>());
      c.parameters.push_back(std::move(p));
    }
    return c;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<const ad::Parameter*>& params,
                     const json& meta) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path.string());
  out << checkpoint_to_json(params, meta).dump() << '\n';
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint: " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

void restore(const Checkpoint& ckpt, const std::vector<ad::Parameter*>& params) {
  for (ad::Parameter* p : params) {
    const ad::Parameter* src = ckpt.find(p->name);
    if (!src) throw CheckpointError("checkpoint: missing parameter '" + p->name + "'");
    if (src->shape != p->shape)
      throw CheckpointError("checkpoint: shape mismatch for '" + p->name + "': " + ad::to_string(src->shape) +
                            " vs " + ad::to_string(p->shape));
    p->value = src->value;
  }
}

Checkpoint snapshot(const std::vector<const ad::Parameter*>& params) {
  Checkpoint c;
  for (const ad::Parameter* p : params) c.parameters.push_back(*p);
  return c;
}

}  // namespace nalign
