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

// Self-describing JSON checkpoints: named parameters with shapes and flat
// values, plus free-form metadata. Doubles are written in shortest
// round-trip form, so save followed by load is bit-exact.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nalign/autodiff.hpp"

namespace nalign {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<ad::Parameter> parameters;

  const ad::Parameter* find(const std::string& name) const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json checkpoint_to_json(const std::vector<const ad::Parameter*>& params, const nlohmann::json& meta);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const std::vector<const ad::Parameter*>& params,
                     const nlohmann::json& meta = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies values into `params` by name. Throws on a missing name or shape mismatch.
void restore(const Checkpoint& ckpt, const std::vector<ad::Parameter*>& params);

/// Snapshot of parameter values, for in-memory rollback.
Checkpoint snapshot(const std::vector<const ad::Parameter*>& params);

template <class P>
std::vector<const ad::Parameter*> as_const(const std::vector<P*>& ps) {
  return std::vector<const ad::Parameter*>(ps.begin(), ps.end());
}

}  // namespace nalign
