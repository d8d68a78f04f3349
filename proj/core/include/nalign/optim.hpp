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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nalign/autodiff.hpp"

namespace nalign::optim {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& parameter);
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

/// Adam with bias correction. Moments are shaped like the parameters.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<ad::Parameter*> params, AdamOptions opt = {});

  /// Applies one update from explicit gradients (one vector per parameter).
  /// Rejects the whole step, leaving every parameter untouched, if any
  /// gradient is non-finite. Returns the global gradient L2 norm.
  double step(const std::vector<std::vector<double>>& grads);
  /// Gradients read from the tape's last backward sweep.
  double step(const ad::Tape& tape);

  std::size_t steps() const { return t_; }
  const AdamOptions& options() const { return opt_; }
  const std::vector<ad::Parameter*>& parameters() const { return params_; }

 private:
  std::vector<ad::Parameter*> params_;
  AdamOptions opt_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace nalign::optim
