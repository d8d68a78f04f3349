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

#include <functional>
#include <vector>

#include "nalign/autodiff.hpp"

namespace nalign::ad {

/// Scalar objective rebuilt on a fresh tape each call. Must be deterministic
/// for fixed parameter values (freeze any reparameterization noise).
using Objective = std::function<Tensor(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t evaluations = 0;
};

/// Compares tape gradients against central differences for every element of
/// `params`. Relative error is |analytic - numeric| / max(1, |numeric|).
/// Throws std::runtime_error if the objective is non-finite at a perturbed point.
GradCheckReport check_gradients(const Objective& f, const std::vector<Parameter*>& params, double step = 1e-5);

}  // namespace nalign::ad
