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

#include "nalign/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nalign::ad {

namespace {

double evaluate(const Objective& f, const std::string& where) {
  Tape tape;
  const double v = f(tape).item();
  if (!std::isfinite(v)) throw std::runtime_error("check_gradients: non-finite objective at " + where);
  return v;
}

}  // namespace

GradCheckReport check_gradients(const Objective& f, const std::vector<Parameter*>& params, double step) {
  GradCheckReport report;
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor root = f(tape);
    if (!std::isfinite(root.item())) throw std::runtime_error("check_gradients: non-finite objective at base point");
    tape.backward(root);
    for (const Parameter* p : params) analytic.push_back(tape.grad(*p));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p.value[i];
      const std::string where = p.name + "[" + std::to_string(i) + "]";
      p.value[i] = orig + step;
      const double up = evaluate(f, where);
      p.value[i] = orig - step;
      const double down = evaluate(f, where);
      p.value[i] = orig;
      report.evaluations += 2;
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::abs(analytic[k][i] - numeric) / std::max(1.0, std::abs(numeric));
      report.max_rel_error = std::max(report.max_rel_error, err);
    }
  }
  return report;
}

}  // namespace nalign::ad
