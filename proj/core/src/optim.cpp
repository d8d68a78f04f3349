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

#include "nalign/optim.hpp"

#include <cmath>

namespace nalign::optim {

NonFiniteGradient::NonFiniteGradient(const std::string& parameter)
    : std::runtime_error("non-finite gradient for parameter '" + parameter + "'"), parameter_(parameter) {}

Adam::Adam(std::vector<ad::Parameter*> params, AdamOptions opt) : params_(std::move(params)), opt_(opt) {
  if (!(opt_.lr > 0.0) || !(opt_.beta1 >= 0.0 && opt_.beta1 < 1.0) || !(opt_.beta2 >= 0.0 && opt_.beta2 < 1.0) ||
      !(opt_.eps > 0.0))
    throw std::invalid_argument("Adam: invalid hyperparameters");
  for (const ad::Parameter* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

double Adam::step(const std::vector<std::vector<double>>& grads) {
  if (grads.size() != params_.size()) throw std::invalid_argument("Adam: gradient count mismatch");
  double sq = 0.0;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (grads[k].size() != params_[k]->size())
      throw std::invalid_argument("Adam: gradient shape mismatch for '" + params_[k]->name + "'");
    for (double g : grads[k]) {
      if (!std::isfinite(g)) throw NonFiniteGradient(params_[k]->name);
      sq += g * g;
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value;
    auto& m = m_[k];
    auto& v = v_[k];
    const auto& g = grads[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g[i];
      v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g[i] * g[i];
      value[i] -= opt_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opt_.eps);
    }
  }
  return std::sqrt(sq);
}

double Adam::step(const ad::Tape& tape) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params_.size());
  for (const ad::Parameter* p : params_) grads.push_back(tape.grad(*p));
  return step(grads);
}

}  // namespace nalign::optim
