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

// Seeded verification suites shared by the CLI and the acceptance tests. Each
// check reports the worst value seen against its tolerance.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nalign/losses.hpp"

namespace nalign::verify {

struct Check {
  std::string name;
  /// Worst residual, or the tested quantity for one-sided checks.
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

bool all_passed(const std::vector<Check>& checks);
/// "PASS name value=... tol=..." style line.
std::string format_check(const Check& c);

/// Exact identities on `cases` random discrete worlds.
std::vector<Check> oracle_suite(std::uint64_t seed, std::size_t cases = 200);

/// Divergence properties of the noisy JSD on random 1D Gaussian / GMM pairs.
std::vector<Check> njsd_suite(std::uint64_t seed, std::size_t pairs = 50);

/// Enumerated noisy bound against quadrature NGJSD on cell-embedded worlds.
std::vector<Check> noisy_bound_suite(std::uint64_t seed, std::size_t worlds = 20,
                                     const std::vector<double>& sigma2s = {1.0, 100.0});

/// Plateau slopes and local-minimum counts of the two landscape families.
std::vector<Check> landscape_suite();

/// Finite-difference audit of one loss kind over `configs` random small models.
Check grad_audit(losses::LossKind kind, std::uint64_t seed, std::size_t configs = 20, double tolerance = 1e-4);

}  // namespace nalign::verify
