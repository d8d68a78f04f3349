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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nalign/matrix.hpp"

namespace nalign::data {

struct Dataset {
  Matrix x;
  std::vector<std::size_t> d;
  /// Empty when the set has no task labels.
  std::vector<std::size_t> y;
  std::string name;
  std::uint64_t seed = 0;
  /// Generator parameters, stringified in a fixed order.
  std::map<std::string, std::string> params;
  /// Per-column statistics removed by z-scoring (empty when not standardized).
  std::vector<double> feature_mean;
  std::vector<double> feature_std;

  std::size_t size() const { return x.rows; }
  std::size_t dim() const { return x.cols; }
  std::size_t domains() const;
  /// Rows of domain d, keeping labels.
  Dataset domain(std::size_t d) const;
  /// Throws std::invalid_argument on non-finite entries or non-contiguous domains.
  void validate() const;
};

/// Row concatenation; the second set's domain labels are offset by `domain_offset`.
Dataset concat(const Dataset& a, const Dataset& b, std::size_t domain_offset);

/// n/2 points on each half circle, t on a uniform grid over [0, pi], plus
/// independent N(0, noise^2) per coordinate. Labels y = moon index, d = 0.
Dataset make_moons(std::size_t n, double noise, std::uint64_t seed);

/// Adds N(0, noise^2) per coordinate.
void add_noise(Dataset& ds, double noise, std::uint64_t seed);

/// Each point -> diag(sx, sy) R(theta) point.
Dataset rotate_scale(const Dataset& ds, double theta, double sx, double sy);
/// Exact inverse of rotate_scale: R(-theta) diag(1/sx, 1/sy) point.
Dataset unrotate_scale(const Dataset& ds, double theta, double sx, double sy);

/// n points per domain, 1D, domain k ~ N(means[k], var).
Dataset make_gaussians(std::size_t n, const std::vector<double>& means, double var, std::uint64_t seed);

/// Two-domain moons: domain 0 plain, domain 1 rotated and scaled. Noise is
/// added before the transform unless `noise_after_transform`.
struct MoonsSpec {
  std::size_t n_per_domain = 500;
  double noise = 0.05;
  double theta = 3.0 * 3.14159265358979323846 / 8.0;
  double sx = 0.75;
  double sy = 1.25;
  bool noise_after_transform = false;
};
Dataset make_rotated_moons(const MoonsSpec& spec, std::uint64_t seed);

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t row, std::optional<std::string> column);
  /// 1-based line number in the file; 0 for whole-file errors.
  std::size_t row() const { return row_; }
  const std::optional<std::string>& column() const { return column_; }

 private:
  std::size_t row_;
  std::optional<std::string> column_;
};

/// Header row required. Features are every numeric column except the domain
/// and label columns, z-scored with a std floor of 1e-8.
Dataset load_csv(const std::filesystem::path& path, const std::string& domain_col,
                 const std::optional<std::string>& label_col = std::nullopt);

/// Removes column means and divides by max(std, 1e-8); returns (mean, std).
std::pair<std::vector<double>, std::vector<double>> zscore(Matrix& x);

}  // namespace nalign::data
