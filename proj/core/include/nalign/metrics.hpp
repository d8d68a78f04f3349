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
#include <vector>

#include "nalign/matrix.hpp"

namespace nalign::metrics {

/// Points with a domain label each.
struct SampleSet {
  Matrix points;
  std::vector<std::size_t> domain;

  std::size_t domains() const;
  /// Points of domain d, in order.
  Matrix of_domain(std::size_t d) const;
};

/// Affine whitening map x -> (x - mean) W fitted on a pooled sample.
struct Whitening {
  std::vector<double> mean;
  /// Symmetric dim x dim, row-major: (Cov + eps I)^(-1/2), eps = 1e-6 trace / dim.
  std::vector<double> transform;

  static Whitening fit(const Matrix& pooled);
  Matrix apply(const Matrix& x) const;
};

/// Whitened with the pooled mean and covariance of all points.
SampleSet whiten(const SampleSet& s);
Matrix whiten(const Matrix& x);

/// 1D W1: sorted-sample L1 mean for equal sizes, otherwise the exact
/// integral between piecewise-linear quantile functions.
double wasserstein1(std::vector<double> a, std::vector<double> b);

/// Mean 1D W1 over n_proj random unit directions. In one dimension every
/// direction is +-1, so the exact W1 is returned.
double swd(const Matrix& a, const Matrix& b, std::size_t n_proj, std::uint64_t seed);

/// SWD between domains 0 and 1 after pooled whitening.
double whitened_swd(const SampleSet& s, std::size_t n_proj, std::uint64_t seed);
double whitened_swd(const Matrix& a, const Matrix& b, std::size_t n_proj, std::uint64_t seed);

struct SeparabilityOptions {
  /// A seeded random subset of at most this many points is used.
  std::size_t max_points = 400;
  std::size_t max_newton_steps = 50;
  double tolerance = 1e-8;
};

/// Best held-out accuracy of an RBF-kernel logistic classifier predicting the
/// domain, over a bandwidth x ridge grid, on an 80/20 split. Stands in for a
/// Gaussian-kernel SVM; fitted by Newton iterations rather than SMO.
double domain_separability(const SampleSet& s, std::uint64_t split_seed, const SeparabilityOptions& opt = {});

/// Discrete JSD of histograms on shared equal-width bins covering both samples.
double histogram_jsd(const std::vector<double>& a, const std::vector<double>& b, std::size_t bins);

/// |P(yhat = 1 | d = 0) - P(yhat = 1 | d = 1)| for binary predictions.
double dp_gap(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& domains);

double accuracy(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& labels);

}  // namespace nalign::metrics
