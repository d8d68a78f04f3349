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

// One-dimensional trapezoid oracles for (noisy) Jensen-Shannon divergences.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nalign/discrete_world.hpp"

namespace nalign::oracle {

/// Finite 1D Gaussian mixture; a single Gaussian is K = 1.
struct Mixture1D {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> vars;

  static Mixture1D gaussian(double mean, double var);
  static Mixture1D random(std::size_t components, Rng& rng, double mean_range = 5.0);

  double log_density(double t) const;
  /// Gaussian smoothing: every variance grows by sigma2.
  Mixture1D convolved(double sigma2) const;
  Mixture1D shifted(double offset) const;
};

using LogDensity = std::function<double(double)>;

struct Quadrature1D {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t n = 20001;

  /// Throws unless n >= 1001 and hi > lo.
  Quadrature1D(double lo, double hi, std::size_t n = 20001);

  /// All components of both mixtures, padded by `n_sigma` of their own std.
  static Quadrature1D covering(const Mixture1D& a, const Mixture1D& b, double n_sigma = 10.0, std::size_t n = 20001);

  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
  double point(std::size_t i) const { return lo + static_cast<double>(i) * step(); }
  /// True when every component fits with 8 of its std on both sides.
  bool covers(const Mixture1D& m) const;
};

struct QuadratureValue {
  double value = 0.0;
  /// Grid does not cover >= 8 std of every component.
  bool coverage_warning = false;
};

/// Trapezoid of a pointwise non-negative form of H((a+b)/2) - (H(a)+H(b))/2.
double jsd_quadrature(const LogDensity& a, const LogDensity& b, const Quadrature1D& q);
QuadratureValue jsd_quadrature(const Mixture1D& a, const Mixture1D& b, const Quadrature1D& q);
/// JSD of both mixtures after Gaussian smoothing, on `q` widened to cover the smoothed components.
QuadratureValue njsd_quadrature(const Mixture1D& a, const Mixture1D& b, double sigma2, const Quadrature1D& q);
/// Same, on the default covering grid.
QuadratureValue njsd_quadrature(const Mixture1D& a, const Mixture1D& b, double sigma2);

struct NoiseLevel {
  double sigma2;
  double weight;
};
/// Weighted average of NJSD over noise levels. Throws on an empty list or bad weights.
QuadratureValue nsj(const Mixture1D& a, const Mixture1D& b, const std::vector<NoiseLevel>& levels);

/// Differential entropy -int p log p.
double entropy_quadrature(const LogDensity& p, const Quadrature1D& q);
double entropy_quadrature(const Mixture1D& p);

enum class LandscapeFamily { kTwoGaussian, kShiftedGmm };
LandscapeFamily parse_family(const std::string& name);
std::string family_name(LandscapeFamily f);

/// Reference density of a family at offset 0, and its shifted partner.
Mixture1D family_base(LandscapeFamily f);

/// NJSD between the family at offset 0 and at `offset`, noise variance sigma2.
double landscape_value(LandscapeFamily f, double offset, double sigma2);
/// Central difference of landscape_value in the offset.
double landscape_slope(LandscapeFamily f, double offset, double sigma2, double h = 1e-3);

struct Landscape {
  LandscapeFamily family;
  std::vector<double> offsets;
  std::vector<double> sigma2s;
  /// values[s][i]: NJSD at offsets[i] for noise sigma2s[s].
  std::vector<std::vector<double>> values;
  /// Central-difference slopes along the offset grid (one-sided at the ends).
  std::vector<std::vector<double>> slopes;
};
Landscape njsd_landscape(LandscapeFamily f, const std::vector<double>& offsets, const std::vector<double>& sigma2s);

/// Grid points strictly below both neighbours.
std::size_t count_interior_minima(const std::vector<double>& values);

// --- Noisy bound on a cell-embedded world ------------------------------------
//
// Latent symbol k occupies the unit cell [k - 1/2, k + 1/2), so the encoder
// density on the cell equals q(k | x, d) and differential entropies of the
// clean latent equal the Shannon entropies of the symbol. Adding N(0, sigma2)
// noise gives smooth domain marginals for quadrature.

struct NoisyBoundCheck {
  /// GJSD of the smoothed domain marginals, by quadrature.
  double ngjsd = 0.0;
  /// Enumerated ratio term + H(smoothed marginal) - E_d H(x|d).
  double nvaub = 0.0;
};
NoisyBoundCheck noisy_bound_check(const DiscreteWorld& w, double sigma2);

/// log of the smoothed cell mixture sum_k probs[k] * (U[k-1/2, k+1/2) * N(0, sigma2))(t).
double smoothed_cell_log_density(const std::vector<double>& probs, double sigma2, double t);

}  // namespace nalign::oracle
