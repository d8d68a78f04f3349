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

#include "nalign/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nalign::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Phi(a) - Phi(b) for a >= b, accurate in both tails.
double normal_cdf_diff(double a, double b) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  if (b >= 0.0) return 0.5 * (std::erfc(b * kInvSqrt2) - std::erfc(a * kInvSqrt2));
  if (a <= 0.0) return 0.5 * (std::erfc(-a * kInvSqrt2) - std::erfc(-b * kInvSqrt2));
  return 1.0 - 0.5 * std::erfc(a * kInvSqrt2) - 0.5 * std::erfc(-b * kInvSqrt2);
}

// Trapezoid weights: h everywhere, h/2 at the ends.
template <class F>
double trapezoid(const Quadrature1D& q, F f) {
  const double h = q.step();
  double s = 0.0;
  for (std::size_t i = 0; i < q.n; ++i) {
    const double v = f(q.point(i));
    s += (i == 0 || i + 1 == q.n) ? 0.5 * v : v;
  }
  return s * h;
}

// Pointwise JSD integrand from log-densities; non-negative by construction.
double jsd_integrand(double la, double lb) {
  // Equal densities contribute exactly zero; the generic form leaves rounding residue.
  if (la == lb) return 0.0;
  const double lm = log_add_exp(la, lb) - kLn2;
  double v = 0.0;
  if (la != kNegInf) v += 0.5 * std::exp(la) * (la - lm);
  if (lb != kNegInf) v += 0.5 * std::exp(lb) * (lb - lm);
  return v;
}

Quadrature1D widen(const Quadrature1D& q, const Quadrature1D& cover) {
  return Quadrature1D(std::min(q.lo, cover.lo), std::max(q.hi, cover.hi), std::max(q.n, cover.n));
}

}  // namespace

// --- Mixture1D ---------------------------------------------------------------

Mixture1D Mixture1D::gaussian(double mean, double var) { return Mixture1D{{1.0}, {mean}, {var}}; }

Mixture1D Mixture1D::random(std::size_t components, Rng& rng, double mean_range) {
  Mixture1D m;
  m.weights = rng.dirichlet_ones(components);
  for (std::size_t k = 0; k < components; ++k) {
    m.means.push_back(rng.uniform(-mean_range, mean_range));
    m.vars.push_back(std::exp(rng.uniform(std::log(0.25), std::log(4.0))));
  }
  return m;
}

double Mixture1D::log_density(double t) const {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double acc = kNegInf;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    const double d = t - means[k];
    acc = log_add_exp(acc, std::log(weights[k]) - kHalfLog2Pi - 0.5 * std::log(vars[k]) - 0.5 * d * d / vars[k]);
  }
  return acc;
}

Mixture1D Mixture1D::convolved(double sigma2) const {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("convolved: sigma2 must be >= 0");
  Mixture1D out = *this;
  for (double& v : out.vars) v += sigma2;
  return out;
}

Mixture1D Mixture1D::shifted(double offset) const {
  Mixture1D out = *this;
  for (double& m : out.means) m += offset;
  return out;
}

// --- grids -------------------------------------------------------------------

Quadrature1D::Quadrature1D(double lo_, double hi_, std::size_t n_) : lo(lo_), hi(hi_), n(n_) {
  if (n < 1001) throw std::invalid_argument("Quadrature1D: need at least 1001 points");
  if (!(hi > lo)) throw std::invalid_argument("Quadrature1D: hi must exceed lo");
}

Quadrature1D Quadrature1D::covering(const Mixture1D& a, const Mixture1D& b, double n_sigma, std::size_t n) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Mixture1D* m : {&a, &b})
    for (std::size_t k = 0; k < m->means.size(); ++k) {
      const double s = std::sqrt(m->vars[k]);
      lo = std::min(lo, m->means[k] - n_sigma * s);
      hi = std::max(hi, m->means[k] + n_sigma * s);
    }
  return Quadrature1D(lo, hi, n);
}

bool Quadrature1D::covers(const Mixture1D& m) const {
  for (std::size_t k = 0; k < m.means.size(); ++k) {
    const double s = std::sqrt(m.vars[k]);
    if (m.means[k] - 8.0 * s < lo || m.means[k] + 8.0 * s > hi) return false;
  }
  return true;
}

// --- divergences -------------------------------------------------------------

double jsd_quadrature(const LogDensity& a, const LogDensity& b, const Quadrature1D& q) {
  return trapezoid(q, [&](double t) { return jsd_integrand(a(t), b(t)); });
}

QuadratureValue jsd_quadrature(const Mixture1D& a, const Mixture1D& b, const Quadrature1D& q) {
  QuadratureValue out;
  out.value = jsd_quadrature([&](double t) { return a.log_density(t); }, [&](double t) { return b.log_density(t); }, q);
  out.coverage_warning = !q.covers(a) || !q.covers(b);
  return out;
}

QuadratureValue njsd_quadrature(const Mixture1D& a, const Mixture1D& b, double sigma2, const Quadrature1D& q) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("njsd_quadrature: sigma2 must be >= 0");
  const Mixture1D sa = a.convolved(sigma2);
  const Mixture1D sb = b.convolved(sigma2);
  return jsd_quadrature(sa, sb, widen(q, Quadrature1D::covering(sa, sb)));
}

QuadratureValue njsd_quadrature(const Mixture1D& a, const Mixture1D& b, double sigma2) {
  return njsd_quadrature(a, b, sigma2, Quadrature1D::covering(a, b));
}

QuadratureValue nsj(const Mixture1D& a, const Mixture1D& b, const std::vector<NoiseLevel>& levels) {
  if (levels.empty()) throw std::invalid_argument("nsj: empty noise-level list");
  double total = 0.0;
  for (const auto& l : levels) {
    if (!(l.weight >= 0.0)) throw std::invalid_argument("nsj: negative weight");
    total += l.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("nsj: weights must sum to 1");
  QuadratureValue out;
  for (const auto& l : levels) {
    const auto v = njsd_quadrature(a, b, l.sigma2);
    out.value += l.weight * v.value;
    out.coverage_warning = out.coverage_warning || v.coverage_warning;
  }
  return out;
}

double entropy_quadrature(const LogDensity& p, const Quadrature1D& q) {
  return trapezoid(q, [&](double t) {
    const double lp = p(t);
    return lp == kNegInf ? 0.0 : -std::exp(lp) * lp;
  });
}

double entropy_quadrature(const Mixture1D& p) {
  return entropy_quadrature([&](double t) { return p.log_density(t); }, Quadrature1D::covering(p, p));
}

// --- landscapes --------------------------------------------------------------

LandscapeFamily parse_family(const std::string& name) {
  if (name == "two-gaussian") return LandscapeFamily::kTwoGaussian;
  if (name == "shifted-gmm") return LandscapeFamily::kShiftedGmm;
  throw std::invalid_argument("unknown landscape family '" + name + "' (expected two-gaussian or shifted-gmm)");
}

std::string family_name(LandscapeFamily f) {
  return f == LandscapeFamily::kTwoGaussian ? "two-gaussian" : "shifted-gmm";
}

Mixture1D family_base(LandscapeFamily f) {
  if (f == LandscapeFamily::kTwoGaussian) return Mixture1D::gaussian(0.0, 1.0);
  return Mixture1D{{0.5, 0.5}, {0.0, 8.0}, {1.0, 1.0}};
}

double landscape_value(LandscapeFamily f, double offset, double sigma2) {
  const Mixture1D base = family_base(f);
  return njsd_quadrature(base, base.shifted(offset), sigma2).value;
}

double landscape_slope(LandscapeFamily f, double offset, double sigma2, double h) {
  return (landscape_value(f, offset + h, sigma2) - landscape_value(f, offset - h, sigma2)) / (2.0 * h);
}

Landscape njsd_landscape(LandscapeFamily f, const std::vector<double>& offsets, const std::vector<double>& sigma2s) {
  Landscape out{f, offsets, sigma2s, {}, {}};
  for (double s2 : sigma2s) {
    std::vector<double> vals;
    vals.reserve(offsets.size());
    for (double o : offsets) vals.push_back(landscape_value(f, o, s2));
    std::vector<double> slopes(offsets.size(), 0.0);
    for (std::size_t i = 0; i < offsets.size() && offsets.size() > 1; ++i) {
      const std::size_t l = i == 0 ? 0 : i - 1;
      const std::size_t r = i + 1 == offsets.size() ? i : i + 1;
      slopes[i] = (vals[r] - vals[l]) / (offsets[r] - offsets[l]);
    }
    out.values.push_back(std::move(vals));
    out.slopes.push_back(std::move(slopes));
  }
  return out;
}

std::size_t count_interior_minima(const std::vector<double>& values) {
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    if (values[i] < values[i - 1] && values[i] < values[i + 1]) ++count;
  return count;
}

// --- noisy bound -------------------------------------------------------------

double smoothed_cell_log_density(const std::vector<double>& probs, double sigma2, double t) {
  const double s = std::sqrt(sigma2);
  double density = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    const double c = static_cast<double>(k);
    density += probs[k] * normal_cdf_diff((t - c + 0.5) / s, (t - c - 0.5) / s);
  }
  return density > 0.0 ? std::log(density) : kNegInf;
}

NoisyBoundCheck noisy_bound_check(const DiscreteWorld& w, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("noisy_bound_check: sigma2 must be > 0");
  const std::size_t nd = w.nd();
  std::vector<std::vector<double>> per_domain(nd, std::vector<double>(w.nz()));
  std::vector<double> marginal(w.nz());
  std::vector<double> qd(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    qd[d] = w.q_d(d);
    for (std::size_t z = 0; z < w.nz(); ++z) per_domain[d][z] = w.q_z_given_d(z, d);
  }
  for (std::size_t z = 0; z < w.nz(); ++z) marginal[z] = w.q_z(z);

  const double pad = 10.0 * std::sqrt(sigma2) + 1.0;
  const Quadrature1D grid(-0.5 - pad, static_cast<double>(w.nz()) - 0.5 + pad, 40001);

  NoisyBoundCheck out;
  // sum_d q(d) q_d(t) log(q_d(t) / m(t)) is pointwise non-negative.
  out.ngjsd = trapezoid(grid, [&](double t) {
    const double lm = smoothed_cell_log_density(marginal, sigma2, t);
    if (lm == kNegInf) return 0.0;
    double v = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
      if (qd[d] <= 0.0) continue;
      const double ld = smoothed_cell_log_density(per_domain[d], sigma2, t);
      if (ld != kNegInf) v += qd[d] * std::exp(ld) * (ld - lm);
    }
    return v;
  });
  const double smoothed_entropy =
      entropy_quadrature([&](double t) { return smoothed_cell_log_density(marginal, sigma2, t); }, grid);
  out.nvaub = ratio_term(w) + smoothed_entropy - data_entropy(w);
  return out;
}

}  // namespace nalign::oracle
