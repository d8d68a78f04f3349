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

#include "nalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "nalign/random.hpp"

namespace nalign::metrics {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& m) {
  MatrixXd out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
  return out;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("point sets differ in dimension");
  Matrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

// Piecewise-linear quantile of sorted values with nodes at (i + 1/2) / n.
double quantile(const std::vector<double>& s, double u) {
  const double t = u * static_cast<double>(s.size()) - 0.5;
  if (t <= 0.0) return s.front();
  if (t >= static_cast<double>(s.size() - 1)) return s.back();
  const auto k = static_cast<std::size_t>(std::floor(t));
  const double f = t - static_cast<double>(k);
  return s[k] + f * (s[k + 1] - s[k]);
}

// Exact integral of |f| over an interval where f is linear.
double abs_linear_integral(double f0, double f1, double h) {
  if ((f0 >= 0.0) == (f1 >= 0.0) || f0 == 0.0 || f1 == 0.0) return 0.5 * (std::abs(f0) + std::abs(f1)) * h;
  return 0.5 * h * (f0 * f0 + f1 * f1) / (std::abs(f0) + std::abs(f1));
}

double log1p_exp(double f) { return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f)); }
double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

// Ridge kernel logistic regression with the bias folded into the kernel (K + 1).
// Returns dual coefficients alpha with scores f = K alpha.
VectorXd fit_kernel_logistic(const MatrixXd& K, const VectorXd& y, double lambda, const SeparabilityOptions& opt) {
  const auto n = K.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  VectorXd alpha = VectorXd::Zero(n);
  auto objective = [&](const VectorXd& a, const VectorXd& f) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += y(i) > 0.5 ? log1p_exp(-f(i)) : log1p_exp(f(i));
    return loss * inv_n + 0.5 * lambda * a.dot(f);
  };
  VectorXd f = K * alpha;
  double J = objective(alpha, f);
  for (std::size_t step = 0; step < opt.max_newton_steps; ++step) {
    VectorXd p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(f(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    const VectorXd r = (p - y) * inv_n + lambda * alpha;
    if (r.lpNorm<Eigen::Infinity>() < opt.tolerance) break;
    MatrixXd A = (w.asDiagonal() * K) * inv_n;
    A.diagonal().array() += lambda;
    const VectorXd delta = A.partialPivLu().solve(-r);
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const VectorXd a = alpha + t * delta;
      const VectorXd fa = K * a;
      const double Ja = objective(a, fa);
      if (Ja <= J) {
        alpha = a;
        f = fa;
        improved = J - Ja > 0.0;
        J = Ja;
        break;
      }
    }
    if (!improved) break;
  }
  return alpha;
}

}  // namespace

std::size_t SampleSet::domains() const {
  std::size_t nd = 0;
  for (std::size_t d : domain) nd = std::max(nd, d + 1);
  return nd;
}

Matrix SampleSet::of_domain(std::size_t d) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == d) idx.push_back(i);
  return points.select_rows(idx);
}

Whitening Whitening::fit(const Matrix& pooled) {
  if (pooled.rows < 2) throw std::invalid_argument("whiten: need at least 2 points");
  const MatrixXd X = to_eigen(pooled);
  const VectorXd mu = X.colwise().mean();
  const MatrixXd C = X.rowwise() - mu.transpose();
  MatrixXd cov = (C.transpose() * C) / static_cast<double>(pooled.rows);
  if (!cov.allFinite()) throw std::invalid_argument("whiten: non-finite covariance");
  const auto dim = static_cast<double>(pooled.cols);
  const double ridge = 1e-6 * cov.trace() / dim;
  cov.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::invalid_argument("whiten: eigendecomposition failed");
  VectorXd inv_sqrt = eig.eigenvalues().array().max(std::numeric_limits<double>::min()).rsqrt();
  const MatrixXd W = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  if (!W.allFinite()) throw std::invalid_argument("whiten: non-finite transform");
  Whitening w;
  w.mean.assign(mu.data(), mu.data() + mu.size());
  w.transform.resize(pooled.cols * pooled.cols);
  for (std::size_t i = 0; i < pooled.cols; ++i)
    for (std::size_t j = 0; j < pooled.cols; ++j)
      w.transform[i * pooled.cols + j] = W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return w;
}

Matrix Whitening::apply(const Matrix& x) const {
  const std::size_t dim = mean.size();
  if (x.cols != dim) throw std::invalid_argument("whiten: dimension mismatch");
  Matrix out(x.rows, dim);
  std::vector<double> c(dim);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t k = 0; k < dim; ++k) c[k] = x(i, k) - mean[k];
    for (std::size_t j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc += c[k] * transform[k * dim + j];
      out(i, j) = acc;
    }
  }
  return out;
}

SampleSet whiten(const SampleSet& s) { return SampleSet{whiten(s.points), s.domain}; }

Matrix whiten(const Matrix& x) { return Whitening::fit(x).apply(x); }

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  std::vector<double> knots{0.0, 1.0};
  for (const auto* s : {&a, &b})
    for (std::size_t i = 0; i < s->size(); ++i)
      knots.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(s->size()));
  std::sort(knots.begin(), knots.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double u0 = knots[k], u1 = knots[k + 1];
    if (u1 <= u0) continue;
    acc += abs_linear_integral(quantile(a, u0) - quantile(b, u0), quantile(a, u1) - quantile(b, u1), u1 - u0);
  }
  return acc;
}

double swd(const Matrix& a, const Matrix& b, std::size_t n_proj, std::uint64_t seed) {
  if (a.rows == 0 || b.rows == 0) throw std::invalid_argument("swd: empty point set");
  if (a.cols != b.cols) throw std::invalid_argument("swd: point sets differ in dimension");
  if (n_proj == 0) throw std::invalid_argument("swd: need at least one projection");
  const std::size_t dim = a.cols;
  if (dim == 1) return wasserstein1(a.column(0), b.column(0));
  Rng rng(seed, Stream::kMetrics);
  std::vector<double> dir(dim), pa(a.rows), pb(b.rows);
  double total = 0.0;
  for (std::size_t p = 0; p < n_proj; ++p) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : dir) v /= norm;
    auto project = [&](const Matrix& m, std::vector<double>& out) {
      for (std::size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) acc += m(i, j) * dir[j];
        out[i] = acc;
      }
    };
    project(a, pa);
    project(b, pb);
    total += wasserstein1(pa, pb);
  }
  return total / static_cast<double>(n_proj);
}

double whitened_swd(const Matrix& a, const Matrix& b, std::size_t n_proj, std::uint64_t seed) {
  const Whitening w = Whitening::fit(vstack(a, b));
  return swd(w.apply(a), w.apply(b), n_proj, seed);
}

double whitened_swd(const SampleSet& s, std::size_t n_proj, std::uint64_t seed) {
  return whitened_swd(s.of_domain(0), s.of_domain(1), n_proj, seed);
}

double domain_separability(const SampleSet& s, std::uint64_t split_seed, const SeparabilityOptions& opt) {
  const std::size_t nd = s.domains();
  if (nd < 2) throw std::invalid_argument("domain_separability: need at least 2 domains");
  if (s.domain.size() != s.points.rows) throw std::invalid_argument("domain_separability: label count mismatch");

  Rng rng(split_seed, Stream::kSplit);
  std::vector<std::size_t> order(s.points.rows);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  if (order.size() > opt.max_points) order.resize(opt.max_points);
  const std::size_t n_train = order.size() * 4 / 5;
  if (n_train < 2 || n_train == order.size()) throw std::invalid_argument("domain_separability: too few points");
  const std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  const MatrixXd Xtr = to_eigen(s.points.select_rows(train));
  const MatrixXd Xte = to_eigen(s.points.select_rows(test));
  auto sq_dists = [](const MatrixXd& A, const MatrixXd& B) -> MatrixXd {
    const VectorXd na = A.rowwise().squaredNorm();
    const VectorXd nb = B.rowwise().squaredNorm();
    MatrixXd D = (-2.0 * A * B.transpose()).colwise() + na;
    D.rowwise() += nb.transpose();
    return D.cwiseMax(0.0);
  };
  const MatrixXd Dtr = sq_dists(Xtr, Xtr);
  const MatrixXd Dte = sq_dists(Xte, Xtr);

  std::vector<double> pair_d;
  for (Eigen::Index i = 0; i < Dtr.rows(); ++i)
    for (Eigen::Index j = i + 1; j < Dtr.cols(); ++j) pair_d.push_back(Dtr(i, j));
  std::nth_element(pair_d.begin(), pair_d.begin() + static_cast<std::ptrdiff_t>(pair_d.size() / 2), pair_d.end());
  const double median = pair_d[pair_d.size() / 2];
  const double gamma0 = median > 0.0 ? 1.0 / median : 1.0;

  // Binary problems fit the last class against the rest; otherwise one-vs-rest.
  std::vector<std::size_t> classes;
  if (nd == 2) classes = {1};
  else
    for (std::size_t c = 0; c < nd; ++c) classes.push_back(c);

  double best = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double gamma = gamma0 * std::pow(4.0, k);
    const MatrixXd Ktr = (-gamma * Dtr).array().exp() + 1.0;
    const MatrixXd Kte = (-gamma * Dte).array().exp() + 1.0;
    for (double lambda : {1e-3, 1e-2, 1e-1}) {
      MatrixXd scores(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(classes.size()));
      for (std::size_t c = 0; c < classes.size(); ++c) {
        VectorXd y(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) y(static_cast<Eigen::Index>(i)) = s.domain[train[i]] == classes[c];
        scores.col(static_cast<Eigen::Index>(c)) = Kte * fit_kernel_logistic(Ktr, y, lambda, opt);
      }
      std::size_t correct = 0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        std::size_t pred;
        const auto row = static_cast<Eigen::Index>(i);
        if (nd == 2) {
          pred = scores(row, 0) > 0.0 ? 1 : 0;
        } else {
          Eigen::Index arg;
          scores.row(row).maxCoeff(&arg);
          pred = static_cast<std::size_t>(arg);
        }
        correct += pred == s.domain[test[i]];
      }
      best = std::max(best, static_cast<double>(correct) / static_cast<double>(test.size()));
    }
  }
  return best;
}

double histogram_jsd(const std::vector<double>& a, const std::vector<double>& b, std::size_t bins) {
  if (a.empty() || b.empty()) throw std::invalid_argument("histogram_jsd: empty sample");
  if (bins == 0) throw std::invalid_argument("histogram_jsd: need at least one bin");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* s : {&a, &b})
    for (double v : *s) {
      if (!std::isfinite(v)) throw std::invalid_argument("histogram_jsd: non-finite sample");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi <= lo) return 0.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  auto histogram = [&](const std::vector<double>& s) {
    std::vector<double> h(bins, 0.0);
    for (double v : s) h[std::min(bins - 1, static_cast<std::size_t>((v - lo) / width))] += 1.0;
    for (double& c : h) c /= static_cast<double>(s.size());
    return h;
  };
  const auto pa = histogram(a), pb = histogram(b);
  double js = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double m = 0.5 * (pa[i] + pb[i]);
    if (pa[i] > 0.0) js += 0.5 * pa[i] * std::log(pa[i] / m);
    if (pb[i] > 0.0) js += 0.5 * pb[i] * std::log(pb[i] / m);
  }
  return js;
}

double dp_gap(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& domains) {
  if (predictions.size() != domains.size()) throw std::invalid_argument("dp_gap: size mismatch");
  double pos[2] = {0.0, 0.0}, count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] > 1) throw std::invalid_argument("dp_gap: predictions must be binary");
    if (domains[i] > 1) throw std::invalid_argument("dp_gap: expects domains 0 and 1");
    pos[domains[i]] += static_cast<double>(predictions[i]);
    count[domains[i]] += 1.0;
  }
  for (int g = 0; g < 2; ++g)
    if (count[g] == 0.0) throw std::invalid_argument("dp_gap: empty group " + std::to_string(g));
  return std::abs(pos[0] / count[0] - pos[1] / count[1]);
}

double accuracy(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& labels) {
  if (predictions.size() != labels.size() || labels.empty()) throw std::invalid_argument("accuracy: size mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace nalign::metrics
