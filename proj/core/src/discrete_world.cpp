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

#include "nalign/discrete_world.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nalign::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// p * log(p / q) with 0 log 0 = 0 and +inf for q = 0 < p.
double kl_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  if (q <= 0.0) return kInf;
  return p * std::log(p / q);
}

void check_slice(double total, double tol, const std::string& what) {
  if (std::abs(total - 1.0) > tol) throw std::invalid_argument(what + " sums to " + std::to_string(total));
}

}  // namespace

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += kl_term(p[i], q[i]);
  return s;
}

DiscreteWorld::DiscreteWorld(std::size_t nx, std::size_t nz, std::size_t nd)
    : nx_(nx), nz_(nz), nd_(nd), q_xd_(nx * nd), q_z_xd_(nz * nx * nd), p_x_zd_(nx * nz * nd), p_z_(nz) {
  if (nx == 0 || nz == 0 || nd == 0) throw std::invalid_argument("DiscreteWorld: empty alphabet");
  if (nx > kMaxAlphabet || nz > kMaxAlphabet || nd > kMaxDomains)
    throw std::invalid_argument("DiscreteWorld: alphabets capped at 16 symbols and 4 domains");
}

DiscreteWorld DiscreteWorld::random(std::size_t nx, std::size_t nz, std::size_t nd, Rng& rng) {
  DiscreteWorld w(nx, nz, nd);
  const auto joint = rng.dirichlet_ones(nx * nd);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t d = 0; d < nd; ++d) w.q_xd(x, d) = joint[x * nd + d];
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t d = 0; d < nd; ++d) {
      const auto row = rng.dirichlet_ones(nz);
      for (std::size_t z = 0; z < nz; ++z) w.q_z_given_xd(z, x, d) = row[z];
    }
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t d = 0; d < nd; ++d) {
      const auto row = rng.dirichlet_ones(nx);
      for (std::size_t x = 0; x < nx; ++x) w.p_x_given_zd(x, z, d) = row[x];
    }
  w.p_z_ = rng.dirichlet_ones(nz);
  return w;
}

double DiscreteWorld::q_d(std::size_t d) const {
  double s = 0.0;
  for (std::size_t x = 0; x < nx_; ++x) s += q_xd(x, d);
  return s;
}

double DiscreteWorld::q_x_given_d(std::size_t x, std::size_t d) const {
  const double qd = q_d(d);
  return qd > 0.0 ? q_xd(x, d) / qd : 0.0;
}

double DiscreteWorld::q_z_given_d(std::size_t z, std::size_t d) const {
  double s = 0.0;
  for (std::size_t x = 0; x < nx_; ++x) s += q_x_given_d(x, d) * q_z_given_xd(z, x, d);
  return s;
}

double DiscreteWorld::q_z(std::size_t z) const {
  double s = 0.0;
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t d = 0; d < nd_; ++d) s += q_xd(x, d) * q_z_given_xd(z, x, d);
  return s;
}

double DiscreteWorld::q_x_given_zd(std::size_t x, std::size_t z, std::size_t d) const {
  double denom = 0.0;
  for (std::size_t xx = 0; xx < nx_; ++xx) denom += q_xd(xx, d) * q_z_given_xd(z, xx, d);
  return denom > 0.0 ? q_xd(x, d) * q_z_given_xd(z, x, d) / denom : 0.0;
}

void DiscreteWorld::validate(double tol) const {
  auto nonneg = [](const std::vector<double>& v, const char* what) {
    for (double p : v)
      if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + " has a negative or NaN entry");
  };
  nonneg(q_xd_, "q(x,d)");
  nonneg(q_z_xd_, "q(z|x,d)");
  nonneg(p_x_zd_, "p(x|z,d)");
  nonneg(p_z_, "p(z)");
  double total = 0.0;
  for (double p : q_xd_) total += p;
  check_slice(total, tol, "q(x,d)");
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t d = 0; d < nd_; ++d) {
      double s = 0.0;
      for (std::size_t z = 0; z < nz_; ++z) s += q_z_given_xd(z, x, d);
      check_slice(s, tol, "q(z|x=" + std::to_string(x) + ",d=" + std::to_string(d) + ")");
    }
  for (std::size_t z = 0; z < nz_; ++z)
    for (std::size_t d = 0; d < nd_; ++d) {
      double s = 0.0;
      for (std::size_t x = 0; x < nx_; ++x) s += p_x_given_zd(x, z, d);
      check_slice(s, tol, "p(x|z=" + std::to_string(z) + ",d=" + std::to_string(d) + ")");
    }
  total = 0.0;
  for (double p : p_z_) total += p;
  check_slice(total, tol, "p(z)");
}

GjsdValue gjsd_exact(const DiscreteWorld& w) {
  GjsdValue out;
  std::vector<double> qz(w.nz());
  for (std::size_t z = 0; z < w.nz(); ++z) qz[z] = w.q_z(z);
  double within = 0.0;
  for (std::size_t d = 0; d < w.nd(); ++d) {
    std::vector<double> qzd(w.nz());
    for (std::size_t z = 0; z < w.nz(); ++z) qzd[z] = w.q_z_given_d(z, d);
    within += w.q_d(d) * entropy(qzd);
  }
  out.gjsd = entropy(qz) - within;

  // Independent route: joint q(z, d) = sum_x q(x, d) q(z | x, d).
  double mi = 0.0;
  for (std::size_t z = 0; z < w.nz(); ++z)
    for (std::size_t d = 0; d < w.nd(); ++d) {
      double joint = 0.0;
      for (std::size_t x = 0; x < w.nx(); ++x) joint += w.q_xd(x, d) * w.q_z_given_xd(z, x, d);
      if (joint > 0.0) mi += joint * std::log(joint / (qz[z] * w.q_d(d)));
    }
  out.mutual_information = mi;
  return out;
}

VariationalOptimum optimal_variational(const DiscreteWorld& w) {
  VariationalOptimum opt;
  opt.p_z.resize(w.nz());
  for (std::size_t z = 0; z < w.nz(); ++z) opt.p_z[z] = w.q_z(z);
  opt.p_x_given_zd.assign(w.nx() * w.nz() * w.nd(), 0.0);
  for (std::size_t z = 0; z < w.nz(); ++z)
    for (std::size_t d = 0; d < w.nd(); ++d) {
      const bool empty = w.q_z_given_d(z, d) <= 0.0;
      for (std::size_t x = 0; x < w.nx(); ++x)
        opt.p_x_given_zd[(x * w.nz() + z) * w.nd() + d] =
            empty ? 1.0 / static_cast<double>(w.nx()) : w.q_x_given_zd(x, z, d);
    }
  return opt;
}

DiscreteWorld with_optimal_variational(const DiscreteWorld& w) {
  DiscreteWorld out = w;
  const auto opt = optimal_variational(w);
  for (std::size_t z = 0; z < w.nz(); ++z) out.p_z(z) = opt.p_z[z];
  for (std::size_t x = 0; x < w.nx(); ++x)
    for (std::size_t z = 0; z < w.nz(); ++z)
      for (std::size_t d = 0; d < w.nd(); ++d)
        out.p_x_given_zd(x, z, d) = opt.p_x_given_zd[(x * w.nz() + z) * w.nd() + d];
  return out;
}

double ratio_term(const DiscreteWorld& w) {
  double s = 0.0;
  for (std::size_t x = 0; x < w.nx(); ++x)
    for (std::size_t d = 0; d < w.nd(); ++d)
      for (std::size_t z = 0; z < w.nz(); ++z) {
        const double mass = w.q_xd(x, d) * w.q_z_given_xd(z, x, d);
        if (mass <= 0.0) continue;
        const double p = w.p_x_given_zd(x, z, d);
        if (p <= 0.0) return kInf;
        s += mass * (-std::log(p) + std::log(w.q_z_given_xd(z, x, d)));
      }
  return s;
}

double data_entropy(const DiscreteWorld& w) {
  double s = 0.0;
  for (std::size_t d = 0; d < w.nd(); ++d) {
    std::vector<double> qx(w.nx());
    for (std::size_t x = 0; x < w.nx(); ++x) qx[x] = w.q_x_given_d(x, d);
    s += w.q_d(d) * entropy(qx);
  }
  return s;
}

double prior_kl(const DiscreteWorld& w) {
  double s = 0.0;
  for (std::size_t z = 0; z < w.nz(); ++z) s += kl_term(w.q_z(z), w.p_z(z));
  return s;
}

double decoder_kl(const DiscreteWorld& w) {
  double s = 0.0;
  for (std::size_t d = 0; d < w.nd(); ++d)
    for (std::size_t z = 0; z < w.nz(); ++z) {
      const double weight = w.q_d(d) * w.q_z_given_d(z, d);
      if (weight <= 0.0) continue;
      double k = 0.0;
      for (std::size_t x = 0; x < w.nx(); ++x) k += kl_term(w.q_x_given_zd(x, z, d), w.p_x_given_zd(x, z, d));
      s += weight * k;
    }
  return s;
}

VaubValue vaub_exact(const DiscreteWorld& w) {
  VaubValue out;
  double cross = 0.0;  // E_q[-log p(z)]
  for (std::size_t z = 0; z < w.nz(); ++z) {
    const double qz = w.q_z(z);
    if (qz <= 0.0) continue;
    if (w.p_z(z) <= 0.0) {
      cross = kInf;
      break;
    }
    cross -= qz * std::log(w.p_z(z));
  }
  const double ratio = ratio_term(w);
  if (std::isinf(cross) || std::isinf(ratio)) {
    out.vaub = out.gap = kInf;
    out.infinite = true;
    return out;
  }
  out.vaub = ratio + cross - data_entropy(w);
  out.gap = prior_kl(w) + decoder_kl(w);
  return out;
}

double entropy_cov_check(const DiscreteWorld& w, std::size_t d) {
  if (d >= w.nd()) throw std::out_of_range("entropy_cov_check: domain out of range");
  std::vector<double> qz(w.nz()), qx(w.nx());
  for (std::size_t z = 0; z < w.nz(); ++z) qz[z] = w.q_z_given_d(z, d);
  for (std::size_t x = 0; x < w.nx(); ++x) qx[x] = w.q_x_given_d(x, d);
  double log_ratio = 0.0;
  double post_kl = 0.0;
  for (std::size_t x = 0; x < w.nx(); ++x)
    for (std::size_t z = 0; z < w.nz(); ++z) {
      const double mass = qx[x] * w.q_z_given_xd(z, x, d);
      if (mass <= 0.0) continue;
      log_ratio += mass * (std::log(w.p_x_given_zd(x, z, d)) - std::log(w.q_z_given_xd(z, x, d)));
    }
  for (std::size_t z = 0; z < w.nz(); ++z) {
    if (qz[z] <= 0.0) continue;
    double k = 0.0;
    for (std::size_t x = 0; x < w.nx(); ++x) k += kl_term(w.q_x_given_zd(x, z, d), w.p_x_given_zd(x, z, d));
    post_kl += qz[z] * k;
  }
  return std::abs(entropy(qz) - (entropy(qx) + log_ratio + post_kl));
}

FixedPriorCheck fixed_prior_decomposition_check(const DiscreteWorld& w, const std::vector<double>& u) {
  if (u.size() != w.nz()) throw std::invalid_argument("fixed_prior_decomposition_check: prior size mismatch");
  FixedPriorCheck out;
  const DiscreteWorld opt = with_optimal_variational(w);
  std::vector<double> qz(w.nz());
  for (std::size_t z = 0; z < w.nz(); ++z) qz[z] = w.q_z(z);
  out.kl_to_fixed = kl(qz, u);
  if (std::isinf(out.kl_to_fixed)) {
    out.infinite = true;
    out.residual = out.fixed_prior_objective = kInf;
    return out;
  }
  const double ratio = ratio_term(opt);
  double ce_fixed = 0.0, ce_learned = 0.0;
  for (std::size_t z = 0; z < w.nz(); ++z) {
    if (qz[z] <= 0.0) continue;
    ce_fixed -= qz[z] * std::log(u[z]);
    ce_learned -= qz[z] * std::log(qz[z]);
  }
  out.fixed_prior_objective = ratio + ce_fixed;
  out.learned_prior_objective = ratio + ce_learned;
  out.residual = std::abs(out.fixed_prior_objective - out.learned_prior_objective - out.kl_to_fixed);
  return out;
}

MiBoundCheck mi_reconstruction_check(const DiscreteWorld& w) {
  MiBoundCheck out;
  double mi = 0.0, recon = 0.0;
  for (std::size_t d = 0; d < w.nd(); ++d) {
    const double qd = w.q_d(d);
    if (qd <= 0.0) continue;
    for (std::size_t x = 0; x < w.nx(); ++x)
      for (std::size_t z = 0; z < w.nz(); ++z) {
        const double joint = w.q_x_given_d(x, d) * w.q_z_given_xd(z, x, d);  // q(x, z | d)
        if (joint <= 0.0) continue;
        mi += qd * joint * std::log(joint / (w.q_x_given_d(x, d) * w.q_z_given_d(z, d)));
        recon += qd * joint * std::log(w.p_x_given_zd(x, z, d));
      }
  }
  out.mutual_information = mi;
  out.bound = recon + data_entropy(w);
  out.kl_term = decoder_kl(w);
  out.residual = std::abs(out.mutual_information - out.bound - out.kl_term);
  return out;
}

}  // namespace nalign::oracle
