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

#include "nalign/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nalign/discrete_world.hpp"
#include "nalign/gradcheck.hpp"
#include "nalign/quadrature.hpp"
#include "nalign/random.hpp"

namespace nalign::verify {

namespace {

using oracle::DiscreteWorld;
using oracle::Mixture1D;

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kPi = 3.14159265358979323846;

// Streams local to the verification suites.
constexpr std::uint64_t kOracleStream = 0x0A11;
constexpr std::uint64_t kNjsdStream = 0x0A12;
constexpr std::uint64_t kNoisyStream = 0x0A13;
constexpr std::uint64_t kGradStream = 0x0A14;

// Tracks the worst residual of a check that must stay below a tolerance.
struct Worst {
  double value = 0.0;
  std::size_t violations = 0;
  std::size_t cases = 0;

  void residual(double r, double tol) {
    ++cases;
    if (!(r <= tol)) ++violations;
    if (!(r <= value)) value = r;
  }
  Check check(std::string name, double tol) const {
    return Check{std::move(name), value, tol, violations == 0,
                 std::to_string(cases) + " cases, " + std::to_string(violations) + " violations"};
  }
};

DiscreteWorld random_world(Rng& rng) {
  const std::size_t nx = 2 + rng.index(5);
  const std::size_t nz = 2 + rng.index(5);
  const std::size_t nd = 2 + rng.index(3);
  return DiscreteWorld::random(nx, nz, nd, rng);
}

// Rows are quadrature-friendly sizes: a Gaussian or a GMM with up to three components.
Mixture1D random_density(Rng& rng) { return Mixture1D::random(1 + rng.index(3), rng, 4.0); }

void perturb(const std::vector<ad::Parameter*>& params, Rng& rng, double scale) {
  for (ad::Parameter* p : params)
    for (double& v : p->value) v += scale * rng.normal();
}

losses::Batch random_batch(Rng& rng, std::size_t n, std::size_t dim, std::size_t latent, std::size_t nd) {
  losses::Batch b;
  b.domains = nd;
  for (std::size_t i = 0; i < n; ++i) b.d.push_back(i % nd);
  for (std::size_t i = 0; i < n; ++i) b.y.push_back(rng.index(2));
  b.x = ad::Tensor::constant({n, dim}, rng.normals(n * dim));
  b.eps_z = ad::Tensor::constant({n, latent}, rng.normals(n * latent));
  b.eps_noise = ad::Tensor::constant({n, latent}, rng.normals(n * latent));
  return b;
}

}  // namespace

bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string format_check(const Check& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, " value=%.3e tol=%.1e", c.value, c.tolerance);
  return std::string(c.passed ? "PASS " : "FAIL ") + c.name + buf + (c.detail.empty() ? "" : " (" + c.detail + ")");
}

std::vector<Check> oracle_suite(std::uint64_t seed, std::size_t cases) {
  constexpr double tol = 1e-12;
  Rng rng = Rng(seed, Stream::kData).split(kOracleStream);
  Worst gjsd_mi, gap_identity, gap_formula, lower, tight, prior_gap, cov, fixed, mi_slack, mi_sign;
  for (std::size_t c = 0; c < cases; ++c) {
    const DiscreteWorld w = random_world(rng);
    const oracle::GjsdValue g = oracle::gjsd_exact(w);
    gjsd_mi.residual(std::abs(g.gjsd - g.mutual_information), tol);

    const oracle::VaubValue v = oracle::vaub_exact(w);
    if (!v.infinite) {
      gap_identity.residual(std::abs(v.vaub - g.gjsd - v.gap), tol);
      gap_formula.residual(std::abs(v.gap - (oracle::prior_kl(w) + oracle::decoder_kl(w))), tol);
      lower.residual(std::max(0.0, g.gjsd - v.vaub), tol);
    }
    const DiscreteWorld opt = oracle::with_optimal_variational(w);
    const oracle::VaubValue vo = oracle::vaub_exact(opt);
    tight.residual(std::abs(vo.vaub - g.gjsd), tol);

    // Optimal decoder with the world's own prior: the gap is the prior KL alone.
    DiscreteWorld posterior_decoder = opt;
    for (std::size_t z = 0; z < w.nz(); ++z) posterior_decoder.p_z(z) = w.p_z(z);
    const oracle::VaubValue vp = oracle::vaub_exact(posterior_decoder);
    if (!vp.infinite) prior_gap.residual(std::abs(vp.vaub - g.gjsd - oracle::prior_kl(w)), tol);

    for (std::size_t d = 0; d < w.nd(); ++d) cov.residual(oracle::entropy_cov_check(w, d), tol);

    const std::vector<double> u = rng.dirichlet_ones(w.nz());
    const oracle::FixedPriorCheck f = oracle::fixed_prior_decomposition_check(w, u);
    if (!f.infinite) fixed.residual(f.residual, tol);

    const oracle::MiBoundCheck m = oracle::mi_reconstruction_check(w);
    mi_slack.residual(m.residual, tol);
    mi_sign.residual(std::max(0.0, m.bound - m.mutual_information), tol);
  }
  return {gjsd_mi.check("gjsd equals I(z;d)", tol),
          gap_identity.check("vaub - gjsd equals gap", tol),
          gap_formula.check("gap equals prior KL + decoder KL", tol),
          lower.check("vaub >= gjsd", tol),
          tight.check("vaub = gjsd at optimal variational", tol),
          prior_gap.check("posterior decoder gap equals KL(q(z)||p(z))", tol),
          cov.check("entropy change of variables", tol),
          fixed.check("fixed-prior decomposition", tol),
          mi_slack.check("MI-reconstruction slack equals KL term", tol),
          mi_sign.check("MI-reconstruction bound <= I(x;z|d)", tol)};
}

std::vector<Check> njsd_suite(std::uint64_t seed, std::size_t pairs) {
  Rng rng = Rng(seed, Stream::kData).split(kNjsdStream);
  Worst negative, self, dpi, nsj_single, smoothed_entropy;
  std::size_t zero_distinct = 0;
  double min_distinct = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pairs; ++i) {
    const Mixture1D a = random_density(rng), b = random_density(rng);
    const double s2 = std::exp(rng.uniform(std::log(0.1), std::log(20.0)));
    const double nj = oracle::njsd_quadrature(a, b, s2).value;
    negative.residual(std::max(0.0, -nj), 0.0);
    self.residual(std::abs(oracle::njsd_quadrature(a, a, s2).value), 1e-9);
    // Both on one grid wide enough for the smoothed components.
    const oracle::Quadrature1D q = oracle::Quadrature1D::covering(a.convolved(s2), b.convolved(s2));
    const double plain = oracle::jsd_quadrature(a, b, q).value;
    const double smooth = oracle::njsd_quadrature(a, b, s2, q).value;
    dpi.residual(std::max(0.0, smooth - plain), 1e-9);
    const double single = oracle::nsj(a, b, {{s2, 1.0}}).value;
    nsj_single.residual(single == nj ? 0.0 : std::abs(single - nj) + 1.0, 0.0);
    if (!(nj > 0.0)) ++zero_distinct;
    min_distinct = std::min(min_distinct, nj);

    const double h_clean = oracle::entropy_quadrature(a);
    const double h_smooth = oracle::entropy_quadrature(a.convolved(s2));
    const double h_noise = 0.5 * std::log(2.0 * kPi * std::exp(1.0) * s2);
    smoothed_entropy.residual(std::max(0.0, std::max(h_clean, h_noise) - h_smooth), 1e-9);
  }
  return {negative.check("njsd >= 0", 0.0),
          self.check("njsd(p,p) = 0", 1e-9),
          dpi.check("njsd <= jsd", 1e-9),
          nsj_single.check("nsj with one level equals njsd bit-exactly", 0.0),
          Check{"nsj > 0 on distinct pairs", min_distinct, 0.0, zero_distinct == 0,
                std::to_string(pairs) + " pairs, minimum shown"},
          smoothed_entropy.check("smoothed entropy >= max(H(p), H(noise))", 1e-9)};
}

std::vector<Check> noisy_bound_suite(std::uint64_t seed, std::size_t worlds, const std::vector<double>& sigma2s) {
  constexpr double tol = 1e-6;
  Rng rng = Rng(seed, Stream::kData).split(kNoisyStream);
  std::vector<Check> out;
  std::vector<DiscreteWorld> ws;
  for (std::size_t i = 0; i < worlds; ++i) ws.push_back(random_world(rng));
  for (double s2 : sigma2s) {
    Worst w;
    for (const DiscreteWorld& world : ws) {
      const oracle::NoisyBoundCheck c = oracle::noisy_bound_check(world, s2);
      w.residual(std::max(0.0, c.ngjsd - c.nvaub), tol);
    }
    char name[64];
    std::snprintf(name, sizeof name, "nvaub >= ngjsd at sigma2=%g", s2);
    out.push_back(w.check(name, tol));
  }
  return out;
}

std::vector<Check> landscape_suite() {
  using oracle::LandscapeFamily;
  std::vector<Check> out;
  const double flat = std::abs(oracle::landscape_slope(LandscapeFamily::kTwoGaussian, 40.0, 0.0));
  out.push_back({"two-gaussian slope at offset 40, sigma2=0 below 1e-8", flat, 1e-8, flat < 1e-8, ""});
  const double steep = std::abs(oracle::landscape_slope(LandscapeFamily::kTwoGaussian, 40.0, 100.0));
  out.push_back({"two-gaussian slope at offset 40, sigma2=100 above 1e-4", steep, 1e-4, steep > 1e-4, ""});
  const double sat = std::abs(oracle::landscape_value(LandscapeFamily::kTwoGaussian, 40.0, 0.0) - kLn2);
  out.push_back({"two-gaussian jsd at offset 40 equals ln 2", sat, 1e-9, sat < 1e-9, ""});

  std::vector<double> offsets;
  for (int i = -160; i <= 160; ++i) offsets.push_back(0.1 * i);
  const oracle::Landscape l = oracle::njsd_landscape(LandscapeFamily::kShiftedGmm, offsets, {0.0, 64.0});
  const std::size_t clean = oracle::count_interior_minima(l.values[0]);
  const std::size_t noisy = oracle::count_interior_minima(l.values[1]);
  out.push_back({"shifted-gmm sigma2=0 has >= 2 interior minima", static_cast<double>(clean), 2.0, clean >= 2, ""});
  out.push_back({"shifted-gmm sigma2=64 has exactly 1 interior minimum", static_cast<double>(noisy), 1.0, noisy == 1, ""});
  return out;
}

Check grad_audit(losses::LossKind kind, std::uint64_t seed, std::size_t configs, double tolerance) {
  using losses::LossKind;
  Rng rng = Rng(seed, Stream::kInit).split(kGradStream + static_cast<std::uint64_t>(kind));
  double worst = 0.0;
  std::size_t failures = 0;
  for (std::size_t c = 0; c < configs; ++c) {
    const std::size_t nd = 2 + rng.index(2);
    const std::size_t dim = 1 + rng.index(3);
    const bool flow = kind == LossKind::kAub || kind == LossKind::kNaub;
    const std::size_t latent = flow ? dim : 1 + rng.index(2);
    const std::size_t hidden = 3 + rng.index(3);
    const std::size_t n = 4 + rng.index(4);
    const double beta = rng.uniform(0.1, 1.0);
    const double sigma2 = rng.uniform(0.5, 5.0);
    const losses::Batch b = random_batch(rng, n, dim, latent, nd);

    models::EncoderConfig ec{dim, latent, hidden, 2 + rng.index(2), nd, rng.uniform() < 0.3, false};
    models::DecoderConfig dc{latent, dim, hidden, 2 + rng.index(2), nd, rng.uniform() < 0.5, false};
    const models::CondEncoder enc(ec, rng);
    const models::CondDecoder dec(dc, rng);
    dist::GmmPrior prior(1 + rng.index(3), latent, 1.0, rng);
    models::FlowAligner fl(models::FlowConfig{dim, nd, 2 + rng.index(2), hidden}, rng);
    fl.randomize(rng, 0.5);
    const models::Discriminator disc(models::DiscriminatorConfig{latent, hidden, 2, nd}, rng);
    losses::PnpEncoder pnp(models::Mlp("g", models::layer_dims(dim, hidden, 2, latent), rng), nd, hidden, 2, rng);

    models::CondEncoder e = enc;
    models::CondDecoder de = dec;
    models::Discriminator di = disc;
    std::vector<ad::Parameter*> params;
    ad::Objective f;
    const auto efn = losses::encoder_fn(e);
    switch (kind) {
      case LossKind::kVaub:
        params = models::collect(e, de, prior);
        f = [&](ad::Tape& t) { return losses::vaub_loss(t, b, efn, de, prior).total; };
        break;
      case LossKind::kBetaVaub:
        params = models::collect(e, de, prior);
        f = [&](ad::Tape& t) { return losses::beta_vaub_loss(t, b, efn, de, prior, beta).total; };
        break;
      case LossKind::kNvaub:
        params = models::collect(e, de, prior);
        f = [&](ad::Tape& t) { return losses::nvaub_loss(t, b, efn, de, prior, beta, sigma2).total; };
        break;
      case LossKind::kAub:
        params = models::collect(fl, prior);
        f = [&](ad::Tape& t) { return losses::aub_loss(t, b, fl, prior).total; };
        break;
      case LossKind::kNaub:
        params = models::collect(fl, prior);
        f = [&](ad::Tape& t) { return losses::naub_loss(t, b, fl, prior, sigma2).total; };
        break;
      case LossKind::kPnp:
        params = models::collect(pnp, de, prior);
        f = [&](ad::Tape& t) { return losses::pnp_loss(t, b, pnp, de, prior, beta).total; };
        break;
      case LossKind::kAdv:
        params = models::collect(e, de, di);
        f = [&](ad::Tape& t) {
          const auto terms = losses::autoencoder_terms(t, b, efn, de);
          return terms.recon + losses::adversarial_losses(t, b, terms.z, di).g_loss;
        };
        break;
    }
    perturb(params, rng, 0.3);
    if (kind == LossKind::kAdv) {
      // The discriminator objective sees detached latents, so only its own parameters move it.
      const ad::Objective fd = [&](ad::Tape& t) {
        const auto terms = losses::autoencoder_terms(t, b, efn, de);
        return losses::adversarial_losses(t, b, terms.z, di).d_loss;
      };
      const double err = ad::check_gradients(fd, di.parameters()).max_rel_error;
      worst = std::max(worst, err);
      if (!(err < tolerance)) ++failures;
    }
    const ad::GradCheckReport r = ad::check_gradients(f, params);
    worst = std::max(worst, r.max_rel_error);
    if (!(r.max_rel_error < tolerance)) ++failures;
  }
  return Check{"grad " + losses::loss_kind_name(kind), worst, tolerance, failures == 0,
               std::to_string(configs) + " configurations, " + std::to_string(failures) + " failures"};
}

}  // namespace nalign::verify
