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

#include <benchmark/benchmark.h>

#include "nalign/autodiff.hpp"
#include "nalign/distributions.hpp"
#include "nalign/metrics.hpp"
#include "nalign/models.hpp"
#include "nalign/quadrature.hpp"
#include "nalign/random.hpp"

namespace {

using namespace nalign;

// Forward pass and reverse sweep of the moons-sized MLP on one minibatch.
void BM_MlpForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0, 1);
  const models::Mlp net("net", {2, 20, 20, 20, 1}, rng);
  const std::vector<double> x = rng.normals(n * 2);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Tensor out = ad::mean(net.forward(tape, tape.variable({n, 2}, x)));
    tape.backward(out);
    benchmark::DoNotOptimize(tape.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(128)->Arg(1000);

void BM_GmmLogProb(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0, 1);
  const dist::GmmPrior prior(10, 1, 3.0, rng);
  const std::vector<double> z = rng.normals(n);
  for (auto _ : state) {
    ad::Tape tape;
    const dist::Gmm g = prior.bind(tape);
    const ad::Tensor lp = ad::sum(dist::gmm_log_prob(tape.variable({n, 1}, z), g));
    tape.backward(lp);
    benchmark::DoNotOptimize(lp.item());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_GmmLogProb)->Arg(128)->Arg(1000);

void BM_WhitenedSwd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0, 1);
  const Matrix a(n, 2, rng.normals(n * 2));
  Matrix b(n, 2, rng.normals(n * 2));
  for (double& v : b.data) v += 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(metrics::whitened_swd(a, b, 1000, 7));
}
BENCHMARK(BM_WhitenedSwd)->Arg(500);

void BM_JsdQuadrature(benchmark::State& state) {
  const auto a = oracle::Mixture1D::gaussian(0.0, 1.0);
  const auto b = oracle::Mixture1D::gaussian(40.0, 1.0);
  const auto q = oracle::Quadrature1D::covering(a, b);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::jsd_quadrature(a, b, q).value);
}
BENCHMARK(BM_JsdQuadrature);

void BM_NjsdQuadrature(benchmark::State& state) {
  const auto a = oracle::Mixture1D::gaussian(0.0, 1.0);
  const auto b = oracle::Mixture1D::gaussian(40.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::njsd_quadrature(a, b, 100.0).value);
}
BENCHMARK(BM_NjsdQuadrature);

}  // namespace
BENCHMARK_MAIN();
