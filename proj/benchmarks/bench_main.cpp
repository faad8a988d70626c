// Copyright 2026 The qrnme Authors
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

#include <random>

#include "qrnme/dynamics.hpp"
#include "qrnme/experiments.hpp"
#include "qrnme/linalg.hpp"
#include "qrnme/neural.hpp"
#include "qrnme/qrn.hpp"

namespace {

using namespace qrnme;
using linalg::CMatrix;

CMatrix random_hermitian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return (a + linalg::adjoint(a)) * linalg::Complex{0.5, 0.0};
}

void BM_HermEig(benchmark::State& state) {
  const CMatrix a = random_hermitian(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::herm_eig(a));
}
BENCHMARK(BM_HermEig)->Arg(2)->Arg(4)->Arg(16);

void BM_Expm(benchmark::State& state) {
  const CMatrix a =
      random_hermitian(static_cast<std::size_t>(state.range(0)), 2) * linalg::Complex{0.0, -0.1};
  for (auto _ : state) benchmark::DoNotOptimize(linalg::expm(a));
}
BENCHMARK(BM_Expm)->Arg(4)->Arg(16);

void BM_Rk4TwoQubit(benchmark::State& state) {
  const auto model = dynamics::two_qubit_model(1.0, {}, {0.5, 2.0}, {0.2, 1.0});
  const auto rho = dynamics::sample_random_state(4, std::uint64_t{3});
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::rk4_step_raw(rho.mat(), model, 0.3, 0.01));
}
BENCHMARK(BM_Rk4TwoQubit);

void BM_GruForward(benchmark::State& state) {
  const auto net = neural::init_params({8, 40, 8, 2}, 4);
  const std::vector<double> x(8, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(neural::network_forward_rollout(x, 70, net));
}
BENCHMARK(BM_GruForward);

void BM_GruBackward(benchmark::State& state) {
  const auto net = neural::init_params({8, 40, 8, 2}, 4);
  const std::vector<double> x(8, 0.1);
  const auto tape = neural::network_forward_rollout(x, 70, net);
  const std::vector<std::vector<double>> dy(70, std::vector<double>(8, 1e-3));
  for (auto _ : state) benchmark::DoNotOptimize(neural::backward(tape, dy, net));
}
BENCHMARK(BM_GruBackward);

void BM_ExampleLossAndGrad(benchmark::State& state) {
  auto c = experiments::ExperimentConfig::defaults(static_cast<int>(state.range(0)));
  c.threads = 1;
  const auto ds = experiments::generate_dataset(c, experiments::Split::train, 1, c.train_steps());
  const auto st = experiments::init_training(c);
  for (auto _ : state)
    benchmark::DoNotOptimize(experiments::example_loss_and_grad(st.net, ds.records[0], c));
}
BENCHMARK(BM_ExampleLossAndGrad)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
