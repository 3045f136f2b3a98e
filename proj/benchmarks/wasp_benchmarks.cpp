/*
 * Copyright 2026 The WASP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <random>

#include <benchmark/benchmark.h>

#include "wasp/dp_solver.hpp"
#include "wasp/problems.hpp"
#include "wasp/qp.hpp"
#include "wasp/value_calculus.hpp"
#include "wasp/wasp.hpp"

namespace {

using namespace wasp;

Matrix random_spd(std::mt19937_64 &rng, Index n) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Index i = 0; i < m.size(); ++i) {
    m(i) = normal(rng);
  }
  return m * m.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

Vector random_vector(std::mt19937_64 &rng, Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = normal(rng);
  }
  return v;
}

void BM_EqualityQpPerturbation(benchmark::State &state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(1);
  const Matrix h = random_spd(rng, n);
  Matrix ht = random_spd(rng, n);
  const Matrix a = random_spd(rng, n).topRows(n / 2);
  const QuadraticProgram qp(h, random_vector(rng, n), a, random_vector(rng, n / 2));
  const QpSolution sol = solve_equality_qp(qp);
  const QpPerturbation pert{ht, random_vector(rng, n), random_vector(rng, n / 2), 1e-2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(perturb_qp(qp, sol, pert));
  }
}
BENCHMARK(BM_EqualityQpPerturbation)->Arg(4)->Arg(16)->Arg(64);

void BM_InequalityQp(benchmark::State &state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(2);
  const Matrix h = random_spd(rng, n);
  const Vector e = 5.0 * random_vector(rng, n);
  // Box |d_i| <= 0.1, so several rows end up active.
  Matrix a(2 * n, n);
  a << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  const Vector b = Vector::Constant(2 * n, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_inequality_qp(h, e, a, b));
  }
}
BENCHMARK(BM_InequalityQp)->Arg(2)->Arg(8)->Arg(32);

void BM_GridDerivatives(benchmark::State &state) {
  const Index nodes = state.range(0);
  const StateGrid grid({Axis{0.0, 1.0, nodes}, Axis{0.0, 1.0, nodes}});
  Vector values(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Vector x = grid.point(i);
    values(i) = std::sin(3 * x(0)) * std::cos(2 * x(1));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_gradient_hessian(values, grid));
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_GridDerivatives)->Arg(32)->Arg(128);

VelocityTrackingProblem perturbed_velocity() {
  VelocityTrackingProblem p;
  p.v_ref_tilde = 12.4;
  p.w_p_tilde = 5.3;
  p.a_max_tilde = 2.1;
  p.a_min_tilde = -1.95;
  return p;
}

void BM_VelocityBaseDp(benchmark::State &state) {
  const VelocityTrackingSpec spec(perturbed_velocity());
  const StateGrid grid({Axis{2.0, 22.0, state.range(0)}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_induction(spec, grid));
  }
}
BENCHMARK(BM_VelocityBaseDp)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_VelocityPerturbedDp(benchmark::State &state) {
  const VelocityTrackingProblem p = perturbed_velocity();
  const VelocityTrackingSpec spec(p);
  const VelocityTrackingPerturbation pert(p);
  const PerturbedProgram perturbed(spec, pert);
  const StateGrid grid({Axis{2.0, 22.0, state.range(0)}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_induction(perturbed, grid));
  }
}
BENCHMARK(BM_VelocityPerturbedDp)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_VelocityWaspPass(benchmark::State &state) {
  const VelocityTrackingProblem p = perturbed_velocity();
  const VelocityTrackingSpec spec(p);
  const VelocityTrackingPerturbation pert(p);
  const StateGrid grid({Axis{2.0, 22.0, state.range(0)}});
  const DpSolution base = backward_induction(spec, grid);
  WaspOptions options;
  options.mode = state.range(1) == 0 ? WaspMode::Inequality : WaspMode::Equality;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasp_backward_pass(spec, pert, base, grid, options));
  }
}
BENCHMARK(BM_VelocityWaspPass)
    ->ArgsProduct({{201, 401}, {0, 1}})
    ->ArgNames({"nodes", "equality"})
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
