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

#pragma once

#include <cstdint>
#include <vector>

#include "wasp/dp_solver.hpp"
#include "wasp/dynamic_program.hpp"
#include "wasp/grid.hpp"
#include "wasp/value_calculus.hpp"

namespace wasp {

enum class WaspMode { Equality, Inequality, TrajectoryFrozen };

struct WaspOptions {
  WaspMode mode = WaspMode::Inequality;
  /// Constraints with stored multiplier above this are treated as active.
  double active_threshold = 1e-8;
  double max_flagged_fraction = 0.1;
  /// Initial state of the nominal trajectory (TrajectoryFrozen mode only).
  Vector trajectory_start;
};

/// Local quadratic model of one stage at (x, u*, mu*).
struct StageMatrices {
  Matrix h;          // Hessian of c_t + V_{t+1} o f_t
  Vector e;          // gradient of c_t + V_{t+1} o f_t
  Matrix h_tilde;    // Hessian of c~_t + V~_{t+1} o f_t
  Vector e_tilde;    // gradient of c~_t + V~_{t+1} o f_t
  Matrix a;          // active constraint rows
  Vector b_tilde;    // -h~ on the active rows
  Matrix a_hat;      // all constraint rows
  Vector b_hat;      // -h - eps h~
  Vector h_value;    // h_t(x, u*)
  std::vector<Index> active;
};

/// Inputs of the stage computation that depend only on stage t+1.
struct NextStage {
  const Vector &value;
  const GridDerivatives &value_derivatives;
  const Vector &delta_value;
  const GridDerivatives &delta_derivatives;
};

StageMatrices build_stage_matrices(const DynamicProgramSpec &spec,
                                   const PerturbationSpec &pert, const StateGrid &grid,
                                   const NextStage &next, int t, const Vector &x,
                                   const Vector &u, const Vector &mu,
                                   double active_threshold = 1e-8);

/// Per-unit-epsilon step with the active set frozen.
Vector stage_delta_equality(const StageMatrices &mats);

struct InequalityDelta {
  /// Step including the factor epsilon.
  Vector d;
  int iterations = 0;
};

/// Step from the inequality-constrained subproblem. The unperturbed
/// subproblem is solved as well and its minimizer subtracted, so that the
/// returned step is exactly zero when the perturbation vanishes.
InequalityDelta stage_delta_inequality(const StageMatrices &mats, double epsilon);

/// V~_t(x) = c~_t(x, u*) + V~_{t+1}(f_t(x, u*)) + e^T d.
double stage_value_delta(const DynamicProgramSpec &spec, const PerturbationSpec &pert,
                         const StateGrid &grid, const Vector &delta_value_next, int t,
                         const Vector &x, const Vector &u, const Vector &e,
                         const Vector &d);

struct WaspResult {
  WaspMode mode = WaspMode::Inequality;
  double epsilon = 0.0;
  /// Stages 0..T, (nodes x m).
  std::vector<Matrix> delta_policy;
  /// Stages 0..T+1.
  std::vector<Vector> delta_value;
  std::vector<Matrix> policy;
  std::vector<Vector> value;
  std::vector<std::vector<std::uint32_t>> flags;
  std::vector<std::vector<int>> qp_iterations;
  std::vector<std::vector<int>> active_count;
};

WaspResult wasp_backward_pass(const DynamicProgramSpec &spec, const PerturbationSpec &pert,
                              const DpSolution &base, const StateGrid &grid,
                              const WaspOptions &options = {});

} // namespace wasp
