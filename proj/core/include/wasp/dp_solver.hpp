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

#include "wasp/dynamic_program.hpp"
#include "wasp/grid.hpp"

namespace wasp {

/// Per-node diagnostic bits shared by the DP solver and the perturbation pass.
enum NodeFlag : std::uint32_t {
  kNodeOk = 0,
  kNodeIterationLimit = 1u << 0,
  kNodeNoAdmissibleAction = 1u << 1,
  kNodeOutOfGrid = 1u << 2,
  kNodeNotPositiveDefinite = 1u << 3,
  kNodeRegularityViolated = 1u << 4,
  kNodeInfeasible = 1u << 5,
  // Informational: H + eps*H~ was indefinite, so the node used the
  // equality-constrained step instead. Not counted as a failure.
  kNodeEqualityFallback = 1u << 6,
};

/// True when a node carries any failure bit.
inline bool node_failed(std::uint32_t flags) { return (flags & ~kNodeEqualityFallback) != 0; }

struct MomOptions {
  double initial_multiplier = 0.0;
  double initial_penalty = 1.0;
  double penalty_growth = 4.0;
  double multiplier_tolerance = 1e-6;
  double inner_tolerance = 1e-9;
  int max_outer_iterations = 50;
  /// Fraction of flagged nodes above which a sweep fails.
  double max_flagged_fraction = 0.1;

  void validate() const;
};

struct StageStateResult {
  Vector action;
  Vector multiplier;
  double value = 0.0;
  int outer_iterations = 0;
  /// Penalty used in the last inner minimization.
  double final_penalty = 0.0;
  std::uint32_t flags = kNodeOk;
};

/// Value, policy and multiplier tables for stages 0..T (value also for T+1).
/// policy[t] is (nodes x m), multiplier[t] is (nodes x r).
struct DpSolution {
  std::vector<Vector> value;
  std::vector<Matrix> policy;
  std::vector<Matrix> multiplier;
  std::vector<std::vector<std::uint32_t>> flags;
  std::vector<std::vector<int>> outer_iterations;

  int horizon() const { return static_cast<int>(policy.size()) - 1; }
};

/// c_t + V_{t+1}(f_t) + (1/(2 c_p)) sum_k [max(0, mu_k + c_p h_k)^2 - mu_k^2].
double augmented_lagrangian(const DynamicProgramSpec &spec, const StateGrid &grid,
                            const Vector &value_next, int t, const Vector &x,
                            const Vector &u, const Vector &mu, double penalty);

/// Interval of scalar actions inside the search box whose successor stays on
/// the grid. Empty (lower > upper) when there is none.
struct ScalarInterval {
  double lower = 0.0;
  double upper = -1.0;
  bool empty() const { return lower > upper; }
};
ScalarInterval admissible_interval(const DynamicProgramSpec &spec, const StateGrid &grid,
                                   int t, const Vector &x);

/// Method of multipliers at one node.
StageStateResult solve_stage_state(const DynamicProgramSpec &spec, const StateGrid &grid,
                                   const Vector &value_next, int t, const Vector &x,
                                   const MomOptions &options = {});

DpSolution backward_induction(const DynamicProgramSpec &spec, const StateGrid &grid,
                              const MomOptions &options = {});

double interpolate_value(const Vector &table, const StateGrid &grid, const Vector &x);

struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> actions;
  std::vector<double> stage_costs;
  double total_cost = 0.0;
};

/// Closed-loop rollout with interpolated policies. OutOfGrid errors name the
/// stage at which the state left the grid.
Trajectory simulate_trajectory(const DynamicProgramSpec &spec, const StateGrid &grid,
                               const DpSolution &solution, const Vector &x0);

struct KktResidual {
  double stationarity = 0.0;
  double complementarity = 0.0;
};

/// KKT residual of the stored (action, multiplier) at a node, measured against
/// the one-sided derivatives of the interpolated stage objective so that
/// minimizers at interpolation kinks are judged by their subgradient.
KktResidual kkt_residual(const DynamicProgramSpec &spec, const StateGrid &grid,
                         const DpSolution &solution, int t, Index node);

} // namespace wasp
