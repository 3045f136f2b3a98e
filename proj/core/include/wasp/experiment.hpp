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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wasp/dp_solver.hpp"
#include "wasp/grid.hpp"
#include "wasp/problems.hpp"
#include "wasp/wasp.hpp"

namespace wasp {

enum class ProblemKind { Velocity, Resource };
enum class PerturbationKind { Explicit, Random, Zero };

struct PerturbationConfig {
  PerturbationKind kind = PerturbationKind::Explicit;
  std::optional<std::uint64_t> seed;
  /// Standard deviation of the Gaussian shift applied to acceleration bounds.
  double sigma = 0.1;
  /// Half-width of the uniform relative change applied to weights, v_ref and
  /// resource coefficients.
  double relative_spread = 0.1;
  double epsilon = 1.0;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Velocity;
  VelocityTrackingProblem velocity;
  ResourceAllocationProblem resource;
  std::vector<Axis> grid;
  MomOptions solver;
  WaspMode mode = WaspMode::Inequality;
  PerturbationConfig perturbation;
  std::string output_directory;

  /// Throws ConfigError for invalid problem, grid or solver settings.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json &j);
ExperimentConfig load_config(const std::string &path);
nlohmann::json config_to_json(const ExperimentConfig &config);

/// Resolves random or zero perturbations into explicit perturbed parameters.
ExperimentConfig resolve_perturbation(const ExperimentConfig &config);

/// Velocity perturbation drawn from `seed`: v_ref, w_p and w_e scaled by a
/// uniform factor in [1 - spread, 1 + spread], bounds shifted by N(0, sigma^2).
VelocityTrackingProblem draw_velocity_perturbation(const VelocityTrackingProblem &nominal,
                                                   std::uint64_t seed, double sigma,
                                                   double spread);

struct ProblemInstance {
  std::unique_ptr<DynamicProgramSpec> spec;
  std::unique_ptr<PerturbationSpec> perturbation;
};
ProblemInstance make_problem(const ExperimentConfig &resolved);

struct StageMetrics {
  int stage = 0;
  double value_wasp_max = 0.0;
  double value_wasp_mean = 0.0;
  double value_unperturbed_max = 0.0;
  double value_unperturbed_mean = 0.0;
  double policy_wasp_max = 0.0;
  double policy_wasp_mean = 0.0;
  double policy_unperturbed_max = 0.0;
  double policy_unperturbed_mean = 0.0;
};

struct PhaseTimings {
  double base_dp = 0.0;
  double wasp = 0.0;
  double perturbed_dp = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::optional<StateGrid> grid;
  std::optional<DpSolution> base;
  std::optional<WaspResult> wasp;
  std::optional<DpSolution> perturbed;
  std::vector<StageMetrics> metrics;
  PhaseTimings timings;
};

/// Per-stage errors of the first-order estimate and of the unperturbed
/// solution, both against the perturbed solution, over all nodes.
std::vector<StageMetrics> compute_metrics(const DpSolution &base, const WaspResult &wasp,
                                          const DpSolution &perturbed);

/// Base DP only.
RunRecord run_solve(const ExperimentConfig &config);
/// Base DP followed by the perturbation pass.
RunRecord run_wasp(const ExperimentConfig &config);
/// Base DP, perturbation pass and a direct solve of the perturbed program.
RunRecord run_compare(const ExperimentConfig &config);

/// Writes base/stage_<t>.csv, perturbed/stage_<t>.csv (when present) and
/// summary.json under `directory`.
void emit_tables(const RunRecord &record, const std::string &directory);

nlohmann::json summary_json(const RunRecord &record);

} // namespace wasp
