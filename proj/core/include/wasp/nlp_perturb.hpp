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

#include <vector>

#include "wasp/finite_difference.hpp"
#include "wasp/linalg.hpp"

namespace wasp {

/// Smooth program min g(z) s.t. q(z) <= 0 together with a perturbation
/// g~, q~. Derivative evaluators are optional; missing ones fall back to
/// central differences.
struct StaticProgram {
  Index dimension = 0;
  Index num_constraints = 0;

  ScalarFunction objective;
  VectorFunction gradient;
  MatrixFunction hessian;

  VectorFunction constraints;
  /// s x p, row i is the gradient of q_i.
  MatrixFunction constraint_jacobian;

  ScalarFunction objective_tilde;
  VectorFunction gradient_tilde;
  MatrixFunction hessian_tilde;
  Vector constraint_tilde;

  Vector eval_gradient(const Vector &z) const;
  Matrix eval_hessian(const Vector &z) const;
  Vector eval_constraints(const Vector &z) const;
  Matrix eval_constraint_jacobian(const Vector &z) const;

  double eval_objective_tilde(const Vector &z) const;
  Vector eval_gradient_tilde(const Vector &z) const;
  Matrix eval_hessian_tilde(const Vector &z) const;
  Vector eval_constraint_tilde() const;
};

/// Optimum of a StaticProgram with its multipliers, checked on construction.
class KnownOptimum {
public:
  KnownOptimum(const StaticProgram &sp, Vector z_star, Vector mu_star);

  const Vector &z_star() const noexcept { return z_star_; }
  const Vector &mu_star() const noexcept { return mu_star_; }
  double v_star() const noexcept { return v_star_; }
  const Vector &constraint_values() const noexcept { return q_star_; }

private:
  Vector z_star_;
  Vector mu_star_;
  Vector q_star_;
  double v_star_ = 0.0;
};

constexpr double kActiveMultiplierThreshold = 1e-8;

std::vector<Index> detect_active_set(const KnownOptimum &opt,
                                     double threshold = kActiveMultiplierThreshold);

struct StaticDelta {
  Vector d;
  double value_delta = 0.0;
  std::vector<Index> active_set;
};

/// Per-unit-epsilon change of optimizer and value with the active set frozen.
StaticDelta first_order_static(const StaticProgram &sp, const KnownOptimum &opt,
                               double epsilon);

/// Solves the linearized inequality subproblem. The returned step already
/// contains the factor epsilon.
Vector first_order_static_inequality(const StaticProgram &sp, const KnownOptimum &opt,
                                     double epsilon);

} // namespace wasp
