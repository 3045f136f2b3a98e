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

#include "wasp/dynamic_program.hpp"

namespace wasp {

// Resource allocation: x' = x - u, c_t = -C_t ln u, c_{T+1} = -C_{T+1} ln x,
// perturbed by c~_t = -C~_t ln u.

struct ResourceAllocationProblem {
  /// C_0 .. C_{T+1}.
  std::vector<double> coefficients;
  /// C~_0 .. C~_{T+1}; empty means no perturbation.
  std::vector<double> perturbation;
  double epsilon = 1.0;

  int horizon() const { return static_cast<int>(coefficients.size()) - 2; }
  double tail_sum(int t) const;
  double tail_sum_perturbation(int t) const;
  void validate() const;
};

struct ResourceOracle {
  double policy = 0.0;
  double value = 0.0;
  double delta_policy = 0.0;
};

/// Constant term xi_t of V_t(x) = xi_t - S_t ln x for coefficients C.
double resource_value_constant(const std::vector<double> &coefficients, int t);

/// Closed-form policy C_t x / S_t, value xi_t - S_t ln x and first-order
/// policy change (C~_t S_{t+1} - C_t S~_{t+1}) x / S_t^2.
ResourceOracle resource_oracle(const ResourceAllocationProblem &problem, int t, double x);

class ResourceAllocationSpec final : public DynamicProgramSpec {
public:
  explicit ResourceAllocationSpec(ResourceAllocationProblem problem);

  const ResourceAllocationProblem &problem() const { return problem_; }

  int horizon() const override { return problem_.horizon(); }
  Index state_dim() const override { return 1; }
  Index action_dim() const override { return 1; }
  Index constraint_dim() const override { return 2; }

  Vector dynamics(int t, const Vector &x, const Vector &u) const override;
  Matrix dynamics_jacobian(int t, const Vector &x, const Vector &u) const override;
  std::vector<Matrix> dynamics_hessians(int t, const Vector &x, const Vector &u) const override;
  double cost(int t, const Vector &x, const Vector &u) const override;
  Vector cost_gradient(int t, const Vector &x, const Vector &u) const override;
  Matrix cost_hessian(int t, const Vector &x, const Vector &u) const override;
  /// [u - x + delta, -u + delta] with delta = 1e-6 x, keeping 0 < u < x.
  Vector constraints(int t, const Vector &x, const Vector &u) const override;
  Matrix constraint_jacobian(int t, const Vector &x, const Vector &u) const override;
  double terminal_cost(const Vector &x) const override;
  ActionBox action_box(int t, const Vector &x) const override;

private:
  ResourceAllocationProblem problem_;
};

class ResourceAllocationPerturbation final : public PerturbationSpec {
public:
  explicit ResourceAllocationPerturbation(ResourceAllocationProblem problem);

  double epsilon() const override { return problem_.epsilon; }
  double cost(int t, const Vector &x, const Vector &u) const override;
  Vector cost_gradient(int t, const Vector &x, const Vector &u) const override;
  Matrix cost_hessian(int t, const Vector &x, const Vector &u) const override;
  Vector constraint_offset(int t) const override;
  double terminal_cost(const Vector &x) const override;

private:
  ResourceAllocationProblem problem_;
};

// Velocity tracking: v' = v + a dt, c_t = w_p (v - v_ref)^2 + w_e a^2,
// terminal w_p (v - v_ref)^2, a_min <= a <= a_max.

struct VelocityTrackingProblem {
  double v0 = 10.0;
  double v_ref = 12.0;
  double w_p = 5.0;
  double w_e = 1.0;
  double a_min = -2.0;
  double a_max = 2.0;
  double dt = 1.0;
  int horizon = 5;

  /// Parameters of the perturbed problem. The perturbation handed to the
  /// first-order machinery is their difference from the nominal ones.
  double v_ref_tilde = 12.0;
  double w_p_tilde = 5.0;
  double w_e_tilde = 1.0;
  double a_min_tilde = -2.0;
  double a_max_tilde = 2.0;
  double epsilon = 1.0;

  void validate() const;
  /// Problem with the perturbed parameters equal to the nominal ones.
  VelocityTrackingProblem unperturbed() const;
};

class VelocityTrackingSpec final : public DynamicProgramSpec {
public:
  explicit VelocityTrackingSpec(VelocityTrackingProblem problem);

  const VelocityTrackingProblem &problem() const { return problem_; }

  int horizon() const override { return problem_.horizon; }
  Index state_dim() const override { return 1; }
  Index action_dim() const override { return 1; }
  Index constraint_dim() const override { return 2; }

  Vector dynamics(int t, const Vector &x, const Vector &u) const override;
  Matrix dynamics_jacobian(int t, const Vector &x, const Vector &u) const override;
  std::vector<Matrix> dynamics_hessians(int t, const Vector &x, const Vector &u) const override;
  double cost(int t, const Vector &x, const Vector &u) const override;
  Vector cost_gradient(int t, const Vector &x, const Vector &u) const override;
  Matrix cost_hessian(int t, const Vector &x, const Vector &u) const override;
  /// [a - a_max, a_min - a].
  Vector constraints(int t, const Vector &x, const Vector &u) const override;
  Matrix constraint_jacobian(int t, const Vector &x, const Vector &u) const override;
  double terminal_cost(const Vector &x) const override;
  /// Wider than both nominal and perturbed bounds; the bounds themselves are
  /// enforced as constraints.
  ActionBox action_box(int t, const Vector &x) const override;

private:
  VelocityTrackingProblem problem_;
};

class VelocityTrackingPerturbation final : public PerturbationSpec {
public:
  explicit VelocityTrackingPerturbation(VelocityTrackingProblem problem);

  double epsilon() const override { return problem_.epsilon; }
  double cost(int t, const Vector &x, const Vector &u) const override;
  Vector cost_gradient(int t, const Vector &x, const Vector &u) const override;
  Matrix cost_hessian(int t, const Vector &x, const Vector &u) const override;
  /// [a_max - a_max~, a~_min - a_min], so h + h~ are the perturbed bounds.
  Vector constraint_offset(int t) const override;
  double terminal_cost(const Vector &x) const override;

private:
  VelocityTrackingProblem problem_;
};

struct RiccatiGains {
  /// P_0 .. P_{T+1}.
  std::vector<double> p;
  /// K_0 .. K_T; the unconstrained action is -K_t (v - v_ref).
  std::vector<double> k;
};

RiccatiGains riccati_oracle(const VelocityTrackingProblem &problem);

} // namespace wasp
