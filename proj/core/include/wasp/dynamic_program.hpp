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

#include "wasp/linalg.hpp"

namespace wasp {

struct ActionBox {
  Vector lower;
  Vector upper;
};

/// Finite-horizon program: stages t = 0..T with dynamics x' = f_t(x, u), stage
/// cost c_t(x, u), constraints h_t(x, u) <= 0 and terminal cost c_{T+1}(x).
///
/// Derivative conventions: `dynamics_jacobian` is m x n with row j holding
/// d f / d u_j; `dynamics_hessians` returns one m x m Hessian per state
/// coordinate; `constraint_jacobian` is r x m with row k the gradient of h_k.
class DynamicProgramSpec {
public:
  virtual ~DynamicProgramSpec() = default;

  virtual int horizon() const = 0;
  virtual Index state_dim() const = 0;
  virtual Index action_dim() const = 0;
  virtual Index constraint_dim() const = 0;

  virtual Vector dynamics(int t, const Vector &x, const Vector &u) const = 0;
  virtual Matrix dynamics_jacobian(int t, const Vector &x, const Vector &u) const = 0;
  virtual std::vector<Matrix> dynamics_hessians(int t, const Vector &x,
                                                const Vector &u) const = 0;

  virtual double cost(int t, const Vector &x, const Vector &u) const = 0;
  virtual Vector cost_gradient(int t, const Vector &x, const Vector &u) const = 0;
  virtual Matrix cost_hessian(int t, const Vector &x, const Vector &u) const = 0;

  virtual Vector constraints(int t, const Vector &x, const Vector &u) const = 0;
  virtual Matrix constraint_jacobian(int t, const Vector &x, const Vector &u) const = 0;

  virtual double terminal_cost(const Vector &x) const = 0;

  /// Search box for the action at (t, x).
  virtual ActionBox action_box(int t, const Vector &x) const = 0;
};

/// Perturbation c~_t, h~_t, c~_{T+1} of a DynamicProgramSpec. The perturbed
/// program is c + eps c~, h + eps h~, c_{T+1} + eps c~_{T+1}.
class PerturbationSpec {
public:
  virtual ~PerturbationSpec() = default;

  virtual double epsilon() const = 0;

  virtual double cost(int t, const Vector &x, const Vector &u) const = 0;
  virtual Vector cost_gradient(int t, const Vector &x, const Vector &u) const = 0;
  virtual Matrix cost_hessian(int t, const Vector &x, const Vector &u) const = 0;

  virtual Vector constraint_offset(int t) const = 0;

  virtual double terminal_cost(const Vector &x) const = 0;
};

/// All-zero perturbation sized for a given program.
class ZeroPerturbation final : public PerturbationSpec {
public:
  ZeroPerturbation(const DynamicProgramSpec &spec, double epsilon = 1.0)
      : m_(spec.action_dim()), r_(spec.constraint_dim()), epsilon_(epsilon) {}

  double epsilon() const override { return epsilon_; }
  double cost(int, const Vector &, const Vector &) const override { return 0.0; }
  Vector cost_gradient(int, const Vector &, const Vector &) const override {
    return Vector::Zero(m_);
  }
  Matrix cost_hessian(int, const Vector &, const Vector &) const override {
    return Matrix::Zero(m_, m_);
  }
  Vector constraint_offset(int) const override { return Vector::Zero(r_); }
  double terminal_cost(const Vector &) const override { return 0.0; }

private:
  Index m_;
  Index r_;
  double epsilon_;
};

/// The perturbed program as a DynamicProgramSpec, used to solve it directly.
class PerturbedProgram final : public DynamicProgramSpec {
public:
  PerturbedProgram(const DynamicProgramSpec &base, const PerturbationSpec &pert)
      : base_(base), pert_(pert) {}

  int horizon() const override { return base_.horizon(); }
  Index state_dim() const override { return base_.state_dim(); }
  Index action_dim() const override { return base_.action_dim(); }
  Index constraint_dim() const override { return base_.constraint_dim(); }

  Vector dynamics(int t, const Vector &x, const Vector &u) const override {
    return base_.dynamics(t, x, u);
  }
  Matrix dynamics_jacobian(int t, const Vector &x, const Vector &u) const override {
    return base_.dynamics_jacobian(t, x, u);
  }
  std::vector<Matrix> dynamics_hessians(int t, const Vector &x,
                                        const Vector &u) const override {
    return base_.dynamics_hessians(t, x, u);
  }

  double cost(int t, const Vector &x, const Vector &u) const override {
    return base_.cost(t, x, u) + pert_.epsilon() * pert_.cost(t, x, u);
  }
  Vector cost_gradient(int t, const Vector &x, const Vector &u) const override {
    return base_.cost_gradient(t, x, u) + pert_.epsilon() * pert_.cost_gradient(t, x, u);
  }
  Matrix cost_hessian(int t, const Vector &x, const Vector &u) const override {
    return base_.cost_hessian(t, x, u) + pert_.epsilon() * pert_.cost_hessian(t, x, u);
  }

  Vector constraints(int t, const Vector &x, const Vector &u) const override {
    return base_.constraints(t, x, u) + pert_.epsilon() * pert_.constraint_offset(t);
  }
  Matrix constraint_jacobian(int t, const Vector &x, const Vector &u) const override {
    return base_.constraint_jacobian(t, x, u);
  }

  double terminal_cost(const Vector &x) const override {
    return base_.terminal_cost(x) + pert_.epsilon() * pert_.terminal_cost(x);
  }
  ActionBox action_box(int t, const Vector &x) const override {
    return base_.action_box(t, x);
  }

private:
  const DynamicProgramSpec &base_;
  const PerturbationSpec &pert_;
};

} // namespace wasp
