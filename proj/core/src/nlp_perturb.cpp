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

#include "wasp/nlp_perturb.hpp"

#include <cmath>

#include "wasp/errors.hpp"
#include "wasp/qp.hpp"

namespace wasp {
namespace {

constexpr double kOptimalityTolerance = 1e-6;

void check_vector(const Vector &v, Index n, const char *what) {
  require_same_size(v.size(), n, what);
}

void check_matrix(const Matrix &m, Index rows, Index cols, const char *what) {
  require_same_size(m.rows(), rows, what);
  require_same_size(m.cols(), cols, what);
}

Matrix active_rows(const Matrix &jac, const std::vector<Index> &active) {
  Matrix a(static_cast<Index>(active.size()), jac.cols());
  for (std::size_t k = 0; k < active.size(); ++k) {
    a.row(static_cast<Index>(k)) = jac.row(active[k]);
  }
  return a;
}

} // namespace

Vector StaticProgram::eval_gradient(const Vector &z) const {
  Vector g = gradient ? gradient(z) : central_gradient(objective, z);
  check_vector(g, dimension, "gradient");
  return g;
}

Matrix StaticProgram::eval_hessian(const Vector &z) const {
  Matrix h;
  if (hessian) {
    h = hessian(z);
  } else if (gradient) {
    h = central_hessian_from_gradient(gradient, z);
  } else {
    h = central_hessian(objective, z);
  }
  check_matrix(h, dimension, dimension, "Hessian");
  return symmetrized(h);
}

Vector StaticProgram::eval_constraints(const Vector &z) const {
  if (num_constraints == 0) {
    return Vector(0);
  }
  Vector q = constraints(z);
  check_vector(q, num_constraints, "constraints");
  return q;
}

Matrix StaticProgram::eval_constraint_jacobian(const Vector &z) const {
  if (num_constraints == 0) {
    return Matrix(0, dimension);
  }
  Matrix j = constraint_jacobian ? constraint_jacobian(z) : central_jacobian(constraints, z);
  check_matrix(j, num_constraints, dimension, "constraint Jacobian");
  return j;
}

double StaticProgram::eval_objective_tilde(const Vector &z) const {
  return objective_tilde ? objective_tilde(z) : 0.0;
}

Vector StaticProgram::eval_gradient_tilde(const Vector &z) const {
  if (gradient_tilde) {
    Vector g = gradient_tilde(z);
    check_vector(g, dimension, "perturbation gradient");
    return g;
  }
  if (objective_tilde) {
    return central_gradient(objective_tilde, z);
  }
  return Vector::Zero(dimension);
}

Matrix StaticProgram::eval_hessian_tilde(const Vector &z) const {
  Matrix h;
  if (hessian_tilde) {
    h = hessian_tilde(z);
  } else if (gradient_tilde) {
    h = central_hessian_from_gradient(gradient_tilde, z);
  } else if (objective_tilde) {
    h = central_hessian(objective_tilde, z);
  } else {
    return Matrix::Zero(dimension, dimension);
  }
  check_matrix(h, dimension, dimension, "perturbation Hessian");
  return symmetrized(h);
}

Vector StaticProgram::eval_constraint_tilde() const {
  if (constraint_tilde.size() == 0) {
    return Vector::Zero(num_constraints);
  }
  check_vector(constraint_tilde, num_constraints, "constraint perturbation");
  return constraint_tilde;
}

KnownOptimum::KnownOptimum(const StaticProgram &sp, Vector z_star, Vector mu_star)
    : z_star_(std::move(z_star)), mu_star_(std::move(mu_star)) {
  check_vector(z_star_, sp.dimension, "z*");
  check_vector(mu_star_, sp.num_constraints, "mu*");
  if (mu_star_.size() > 0 && mu_star_.minCoeff() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "multipliers must be nonnegative");
  }
  q_star_ = sp.eval_constraints(z_star_);
  const Vector stationarity =
      sp.eval_gradient(z_star_) + sp.eval_constraint_jacobian(z_star_).transpose() * mu_star_;
  if (stationarity.size() > 0 && stationarity.cwiseAbs().maxCoeff() > kOptimalityTolerance) {
    throw Error(ErrorCode::InvalidArgument, "z* is not stationary for the given multipliers");
  }
  if (mu_star_.size() > 0 &&
      mu_star_.cwiseProduct(q_star_).cwiseAbs().maxCoeff() > kOptimalityTolerance) {
    throw Error(ErrorCode::InvalidArgument, "complementary slackness violated at z*");
  }
  v_star_ = sp.objective(z_star_);
}

std::vector<Index> detect_active_set(const KnownOptimum &opt, double threshold) {
  std::vector<Index> active;
  const Vector &mu = opt.mu_star();
  const Vector &q = opt.constraint_values();
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu(i) > threshold) {
      if (q(i) < -kOptimalityTolerance) {
        throw Error(ErrorCode::InconsistentActiveSet,
                    "constraint " + std::to_string(i) + " is slack but has a positive multiplier");
      }
      active.push_back(i);
    }
  }
  return active;
}

StaticDelta first_order_static(const StaticProgram &sp, const KnownOptimum &opt,
                               double epsilon) {
  const Vector &z = opt.z_star();
  StaticDelta out;
  out.active_set = detect_active_set(opt);

  const Matrix h = sp.eval_hessian(z);
  const Vector e_tilde = sp.eval_gradient_tilde(z);
  const Matrix a = active_rows(sp.eval_constraint_jacobian(z), out.active_set);
  const Vector q_tilde = sp.eval_constraint_tilde();
  Vector b_tilde(a.rows());
  for (std::size_t k = 0; k < out.active_set.size(); ++k) {
    b_tilde(static_cast<Index>(k)) = -q_tilde(out.active_set[k]);
  }
  if (row_rank(a) < a.rows()) {
    throw Error(ErrorCode::RegularityViolated, "active constraint gradients are dependent");
  }

  // In the step variable the unperturbed subproblem has its optimum at 0.
  const Index p = sp.dimension;
  const QuadraticProgram qp(h, Vector::Zero(p), a, Vector::Zero(a.rows()));
  const QpSolution sol{Vector::Zero(p), Vector::Zero(a.rows()), 0.0};
  const QpPerturbation pert{sp.eval_hessian_tilde(z), e_tilde, b_tilde, epsilon};
  const FirstOrderQpDelta delta = perturb_at_zero(qp, sol, pert);
  out.d = delta.d;

  const double g_tilde = sp.eval_objective_tilde(z);
  if (out.active_set.empty()) {
    out.value_delta = g_tilde - e_tilde.dot(qp.factor().solve(e_tilde));
  } else {
    out.value_delta = g_tilde + sp.eval_gradient(z).dot(out.d);
  }
  return out;
}

Vector first_order_static_inequality(const StaticProgram &sp, const KnownOptimum &opt,
                                     double epsilon) {
  const Vector &z = opt.z_star();
  if (epsilon == 0.0) {
    return Vector::Zero(sp.dimension);
  }
  const Matrix h = sp.eval_hessian(z) + epsilon * sp.eval_hessian_tilde(z);
  const Vector e = sp.eval_gradient(z) + epsilon * sp.eval_gradient_tilde(z);
  const Matrix a_hat = sp.eval_constraint_jacobian(z);
  const Vector b_hat = -opt.constraint_values() - epsilon * sp.eval_constraint_tilde();
  return solve_inequality_qp(h, e, a_hat, b_hat).d;
}

} // namespace wasp
