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

/// min 1/2 z^T H z + e^T z  subject to  A z = b.
///
/// H is symmetrized on construction and must be positive definite; A must have
/// full row rank (zero rows means unconstrained). The Cholesky factor of H is
/// computed once and shared by every formula that needs H^{-1}.
class QuadraticProgram {
public:
  QuadraticProgram(Matrix h, Vector e, Matrix a, Vector b);
  QuadraticProgram(Matrix h, Vector e);

  const Matrix &hessian() const noexcept { return h_; }
  const Vector &linear() const noexcept { return e_; }
  const Matrix &constraint_matrix() const noexcept { return a_; }
  const Vector &rhs() const noexcept { return b_; }
  const SpdFactorization &factor() const noexcept { return factor_; }

  Index num_variables() const noexcept { return h_.rows(); }
  Index num_constraints() const noexcept { return a_.rows(); }

  double objective(const Vector &z) const;
  Vector gradient(const Vector &z) const { return h_ * z + e_; }

private:
  Matrix h_;
  Vector e_;
  Matrix a_;
  Vector b_;
  SpdFactorization factor_;
};

struct QpSolution {
  Vector z_star;
  Vector kappa_star;
  double v_star = 0.0;
};

/// Perturbation direction (H~, e~, b~) and its magnitude epsilon.
///
/// The perturbed program is
///   min 1/2 z^T (H + eps H~) z + (e + eps e~)^T z  s.t.  A z = b + eps b~.
struct QpPerturbation {
  Matrix h_tilde;
  Vector e_tilde;
  Vector b_tilde;
  double epsilon = 1.0;

  /// Zero perturbation sized for `qp`.
  static QpPerturbation zero(const QuadraticProgram &qp, double epsilon = 1.0);

  /// Objective of the perturbation term, 1/2 z^T H~ z + e~^T z.
  double objective(const Vector &z) const;
};

/// First-order changes per unit epsilon, plus the intermediates used to form
/// them (kept for diagnostics).
struct FirstOrderQpDelta {
  Vector d;
  Vector k_tilde;
  double value_delta = 0.0;
  Matrix m;
  Matrix m_tilde;
  Vector m_tilde_vec;
};

/// Closed-form KKT solution. Throws RankDeficientConstraints when A H^{-1} A^T
/// is numerically singular.
QpSolution solve_equality_qp(const QuadraticProgram &qp);

/// H^{-1} - eps H^{-1} H~ H^{-1}.
Matrix perturbed_inverse_first_order(const Matrix &h, const Matrix &h_tilde,
                                     double epsilon);

FirstOrderQpDelta perturb_qp(const QuadraticProgram &qp, const QpSolution &sol,
                             const QpPerturbation &pert);

/// Specialization for an optimum at the origin: d = B w with
/// B = H^{-1} [A^T M A H^{-1} - I | A^T M], w = [e~; b~]. Requires
/// ||z*||_inf <= 1e-9 (NotAtZero otherwise).
FirstOrderQpDelta perturb_at_zero(const QuadraticProgram &qp, const QpSolution &sol,
                                  const QpPerturbation &pert);

/// Specialization without equality constraints (HasConstraints otherwise).
FirstOrderQpDelta perturb_unconstrained(const QuadraticProgram &qp,
                                        const QpSolution &sol,
                                        const QpPerturbation &pert);

struct AtZeroDelta {
  Vector d;
  Vector k_tilde;
};

/// The B w formula on raw data. Only H, A, e~ and b~ enter once the optimum
/// sits at the origin, which is what the nonlinear and dynamic layers use.
AtZeroDelta first_order_at_zero(const SpdFactorization &h, const Matrix &a,
                                const Vector &e_tilde, const Vector &b_tilde);

// ---------------------------------------------------------------------------
// Inequality-constrained QP

struct InequalityQpOptions {
  /// Negative means 100 * (number of constraint rows).
  int max_iterations = -1;
  double feasibility_tolerance = 1e-10;
};

struct InequalityQpResult {
  Vector d;
  /// Row indices of the final working set, ascending.
  std::vector<Index> active_set;
  /// One entry per constraint row; zero for rows outside the working set.
  Vector multipliers;
  int iterations = 0;
};

/// min 1/2 d^T H d + e^T d  subject to  A_hat d <= b_hat.
///
/// Dual active-set iteration started from the unconstrained minimizer with an
/// empty working set. Throws Infeasible when no point satisfies the rows and
/// IterationLimit when the budget runs out.
InequalityQpResult solve_inequality_qp(const Matrix &h, const Vector &e,
                                       const Matrix &a_hat, const Vector &b_hat,
                                       const InequalityQpOptions &options = {});

} // namespace wasp
