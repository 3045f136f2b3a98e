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

#include "wasp/qp.hpp"

#include <cmath>
#include <string>

#include "wasp/errors.hpp"

namespace wasp {
namespace {

constexpr double kAtZeroTolerance = 1e-9;
constexpr double kGramTolerance = 1e-10;

Matrix validated_hessian(Matrix h) {
  if (h.rows() != h.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "H must be square");
  }
  return symmetrized(h);
}

// A H^{-1} A^T and its inverse. Singularity here means the constraint rows are
// not independent, so it is reported as RankDeficientConstraints.
struct ConstraintGram {
  Matrix hinv_at;
  Matrix gram;
  Matrix gram_inverse;
};

ConstraintGram constraint_gram(const SpdFactorization &factor, const Matrix &a) {
  ConstraintGram g;
  g.hinv_at = factor.solve(Matrix(a.transpose()));
  g.gram = symmetrized(a * g.hinv_at);
  try {
    SpdFactorization gram_factor(g.gram, kGramTolerance);
    g.gram_inverse = gram_factor.inverse();
  } catch (const Error &) {
    throw Error(ErrorCode::RankDeficientConstraints,
                "A H^{-1} A^T is singular; constraint rows are dependent");
  }
  return g;
}

void check_perturbation(const QuadraticProgram &qp, const QpPerturbation &pert) {
  const Index p = qp.num_variables();
  if (pert.h_tilde.rows() != p || pert.h_tilde.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "H~ must be p x p");
  }
  require_same_size(pert.e_tilde.size(), p, "e~");
  require_same_size(pert.b_tilde.size(), qp.num_constraints(), "b~");
  if (!(pert.epsilon >= 0.0) || !std::isfinite(pert.epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be finite and >= 0");
  }
  // Construction throws NotPositiveDefinite when H + eps H~ loses definiteness.
  SpdFactorization perturbed(symmetrized(qp.hessian() + pert.epsilon * pert.h_tilde));
  (void)perturbed;
}

void check_solution(const QuadraticProgram &qp, const QpSolution &sol) {
  require_same_size(sol.z_star.size(), qp.num_variables(), "z*");
  require_same_size(sol.kappa_star.size(), qp.num_constraints(), "kappa*");
}

} // namespace

QuadraticProgram::QuadraticProgram(Matrix h, Vector e, Matrix a, Vector b)
    : h_(validated_hessian(std::move(h))), e_(std::move(e)), a_(std::move(a)),
      b_(std::move(b)), factor_(h_) {
  const Index p = h_.rows();
  require_same_size(e_.size(), p, "e");
  if (a_.rows() == 0) {
    a_.resize(0, p);
  }
  require_same_size(a_.cols(), p, "A columns");
  require_same_size(b_.size(), a_.rows(), "b");
  if (!e_.allFinite() || !a_.allFinite() || !b_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "program data must be finite");
  }
  if (row_rank(a_) < a_.rows()) {
    throw Error(ErrorCode::RankDeficientConstraints, "A must have full row rank");
  }
}

QuadraticProgram::QuadraticProgram(Matrix h, Vector e)
    : QuadraticProgram(h, std::move(e), Matrix(0, h.rows()), Vector(0)) {}

double QuadraticProgram::objective(const Vector &z) const {
  return 0.5 * z.dot(h_ * z) + e_.dot(z);
}

QpPerturbation QpPerturbation::zero(const QuadraticProgram &qp, double epsilon) {
  const Index p = qp.num_variables();
  return {Matrix::Zero(p, p), Vector::Zero(p), Vector::Zero(qp.num_constraints()),
          epsilon};
}

double QpPerturbation::objective(const Vector &z) const {
  return 0.5 * z.dot(h_tilde * z) + e_tilde.dot(z);
}

QpSolution solve_equality_qp(const QuadraticProgram &qp) {
  const auto &factor = qp.factor();
  const Vector hinv_e = factor.solve(qp.linear());
  QpSolution sol;
  if (qp.num_constraints() == 0) {
    sol.z_star = -hinv_e;
    sol.kappa_star = Vector(0);
    sol.v_star = -0.5 * qp.linear().dot(hinv_e);
    return sol;
  }
  const Matrix &a = qp.constraint_matrix();
  const ConstraintGram g = constraint_gram(factor, a);
  sol.kappa_star = -g.gram_inverse * (a * hinv_e + qp.rhs());
  sol.z_star = -factor.solve(Vector(qp.linear() + a.transpose() * sol.kappa_star));
  sol.v_star =
      0.5 * (sol.kappa_star.dot(g.gram * sol.kappa_star) - qp.linear().dot(hinv_e));
  return sol;
}

Matrix perturbed_inverse_first_order(const Matrix &h, const Matrix &h_tilde,
                                     double epsilon) {
  if (h_tilde.rows() != h.rows() || h_tilde.cols() != h.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "H~ must match H");
  }
  const Matrix hinv = SpdFactorization(symmetrized(h)).inverse();
  return hinv - epsilon * (hinv * h_tilde * hinv);
}

FirstOrderQpDelta perturb_qp(const QuadraticProgram &qp, const QpSolution &sol,
                             const QpPerturbation &pert) {
  check_solution(qp, sol);
  check_perturbation(qp, pert);
  const auto &factor = qp.factor();
  const Matrix &a = qp.constraint_matrix();
  const Vector grad_tilde = pert.h_tilde * sol.z_star + pert.e_tilde;

  FirstOrderQpDelta out;
  if (qp.num_constraints() == 0) {
    out.k_tilde = Vector(0);
    out.d = -factor.solve(grad_tilde);
  } else {
    const ConstraintGram g = constraint_gram(factor, a);
    const Vector hinv_e = factor.solve(qp.linear());
    out.m = g.gram_inverse;
    out.m_tilde = g.hinv_at.transpose() * pert.h_tilde * g.hinv_at;
    out.m_tilde_vec = a * factor.solve(pert.e_tilde) + pert.b_tilde -
                      a * factor.solve(Vector(pert.h_tilde * hinv_e));
    out.k_tilde = out.m * (out.m_tilde * sol.kappa_star - out.m_tilde_vec);
    out.d = -factor.solve(Vector(a.transpose() * out.k_tilde + grad_tilde));
  }
  out.value_delta = pert.objective(sol.z_star) + qp.gradient(sol.z_star).dot(out.d);
  return out;
}

AtZeroDelta first_order_at_zero(const SpdFactorization &h, const Matrix &a,
                                const Vector &e_tilde, const Vector &b_tilde) {
  const Index p = h.size();
  require_same_size(e_tilde.size(), p, "e~");
  require_same_size(b_tilde.size(), a.rows(), "b~");
  AtZeroDelta out;
  if (a.rows() == 0) {
    out.d = -h.solve(e_tilde);
    out.k_tilde = Vector(0);
    return out;
  }
  require_same_size(a.cols(), p, "A columns");
  const ConstraintGram g = constraint_gram(h, a);
  const Index s = a.rows();
  const Matrix at_m = a.transpose() * g.gram_inverse;

  // B = H^{-1} [A^T M A H^{-1} - I | A^T M],  w = [e~; b~]
  Matrix blocks(p, p + s);
  blocks.leftCols(p) = at_m * g.hinv_at.transpose() - Matrix::Identity(p, p);
  blocks.rightCols(s) = at_m;
  const Matrix b_matrix = h.solve(blocks);
  Vector w(p + s);
  w << e_tilde, b_tilde;

  out.d = b_matrix * w;
  out.k_tilde = -g.gram_inverse * (g.hinv_at.transpose() * e_tilde + b_tilde);
  return out;
}

FirstOrderQpDelta perturb_at_zero(const QuadraticProgram &qp, const QpSolution &sol,
                                  const QpPerturbation &pert) {
  check_solution(qp, sol);
  if (sol.z_star.size() > 0 && sol.z_star.cwiseAbs().maxCoeff() > kAtZeroTolerance) {
    throw Error(ErrorCode::NotAtZero, "optimum is not at the origin");
  }
  check_perturbation(qp, pert);
  const AtZeroDelta core =
      first_order_at_zero(qp.factor(), qp.constraint_matrix(), pert.e_tilde, pert.b_tilde);
  FirstOrderQpDelta out;
  out.d = core.d;
  out.k_tilde = core.k_tilde;
  if (qp.num_constraints() > 0) {
    const ConstraintGram g = constraint_gram(qp.factor(), qp.constraint_matrix());
    out.m = g.gram_inverse;
    out.m_tilde = g.hinv_at.transpose() * pert.h_tilde * g.hinv_at;
  }
  out.value_delta = pert.objective(sol.z_star) + qp.gradient(sol.z_star).dot(out.d);
  return out;
}

FirstOrderQpDelta perturb_unconstrained(const QuadraticProgram &qp,
                                        const QpSolution &sol,
                                        const QpPerturbation &pert) {
  if (qp.num_constraints() > 0) {
    throw Error(ErrorCode::HasConstraints,
                "unconstrained formula requested for a constrained program");
  }
  check_solution(qp, sol);
  check_perturbation(qp, pert);
  const auto &factor = qp.factor();
  const Vector grad_tilde = pert.h_tilde * sol.z_star + pert.e_tilde;
  FirstOrderQpDelta out;
  out.k_tilde = Vector(0);
  out.d = -factor.solve(grad_tilde);
  const bool at_zero = sol.z_star.size() == 0 ||
                       sol.z_star.cwiseAbs().maxCoeff() <= kAtZeroTolerance;
  if (at_zero) {
    // Reference closed form for an optimum at the origin. It is not the
    // first-order limit of the general expression (which vanishes here); the
    // static-program tests compare it against exact re-solves.
    out.value_delta = -pert.e_tilde.dot(factor.solve(pert.e_tilde));
  } else {
    out.value_delta = pert.objective(sol.z_star) - qp.gradient(sol.z_star).dot(factor.solve(grad_tilde));
  }
  return out;
}

} // namespace wasp
