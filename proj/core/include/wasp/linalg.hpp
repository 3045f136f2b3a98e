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

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace wasp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Returns (M + M^T) / 2.
Matrix symmetrized(const Matrix &m);

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Construction fails with NotPositiveDefinite when the factorization breaks
/// down or when the smallest squared pivot falls below
/// `relative_tolerance * trace(H) / p`.
class SpdFactorization {
public:
  explicit SpdFactorization(const Matrix &h, double relative_tolerance = 1e-12);

  Index size() const noexcept { return llt_.rows(); }

  Vector solve(const Vector &rhs) const { return llt_.solve(rhs); }
  Matrix solve(const Matrix &rhs) const { return llt_.solve(rhs); }
  Matrix inverse() const;

private:
  Eigen::LLT<Matrix> llt_;
};

/// Numerical row rank via column-pivoted QR on A^T.
Index row_rank(const Matrix &a, double threshold = 1e-10);

void require_same_size(Index actual, Index expected, const char *what);

} // namespace wasp
