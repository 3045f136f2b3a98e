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

#include "wasp/linalg.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "wasp/errors.hpp"

namespace wasp {

Matrix symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

SpdFactorization::SpdFactorization(const Matrix &h, double relative_tolerance) {
  if (h.rows() != h.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Hessian must be square");
  }
  if (!h.allFinite()) {
    throw Error(ErrorCode::NotPositiveDefinite, "Hessian has non-finite entries");
  }
  const Index p = h.rows();
  llt_.compute(h);
  if (p == 0) {
    return;
  }
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  }
  const double floor = relative_tolerance * std::abs(h.trace()) / static_cast<double>(p);
  const Vector diag = Matrix(llt_.matrixL()).diagonal();
  const double min_pivot = diag.cwiseAbs2().minCoeff();
  if (!(min_pivot > floor)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "smallest Cholesky pivot " + std::to_string(min_pivot) +
                    " below tolerance " + std::to_string(floor));
  }
}

Matrix SpdFactorization::inverse() const {
  return llt_.solve(Matrix::Identity(size(), size()));
}

Index row_rank(const Matrix &a, double threshold) {
  if (a.rows() == 0) {
    return 0;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  qr.setThreshold(threshold);
  return qr.rank();
}

void require_same_size(Index actual, Index expected, const char *what) {
  if (actual != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected size " + std::to_string(expected) +
                    ", got " + std::to_string(actual));
  }
}

} // namespace wasp
