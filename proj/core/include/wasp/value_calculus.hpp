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

#include "wasp/grid.hpp"
#include "wasp/linalg.hpp"

namespace wasp {

/// Finite-difference gradient and Hessian tables of a value table. Row i of
/// `gradient` is the gradient at node i; row i of `hessian` is the row-major
/// flattened n x n Hessian.
struct GridDerivatives {
  Matrix gradient;
  Matrix hessian;

  /// Derivatives between nodes come from multilinear interpolation of the
  /// tables, which keeps the Hessian continuous across cells.
  Vector gradient_at(const StateGrid &grid, const Vector &y) const;
  Matrix hessian_at(const StateGrid &grid, const Vector &y) const;
};

/// Three-point stencils on the (possibly non-uniform) node spacing: central at
/// interior nodes, one-sided at the ends. Exact for quadratics.
GridDerivatives grid_gradient_hessian(const Vector &values, const StateGrid &grid);

/// grad_u (V o f) = (d f / d u) grad_y V, with dudf stored m x n.
Vector composite_gradient(const Matrix &dudf, const Vector &grad_v);

/// Hessian of u -> V(f(x, u)):
///   dudf hessV dudf^T + sum_i (grad_y V)_i hess_u f_i.
Matrix composite_hessian(const Matrix &dudf, const Matrix &hess_v, const Vector &grad_v,
                         const std::vector<Matrix> &d2udf);

} // namespace wasp
