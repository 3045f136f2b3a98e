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

#include <functional>

#include "wasp/linalg.hpp"

namespace wasp {

using ScalarFunction = std::function<double(const Vector &)>;
using VectorFunction = std::function<Vector(const Vector &)>;
using MatrixFunction = std::function<Matrix(const Vector &)>;

/// Central-difference step used for gradients and Jacobians.
double gradient_step(double z);
/// Central-difference step used for Hessians built from function values only.
double value_hessian_step(double z);

Vector central_gradient(const ScalarFunction &f, const Vector &z);

/// Rows are the gradients of the components of `f`, so the result is s x p.
Matrix central_jacobian(const VectorFunction &f, const Vector &z);

/// Symmetrized Jacobian of an analytic gradient.
Matrix central_hessian_from_gradient(const VectorFunction &gradient, const Vector &z);

/// Second differences of function values, symmetrized.
Matrix central_hessian(const ScalarFunction &f, const Vector &z);

} // namespace wasp
