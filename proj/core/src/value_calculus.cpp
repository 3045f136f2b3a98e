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

#include "wasp/value_calculus.hpp"

#include "wasp/errors.hpp"

namespace wasp {
namespace {

struct Stencil {
  Index i0, i1, i2;
  double w0, w1, w2;  // first derivative weights
  double s0, s1, s2;  // second derivative weights
};

// Derivatives at node p of the quadratic through nodes a < b < c.
Stencil quadratic_stencil(const std::vector<double> &x, Index a, Index b, Index c, Index p) {
  const double xa = x[a], xb = x[b], xc = x[c], xp = x[p];
  Stencil s{a, b, c, 0, 0, 0, 0, 0, 0};
  // Lagrange basis derivatives.
  s.w0 = ((xp - xb) + (xp - xc)) / ((xa - xb) * (xa - xc));
  s.w1 = ((xp - xa) + (xp - xc)) / ((xb - xa) * (xb - xc));
  s.w2 = ((xp - xa) + (xp - xb)) / ((xc - xa) * (xc - xb));
  s.s0 = 2.0 / ((xa - xb) * (xa - xc));
  s.s1 = 2.0 / ((xb - xa) * (xb - xc));
  s.s2 = 2.0 / ((xc - xa) * (xc - xb));
  return s;
}

Stencil stencil_at(const std::vector<double> &x, Index i) {
  const Index n = static_cast<Index>(x.size());
  if (i == 0) {
    return quadratic_stencil(x, 0, 1, 2, 0);
  }
  if (i == n - 1) {
    return quadratic_stencil(x, n - 3, n - 2, n - 1, n - 1);
  }
  return quadratic_stencil(x, i - 1, i, i + 1, i);
}

// Applies the first (or second) derivative stencil along `dim` to every
// column of `table`.
Matrix differentiate(const Matrix &table, const StateGrid &grid, Index dim, bool second) {
  Matrix out(table.rows(), table.cols());
  const Index stride = grid.stride(dim);
  const auto &nodes = grid.nodes(dim);
  for (Index flat = 0; flat < grid.size(); ++flat) {
    const Index i = (flat / stride) % grid.count(dim);
    const Stencil s = stencil_at(nodes, i);
    const Index base = flat - i * stride;
    const auto r0 = table.row(base + s.i0 * stride);
    const auto r1 = table.row(base + s.i1 * stride);
    const auto r2 = table.row(base + s.i2 * stride);
    if (second) {
      out.row(flat) = s.s0 * r0 + s.s1 * r1 + s.s2 * r2;
    } else {
      out.row(flat) = s.w0 * r0 + s.w1 * r1 + s.w2 * r2;
    }
  }
  return out;
}

} // namespace

GridDerivatives grid_gradient_hessian(const Vector &values, const StateGrid &grid) {
  require_same_size(values.size(), grid.size(), "value table");
  const Index n = grid.dimension();
  for (Index d = 0; d < n; ++d) {
    if (grid.count(d) < 3) {
      throw Error(ErrorCode::TooFewNodes, "derivative stencils need 3 nodes per axis");
    }
  }
  const Matrix v = values;
  GridDerivatives out;
  out.gradient.resize(grid.size(), n);
  out.hessian.resize(grid.size(), n * n);
  for (Index d = 0; d < n; ++d) {
    out.gradient.col(d) = differentiate(v, grid, d, false).col(0);
  }
  for (Index d = 0; d < n; ++d) {
    out.hessian.col(d * n + d) = differentiate(v, grid, d, true).col(0);
    for (Index k = d + 1; k < n; ++k) {
      const Vector dk_dd = differentiate(out.gradient.col(d), grid, k, false).col(0);
      const Vector dd_dk = differentiate(out.gradient.col(k), grid, d, false).col(0);
      const Vector mixed = 0.5 * (dk_dd + dd_dk);
      out.hessian.col(d * n + k) = mixed;
      out.hessian.col(k * n + d) = mixed;
    }
  }
  return out;
}

Vector GridDerivatives::gradient_at(const StateGrid &grid, const Vector &y) const {
  return grid.interpolate_columns(gradient, y);
}

Matrix GridDerivatives::hessian_at(const StateGrid &grid, const Vector &y) const {
  const Index n = grid.dimension();
  const Vector flat = grid.interpolate_columns(hessian, y);
  return symmetrized(Eigen::Map<const Matrix>(flat.data(), n, n));
}

Vector composite_gradient(const Matrix &dudf, const Vector &grad_v) {
  require_same_size(grad_v.size(), dudf.cols(), "value gradient");
  return dudf * grad_v;
}

Matrix composite_hessian(const Matrix &dudf, const Matrix &hess_v, const Vector &grad_v,
                         const std::vector<Matrix> &d2udf) {
  const Index m = dudf.rows();
  const Index n = dudf.cols();
  require_same_size(hess_v.rows(), n, "value Hessian rows");
  require_same_size(hess_v.cols(), n, "value Hessian columns");
  require_same_size(grad_v.size(), n, "value gradient");
  require_same_size(static_cast<Index>(d2udf.size()), n, "dynamics Hessian count");
  Matrix out = dudf * hess_v * dudf.transpose();
  for (Index i = 0; i < n; ++i) {
    require_same_size(d2udf[i].rows(), m, "dynamics Hessian rows");
    require_same_size(d2udf[i].cols(), m, "dynamics Hessian columns");
    out += grad_v(i) * d2udf[i];
  }
  return symmetrized(out);
}

} // namespace wasp
