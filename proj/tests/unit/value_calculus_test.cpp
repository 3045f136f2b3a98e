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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wasp/errors.hpp"

namespace wasp {
namespace {

Vector tabulate(const StateGrid &grid, const std::function<double(const Vector &)> &f) {
  Vector v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    v(i) = f(grid.point(i));
  }
  return v;
}

TEST(GridGradientHessian, ExactForQuadraticsOnUniformAxis) {
  const StateGrid grid({Axis{-1, 2, 7}});
  const Vector values = tabulate(grid, [](const Vector &x) { return 3 * x(0) * x(0) - x(0) + 2; });
  const GridDerivatives d = grid_gradient_hessian(values, grid);
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i)(0);
    EXPECT_NEAR(d.gradient(i, 0), 6 * x - 1, 1e-12);
    EXPECT_NEAR(d.hessian(i, 0), 6.0, 1e-10);
  }
}

TEST(GridGradientHessian, ExactForQuadraticsOnNonUniformAxes) {
  const StateGrid grid({Axis{0.5, 4, 6, Spacing::Log}, Axis{-2, 1, 4}});
  const auto f = [](const Vector &x) {
    return 1.5 * x(0) * x(0) - 0.7 * x(0) * x(1) + 2.0 * x(1) * x(1) + x(0) - 3.0 * x(1);
  };
  const GridDerivatives d = grid_gradient_hessian(tabulate(grid, f), grid);
  for (Index i = 0; i < grid.size(); ++i) {
    const Vector x = grid.point(i);
    EXPECT_NEAR(d.gradient(i, 0), 3.0 * x(0) - 0.7 * x(1) + 1.0, 1e-10);
    EXPECT_NEAR(d.gradient(i, 1), -0.7 * x(0) + 4.0 * x(1) - 3.0, 1e-10);
    EXPECT_NEAR(d.hessian(i, 0), 3.0, 1e-9);
    EXPECT_NEAR(d.hessian(i, 1), -0.7, 1e-9);
    EXPECT_NEAR(d.hessian(i, 2), -0.7, 1e-9);
    EXPECT_NEAR(d.hessian(i, 3), 4.0, 1e-9);
  }
}

TEST(GridGradientHessian, SecondOrderAccurateForSmoothFunctions) {
  // Halving the spacing cuts the interior gradient error about four times.
  double prev = 0.0;
  for (Index n : {41, 81, 161}) {
    const StateGrid grid({Axis{0, 2, n}});
    const GridDerivatives d =
        grid_gradient_hessian(tabulate(grid, [](const Vector &x) { return std::sin(x(0)); }), grid);
    double err = 0.0;
    for (Index i = 1; i + 1 < n; ++i) {
      err = std::max(err, std::abs(d.gradient(i, 0) - std::cos(grid.point(i)(0))));
    }
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
      EXPECT_LT(prev / err, 4.5);
    }
    prev = err;
  }
}

TEST(GridGradientHessian, NeedsThreeNodesPerAxis) {
  const StateGrid grid({Axis{0, 1, 2}});
  try {
    grid_gradient_hessian(Vector::Zero(2), grid);
    FAIL() << "expected TooFewNodes";
  } catch (const Error &err) {
    EXPECT_EQ(err.code(), ErrorCode::TooFewNodes);
  }
}

TEST(GridDerivatives, InterpolatesBetweenNodes) {
  const StateGrid grid({Axis{0, 1, 5}});
  const GridDerivatives d = grid_gradient_hessian(
      tabulate(grid, [](const Vector &x) { return x(0) * x(0); }), grid);
  const Vector y = Vector::Constant(1, 0.3);
  EXPECT_NEAR(d.gradient_at(grid, y)(0), 0.6, 1e-12);
  EXPECT_NEAR(d.hessian_at(grid, y)(0, 0), 2.0, 1e-10);
}

TEST(CompositeCalculus, ScalarChainRule) {
  // V(y) = y^2, f(u) = u^3: d/du = 2 u^3 * 3u^2, d2/du2 = 30 u^4.
  const double u = 0.7;
  const Matrix dudf = Matrix::Constant(1, 1, 3 * u * u);
  const Vector grad_v = Vector::Constant(1, 2 * u * u * u);
  const Matrix hess_v = Matrix::Constant(1, 1, 2.0);
  const std::vector<Matrix> d2 = {Matrix::Constant(1, 1, 6 * u)};
  EXPECT_NEAR(composite_gradient(dudf, grad_v)(0), 6 * std::pow(u, 5), 1e-14);
  EXPECT_NEAR(composite_hessian(dudf, hess_v, grad_v, d2)(0, 0), 30 * std::pow(u, 4), 1e-13);
}

// f_i(x, u) = cubic in u with random coefficients, V quadratic in y.
struct CubicTriple {
  Index m, n;
  std::vector<Matrix> quad;  // per output: m x m symmetric
  std::vector<Vector> lin;   // per output: m
  std::vector<Vector> cub;   // per output: m, coefficient of u_j^3
  Matrix q;                  // n x n SPD, V(y) = 1/2 y^T Q y + r^T y
  Vector r;

  Vector f(const Vector &u) const {
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      y(i) = lin[i].dot(u) + 0.5 * u.dot(quad[i] * u) + cub[i].dot(u.array().cube().matrix());
    }
    return y;
  }
  Matrix jacobian_mn(const Vector &u) const {
    Matrix j(m, n);
    for (Index i = 0; i < n; ++i) {
      j.col(i) = lin[i] + quad[i] * u + (3.0 * cub[i].array() * u.array().square()).matrix();
    }
    return j;
  }
  std::vector<Matrix> hessians(const Vector &u) const {
    std::vector<Matrix> h;
    for (Index i = 0; i < n; ++i) {
      Matrix hi = quad[i];
      hi.diagonal() += (6.0 * cub[i].array() * u.array()).matrix();
      h.push_back(hi);
    }
    return h;
  }
  double v(const Vector &y) const { return 0.5 * y.dot(q * y) + r.dot(y); }
};

CubicTriple random_triple(std::uint64_t seed, Index m, Index n) {
  std::mt19937_64 rng(seed);
  CubicTriple c;
  c.m = m;
  c.n = n;
  for (Index i = 0; i < n; ++i) {
    Matrix a = oracle::random_matrix(rng, m, m);
    c.quad.push_back(a + a.transpose());
    c.lin.push_back(oracle::random_vector(rng, m));
    c.cub.push_back(oracle::random_vector(rng, m));
  }
  c.q = oracle::random_spd(rng, n);
  c.r = oracle::random_vector(rng, n);
  return c;
}

TEST(CompositeCalculus, MatchesFiniteDifferencesOnCubicTriples) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index m = 1 + seed % 3;
    const Index n = 1 + (seed + 1) % 3;
    const CubicTriple c = random_triple(seed, m, n);
    std::mt19937_64 rng(100 + seed);
    const Vector u = 0.5 * oracle::random_vector(rng, m);
    const Vector y = c.f(u);
    const Vector grad_v = c.q * y + c.r;
    const Matrix hess = composite_hessian(c.jacobian_mn(u), c.q, grad_v, c.hessians(u));
    const Matrix fd = oracle::fd_hessian([&](const Vector &w) { return c.v(c.f(w)); }, u, 1e-4);
    EXPECT_LE((hess - fd).norm(), 1e-4 * std::max(1.0, fd.norm())) << "seed " << seed;
    const Vector grad = composite_gradient(c.jacobian_mn(u), grad_v);
    Vector fd_grad(m);
    for (Index j = 0; j < m; ++j) {
      Vector up = u, dn = u;
      up(j) += 1e-6;
      dn(j) -= 1e-6;
      fd_grad(j) = (c.v(c.f(up)) - c.v(c.f(dn))) / 2e-6;
    }
    EXPECT_LE((grad - fd_grad).norm(), 1e-6 * std::max(1.0, fd_grad.norm())) << "seed " << seed;
  }
}

TEST(CompositeCalculus, RejectsMismatchedShapes) {
  EXPECT_THROW(composite_gradient(Matrix::Zero(2, 3), Vector::Zero(2)), Error);
  EXPECT_THROW(composite_hessian(Matrix::Zero(1, 2), Matrix::Zero(2, 2), Vector::Zero(2),
                                 {Matrix::Zero(1, 1)}),
               Error);
}

} // namespace
} // namespace wasp
