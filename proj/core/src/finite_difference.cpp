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

#include "wasp/finite_difference.hpp"

#include <algorithm>
#include <cmath>

namespace wasp {

double gradient_step(double z) { return std::max(1e-6, 1e-6 * std::abs(z)); }

double value_hessian_step(double z) { return std::max(1e-4, 1e-4 * std::abs(z)); }

Vector central_gradient(const ScalarFunction &f, const Vector &z) {
  Vector g(z.size());
  Vector probe = z;
  for (Index i = 0; i < z.size(); ++i) {
    const double h = gradient_step(z(i));
    probe(i) = z(i) + h;
    const double up = f(probe);
    probe(i) = z(i) - h;
    const double down = f(probe);
    probe(i) = z(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix central_jacobian(const VectorFunction &f, const Vector &z) {
  const Index s = f(z).size();
  Matrix j(s, z.size());
  Vector probe = z;
  for (Index i = 0; i < z.size(); ++i) {
    const double h = gradient_step(z(i));
    probe(i) = z(i) + h;
    const Vector up = f(probe);
    probe(i) = z(i) - h;
    const Vector down = f(probe);
    probe(i) = z(i);
    j.col(i) = (up - down) / (2.0 * h);
  }
  return j;
}

Matrix central_hessian_from_gradient(const VectorFunction &gradient, const Vector &z) {
  return symmetrized(central_jacobian(gradient, z));
}

Matrix central_hessian(const ScalarFunction &f, const Vector &z) {
  const Index p = z.size();
  Matrix hess(p, p);
  Vector probe = z;
  const double f0 = f(z);
  for (Index i = 0; i < p; ++i) {
    const double hi = value_hessian_step(z(i));
    probe(i) = z(i) + hi;
    const double fp = f(probe);
    probe(i) = z(i) - hi;
    const double fm = f(probe);
    probe(i) = z(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Index j = 0; j < i; ++j) {
      const double hj = value_hessian_step(z(j));
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          probe(i) = z(i) + si * hi;
          probe(j) = z(j) + sj * hj;
          acc += si * sj * f(probe);
        }
      }
      probe(i) = z(i);
      probe(j) = z(j);
      hess(i, j) = hess(j, i) = acc / (4.0 * hi * hj);
    }
  }
  return hess;
}

} // namespace wasp
