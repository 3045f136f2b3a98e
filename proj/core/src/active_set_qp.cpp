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

// Dual active-set method for min 1/2 d^T H d + e^T d  s.t.  A d <= b.
//
// Starts from the unconstrained minimizer, which is dual feasible, and adds
// the most violated row at each outer step. Dual feasibility is preserved, so
// a possibly infeasible starting point is not a problem.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "wasp/errors.hpp"
#include "wasp/qp.hpp"

namespace wasp {

InequalityQpResult solve_inequality_qp(const Matrix &h, const Vector &e,
                                       const Matrix &a_hat, const Vector &b_hat,
                                       const InequalityQpOptions &options) {
  const Index p = h.rows();
  if (h.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "H must be square");
  }
  require_same_size(e.size(), p, "e");
  const Index s = a_hat.rows();
  if (s > 0) {
    require_same_size(a_hat.cols(), p, "A columns");
  }
  require_same_size(b_hat.size(), s, "b");

  const SpdFactorization factor(symmetrized(h));
  const double inf = std::numeric_limits<double>::infinity();
  const int max_iterations = options.max_iterations >= 0
                                 ? options.max_iterations
                                 : static_cast<int>(100 * std::max<Index>(s, 1));

  InequalityQpResult result;
  Vector x = -factor.solve(e);
  // Working set in insertion order, with multipliers.
  std::vector<Index> working;
  std::vector<double> mult;
  int iterations = 0;

  auto violation = [&](Index j) { return a_hat.row(j).dot(x) - b_hat(j); };

  while (true) {
    Index add = -1;
    double worst = options.feasibility_tolerance;
    for (Index j = 0; j < s; ++j) {
      if (std::find(working.begin(), working.end(), j) != working.end()) {
        continue;
      }
      const double v = violation(j);
      if (v > worst) {
        worst = v;
        add = j;
      }
    }
    if (add < 0) {
      break;
    }

    const Vector np = a_hat.row(add).transpose();
    double t_added = 0.0;
    while (true) {
      if (++iterations > max_iterations) {
        throw Error(ErrorCode::IterationLimit, "inequality QP did not converge");
      }
      const Index q = static_cast<Index>(working.size());
      const Vector hinv_np = factor.solve(np);
      Vector z = hinv_np;
      Vector r(q);
      if (q > 0) {
        Matrix n(p, q);
        for (Index k = 0; k < q; ++k) {
          n.col(k) = a_hat.row(working[k]).transpose();
        }
        const Matrix hinv_n = factor.solve(n);
        const Matrix gram = n.transpose() * hinv_n;
        r = gram.ldlt().solve(Vector(hinv_n.transpose() * np));
        z -= hinv_n * r;
      }
      const bool z_zero = z.norm() <= 1e-12 * std::max(hinv_np.norm(), 1.0);

      double t1 = inf;
      Index drop = -1;
      for (Index k = 0; k < q; ++k) {
        if (r(k) > 1e-14) {
          const double ratio = mult[k] / r(k);
          if (ratio < t1 || (ratio == t1 && working[k] < working[drop])) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      const double t2 = z_zero ? inf : violation(add) / np.dot(z);
      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        throw Error(ErrorCode::Infeasible, "inequality QP constraints are inconsistent");
      }
      const double t = std::min(t1, t2);
      if (!z_zero) {
        x -= t * z;
      }
      for (Index k = 0; k < q; ++k) {
        mult[k] -= t * r(k);
      }
      t_added += t;
      if (t2 <= t1) {
        working.push_back(add);
        mult.push_back(t_added);
        break;
      }
      working.erase(working.begin() + drop);
      mult.erase(mult.begin() + drop);
    }
  }

  result.d = x;
  result.multipliers = Vector::Zero(s);
  std::map<Index, double> ordered;
  for (std::size_t k = 0; k < working.size(); ++k) {
    ordered[working[k]] = std::max(mult[k], 0.0);
  }
  for (const auto &[row, value] : ordered) {
    result.active_set.push_back(row);
    result.multipliers(row) = value;
  }
  result.iterations = iterations;
  return result;
}

} // namespace wasp
