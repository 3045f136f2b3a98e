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

#include "wasp/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "wasp/errors.hpp"
#include "wasp/parallel.hpp"

namespace wasp {
namespace {

constexpr int kIntervalSamples = 33;
constexpr int kBisectionSteps = 200;

Vector clamp_to_grid(const StateGrid &grid, const Vector &y) {
  Vector c = y;
  for (Index d = 0; d < grid.dimension(); ++d) {
    c(d) = std::clamp(y(d), grid.nodes(d).front(), grid.nodes(d).back());
  }
  return c;
}

/// Stage objective and its one-sided derivatives at a fixed node.
class StageObjective {
public:
  StageObjective(const DynamicProgramSpec &spec, const StateGrid &grid,
                 const Vector &value_next, int t, const Vector &x)
      : spec_(spec), grid_(grid), value_next_(value_next), t_(t), x_(x) {}

  bool admissible(const Vector &u) const {
    return grid_.contains(spec_.dynamics(t_, x_, u));
  }

  double augmented(const Vector &u, const Vector &mu, double penalty) const {
    return augmented_lagrangian(spec_, grid_, value_next_, t_, x_, u, mu, penalty);
  }

  /// c_t + V_{t+1}(f_t), without multiplier terms.
  double plain(const Vector &u) const {
    return spec_.cost(t_, x_, u) + grid_.interpolate(value_next_, spec_.dynamics(t_, x_, u));
  }

  /// One-sided derivative of c_t + V_{t+1}(f_t) along v.
  double plain_derivative(const Vector &u, const Vector &v) const {
    const Vector y = spec_.dynamics(t_, x_, u);
    const Matrix jac = spec_.dynamics_jacobian(t_, x_, u);
    const Vector dy = jac.transpose() * v;
    double value_part = 0.0;
    if (dy.cwiseAbs().maxCoeff() > 0.0) {
      value_part = grid_.directional_derivative(value_next_, y, dy);
    }
    return spec_.cost_gradient(t_, x_, u).dot(v) + value_part;
  }

  /// One-sided derivative of the augmented Lagrangian along v.
  double augmented_derivative(const Vector &u, const Vector &v, const Vector &mu,
                              double penalty) const {
    double d = plain_derivative(u, v);
    if (mu.size() > 0) {
      const Vector shifted = (mu + penalty * spec_.constraints(t_, x_, u)).cwiseMax(0.0);
      d += shifted.dot(spec_.constraint_jacobian(t_, x_, u) * v);
    }
    return d;
  }

private:
  const DynamicProgramSpec &spec_;
  const StateGrid &grid_;
  const Vector &value_next_;
  int t_;
  const Vector &x_;
};

Vector scalar(double v) { return Vector::Constant(1, v); }

double minimize_scalar(const StageObjective &obj, const ScalarInterval &range,
                       const Vector &mu, double penalty, double tolerance) {
  if (range.lower == range.upper) {
    return range.lower;
  }
  auto fn = [&](double u) { return obj.augmented(scalar(u), mu, penalty); };
  const int bits = std::clamp(static_cast<int>(-std::log2(tolerance)), 8, 26);
  const auto [u_brent, f_brent] =
      boost::math::tools::brent_find_minima(fn, range.lower, range.upper, bits);
  double u = u_brent;
  double best = f_brent;
  for (double end : {range.lower, range.upper}) {
    const double f_end = fn(end);
    if (f_end < best) {
      best = f_end;
      u = end;
    }
  }

  // Brent resolves the minimizer only to about the square root of machine
  // precision. Refine by bisection on the sign of the one-sided derivatives,
  // which multiplier updates with large penalties need.
  const Vector plus = scalar(1.0);
  const Vector minus = scalar(-1.0);
  auto right = [&](double p) { return obj.augmented_derivative(scalar(p), plus, mu, penalty); };
  auto left = [&](double p) { return -obj.augmented_derivative(scalar(p), minus, mu, penalty); };

  double a = u;
  double b = u;
  const double width = 1e-6 * (range.upper - range.lower) + 1e-12;
  if (u < range.upper && right(u) < 0.0) {
    double step = width;
    b = std::min(range.upper, u + step);
    while (b < range.upper && left(b) < 0.0) {
      a = b;
      step *= 2.0;
      b = std::min(range.upper, b + step);
    }
    if (b == range.upper && left(b) <= 0.0) {
      return range.upper;
    }
  } else if (u > range.lower && left(u) > 0.0) {
    double step = width;
    a = std::max(range.lower, u - step);
    while (a > range.lower && right(a) > 0.0) {
      b = a;
      step *= 2.0;
      a = std::max(range.lower, a - step);
    }
    if (a == range.lower && right(a) >= 0.0) {
      return range.lower;
    }
  } else {
    return u;
  }
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) {
      break;
    }
    if (right(mid) < 0.0) {
      a = mid;
    } else if (left(mid) > 0.0) {
      b = mid;
    } else {
      return mid;
    }
  }
  return fn(a) <= fn(b) ? a : b;
}

Vector minimize_box(const StageObjective &obj, const ActionBox &box, const Vector &start,
                    const Vector &mu, double penalty, double tolerance) {
  const Index m = start.size();
  Vector u = start;
  double f = obj.augmented(u, mu, penalty);
  double alpha = 1.0;
  for (int iter = 0; iter < 2000; ++iter) {
    Vector g(m);
    for (Index j = 0; j < m; ++j) {
      g(j) = obj.augmented_derivative(u, Vector::Unit(m, j), mu, penalty);
    }
    bool moved = false;
    Vector u_new = u;
    while (alpha > 1e-16) {
      u_new = (u - alpha * g).cwiseMax(box.lower).cwiseMin(box.upper);
      if (obj.admissible(u_new)) {
        const double f_new = obj.augmented(u_new, mu, penalty);
        if (f_new <= f - 1e-4 * g.dot(u - u_new)) {
          moved = (u_new - u).cwiseAbs().maxCoeff() > 0.0;
          f = f_new;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved) {
      break;
    }
    const double step = (u_new - u).cwiseAbs().maxCoeff();
    u = u_new;
    if (step <= tolerance * (1.0 + u.cwiseAbs().maxCoeff())) {
      break;
    }
    alpha *= 2.0;
  }
  return u;
}

/// Admissible starting point for m > 1: the best point of a coarse lattice
/// over the box whose successor lies on the grid.
bool lattice_start(const StageObjective &obj, const ActionBox &box, Vector &start) {
  const Index m = box.lower.size();
  constexpr int kPerAxis = 5;
  Index total = 1;
  for (Index j = 0; j < m; ++j) {
    total *= kPerAxis;
  }
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  Vector u(m);
  for (Index k = 0; k < total; ++k) {
    Index rest = k;
    for (Index j = 0; j < m; ++j) {
      const double s = static_cast<double>(rest % kPerAxis) / (kPerAxis - 1);
      rest /= kPerAxis;
      u(j) = box.lower(j) + s * (box.upper(j) - box.lower(j));
    }
    if (obj.admissible(u)) {
      const double f = obj.plain(u);
      if (f < best) {
        best = f;
        start = u;
        found = true;
      }
    }
  }
  return found;
}

} // namespace

void MomOptions::validate() const {
  if (!(penalty_growth >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "penalty growth must be >= 1");
  }
  if (!(initial_penalty > 0.0) || !(multiplier_tolerance > 0.0) || !(inner_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "penalty and tolerances must be positive");
  }
  if (initial_multiplier < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "initial multiplier must be nonnegative");
  }
  if (max_outer_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "need at least one outer iteration");
  }
}

double augmented_lagrangian(const DynamicProgramSpec &spec, const StateGrid &grid,
                            const Vector &value_next, int t, const Vector &x,
                            const Vector &u, const Vector &mu, double penalty) {
  double value = spec.cost(t, x, u) + grid.interpolate(value_next, spec.dynamics(t, x, u));
  if (mu.size() > 0) {
    const Vector h = spec.constraints(t, x, u);
    require_same_size(h.size(), mu.size(), "constraints");
    double acc = 0.0;
    for (Index k = 0; k < mu.size(); ++k) {
      const double shifted = std::max(0.0, mu(k) + penalty * h(k));
      acc += shifted * shifted - mu(k) * mu(k);
    }
    value += acc / (2.0 * penalty);
  }
  return value;
}

ScalarInterval admissible_interval(const DynamicProgramSpec &spec, const StateGrid &grid,
                                   int t, const Vector &x) {
  const ActionBox box = spec.action_box(t, x);
  require_same_size(box.lower.size(), 1, "scalar action box");
  const double lo = box.lower(0);
  const double hi = box.upper(0);
  auto inside = [&](double u) { return grid.contains(spec.dynamics(t, x, scalar(u))); };
  auto sample = [&](int k) { return lo + (hi - lo) * k / (kIntervalSamples - 1); };

  int first = -1;
  int last = -1;
  for (int k = 0; k < kIntervalSamples; ++k) {
    if (inside(sample(k))) {
      if (first < 0) {
        first = k;
      }
      last = k;
    }
  }
  ScalarInterval out;
  if (first < 0) {
    return out;
  }
  // Bisection between an outside point `out_pt` and an inside point `in_pt`;
  // returns the innermost admissible point found.
  auto boundary = [&](double out_pt, double in_pt) {
    for (int i = 0; i < kBisectionSteps; ++i) {
      const double mid = 0.5 * (out_pt + in_pt);
      if (mid == out_pt || mid == in_pt) {
        break;
      }
      (inside(mid) ? in_pt : out_pt) = mid;
    }
    return in_pt;
  };
  out.lower = first == 0 ? lo : boundary(sample(first - 1), sample(first));
  out.upper = last == kIntervalSamples - 1 ? hi : boundary(sample(last + 1), sample(last));
  return out;
}

StageStateResult solve_stage_state(const DynamicProgramSpec &spec, const StateGrid &grid,
                                   const Vector &value_next, int t, const Vector &x,
                                   const MomOptions &options) {
  const Index m = spec.action_dim();
  const Index r = spec.constraint_dim();
  const StageObjective obj(spec, grid, value_next, t, x);
  StageStateResult result;

  ScalarInterval range;
  ActionBox box = spec.action_box(t, x);
  Vector start;
  bool has_start = false;
  if (m == 1) {
    range = admissible_interval(spec, grid, t, x);
    has_start = !range.empty();
  } else {
    has_start = lattice_start(obj, box, start);
  }

  if (!has_start) {
    // No action keeps the successor on the grid. Report the action whose
    // successor is nearest the grid and value it with the clamped successor.
    result.flags |= kNodeNoAdmissibleAction;
    Vector best_u = 0.5 * (box.lower + box.upper);
    double best_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kIntervalSamples; ++k) {
      const Vector u = box.lower + (box.upper - box.lower) * (double(k) / (kIntervalSamples - 1));
      const Vector y = spec.dynamics(t, x, u);
      const double gap = (y - clamp_to_grid(grid, y)).norm();
      if (gap < best_gap) {
        best_gap = gap;
        best_u = u;
      }
    }
    result.action = best_u;
    result.multiplier = Vector::Zero(r);
    result.value = spec.cost(t, x, best_u) +
                   grid.interpolate(value_next, clamp_to_grid(grid, spec.dynamics(t, x, best_u)));
    return result;
  }

  Vector mu = Vector::Constant(r, options.initial_multiplier);
  double penalty = options.initial_penalty;
  Vector u = has_start && m > 1 ? start : Vector::Zero(m);
  bool converged = false;
  for (int i = 0; i < options.max_outer_iterations; ++i) {
    if (m == 1) {
      u = scalar(minimize_scalar(obj, range, mu, penalty, options.inner_tolerance));
    } else {
      u = minimize_box(obj, box, u, mu, penalty, options.inner_tolerance);
    }
    result.outer_iterations = i + 1;
    result.final_penalty = penalty;
    if (r == 0) {
      converged = true;
      break;
    }
    const Vector updated = (mu + penalty * spec.constraints(t, x, u)).cwiseMax(0.0);
    const double change = (updated - mu).cwiseAbs().maxCoeff();
    mu = updated;
    penalty *= options.penalty_growth;
    if (change <= options.multiplier_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    result.flags |= kNodeIterationLimit;
  }
  result.action = u;
  result.multiplier = mu;
  result.value = obj.plain(u);
  return result;
}

DpSolution backward_induction(const DynamicProgramSpec &spec, const StateGrid &grid,
                              const MomOptions &options) {
  options.validate();
  const int horizon = spec.horizon();
  if (horizon < 0) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  }
  require_same_size(grid.dimension(), spec.state_dim(), "grid dimension");
  const Index nodes = grid.size();
  const Index m = spec.action_dim();
  const Index r = spec.constraint_dim();

  DpSolution sol;
  sol.value.assign(horizon + 2, Vector(nodes));
  sol.policy.assign(horizon + 1, Matrix(nodes, m));
  sol.multiplier.assign(horizon + 1, Matrix(nodes, r));
  sol.flags.assign(horizon + 1, std::vector<std::uint32_t>(nodes, kNodeOk));
  sol.outer_iterations.assign(horizon + 1, std::vector<int>(nodes, 0));

  for (Index i = 0; i < nodes; ++i) {
    sol.value[horizon + 1](i) = spec.terminal_cost(grid.point(i));
  }
  for (int t = horizon; t >= 0; --t) {
    const Vector &next = sol.value[t + 1];
    parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t k) {
      const Index i = static_cast<Index>(k);
      const StageStateResult res = solve_stage_state(spec, grid, next, t, grid.point(i), options);
      sol.value[t](i) = res.value;
      sol.policy[t].row(i) = res.action.transpose();
      sol.multiplier[t].row(i) = res.multiplier.transpose();
      sol.flags[t][i] = res.flags;
      sol.outer_iterations[t][i] = res.outer_iterations;
    });
    const auto flagged = std::count_if(sol.flags[t].begin(), sol.flags[t].end(),
                                       [](std::uint32_t f) { return f != kNodeOk; });
    if (static_cast<double>(flagged) > options.max_flagged_fraction * static_cast<double>(nodes)) {
      std::ostringstream msg;
      msg << "stage " << t << ": " << flagged << " of " << nodes << " nodes flagged";
      throw Error(ErrorCode::TooManyFlaggedNodes, msg.str());
    }
  }
  return sol;
}

double interpolate_value(const Vector &table, const StateGrid &grid, const Vector &x) {
  return grid.interpolate(table, x);
}

Trajectory simulate_trajectory(const DynamicProgramSpec &spec, const StateGrid &grid,
                               const DpSolution &solution, const Vector &x0) {
  Trajectory traj;
  Vector x = x0;
  traj.states.push_back(x);
  for (int t = 0; t <= solution.horizon(); ++t) {
    Vector u;
    try {
      u = grid.interpolate_columns(solution.policy[t], x);
    } catch (const Error &err) {
      throw Error(err.code(), "rollout left the grid at stage " + std::to_string(t) + ": " +
                                  err.what());
    }
    const double c = spec.cost(t, x, u);
    traj.actions.push_back(u);
    traj.stage_costs.push_back(c);
    traj.total_cost += c;
    x = spec.dynamics(t, x, u);
    traj.states.push_back(x);
  }
  const double terminal = spec.terminal_cost(x);
  traj.stage_costs.push_back(terminal);
  traj.total_cost += terminal;
  return traj;
}

KktResidual kkt_residual(const DynamicProgramSpec &spec, const StateGrid &grid,
                         const DpSolution &solution, int t, Index node) {
  const Vector x = grid.point(node);
  const Vector u = solution.policy[t].row(node).transpose();
  const Vector mu = solution.multiplier[t].row(node).transpose();
  const Index m = u.size();
  const StageObjective obj(spec, grid, solution.value[t + 1], t, x);

  Vector lower = spec.action_box(t, x).lower;
  Vector upper = spec.action_box(t, x).upper;
  if (m == 1) {
    const ScalarInterval range = admissible_interval(spec, grid, t, x);
    if (!range.empty()) {
      lower(0) = range.lower;
      upper(0) = range.upper;
    }
  }

  KktResidual res;
  Vector multiplier_gradient = Vector::Zero(m);
  if (mu.size() > 0) {
    multiplier_gradient = spec.constraint_jacobian(t, x, u).transpose() * mu;
    res.complementarity = mu.cwiseProduct(spec.constraints(t, x, u)).cwiseAbs().maxCoeff();
  }
  for (Index j = 0; j < m; ++j) {
    const Vector ej = Vector::Unit(m, j);
    const double slack = 1e-9 * (1.0 + std::abs(u(j)));
    const double right = obj.plain_derivative(u, ej) + multiplier_gradient(j);
    const double left = -obj.plain_derivative(u, -ej) + multiplier_gradient(j);
    if (u(j) < upper(j) - slack) {
      res.stationarity = std::max(res.stationarity, -right);
    }
    if (u(j) > lower(j) + slack) {
      res.stationarity = std::max(res.stationarity, left);
    }
  }
  return res;
}

} // namespace wasp
