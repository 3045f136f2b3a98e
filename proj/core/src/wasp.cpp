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

#include "wasp/wasp.hpp"

#include <algorithm>
#include <sstream>

#include "wasp/errors.hpp"
#include "wasp/parallel.hpp"
#include "wasp/qp.hpp"

namespace wasp {
namespace {

std::uint32_t flag_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::NotPositiveDefinite:
    return kNodeNotPositiveDefinite;
  case ErrorCode::RankDeficientConstraints:
  case ErrorCode::RegularityViolated:
    return kNodeRegularityViolated;
  case ErrorCode::Infeasible:
    return kNodeInfeasible;
  case ErrorCode::IterationLimit:
    return kNodeIterationLimit;
  case ErrorCode::OutOfGrid:
    return kNodeOutOfGrid;
  default:
    return kNodeOk;
  }
}

Vector clamp_to_grid(const StateGrid &grid, const Vector &y) {
  Vector c = y;
  for (Index d = 0; d < grid.dimension(); ++d) {
    c(d) = std::clamp(y(d), grid.nodes(d).front(), grid.nodes(d).back());
  }
  return c;
}

struct NodeDelta {
  Vector d;
  double delta_value = 0.0;
  std::uint32_t flags = kNodeOk;
  int iterations = 0;
  int active = 0;
};

} // namespace

StageMatrices build_stage_matrices(const DynamicProgramSpec &spec,
                                   const PerturbationSpec &pert, const StateGrid &grid,
                                   const NextStage &next, int t, const Vector &x,
                                   const Vector &u, const Vector &mu,
                                   double active_threshold) {
  const Vector y = spec.dynamics(t, x, u);
  const Matrix dudf = spec.dynamics_jacobian(t, x, u);
  const std::vector<Matrix> d2udf = spec.dynamics_hessians(t, x, u);

  const Vector grad_v = next.value_derivatives.gradient_at(grid, y);
  const Matrix hess_v = next.value_derivatives.hessian_at(grid, y);
  const Vector grad_vt = next.delta_derivatives.gradient_at(grid, y);
  const Matrix hess_vt = next.delta_derivatives.hessian_at(grid, y);

  StageMatrices mats;
  mats.h = spec.cost_hessian(t, x, u) + composite_hessian(dudf, hess_v, grad_v, d2udf);
  mats.e = spec.cost_gradient(t, x, u) + composite_gradient(dudf, grad_v);
  mats.h_tilde = pert.cost_hessian(t, x, u) + composite_hessian(dudf, hess_vt, grad_vt, d2udf);
  mats.e_tilde = pert.cost_gradient(t, x, u) + composite_gradient(dudf, grad_vt);

  const Index r = spec.constraint_dim();
  const Index m = spec.action_dim();
  mats.a_hat = spec.constraint_jacobian(t, x, u);
  mats.h_value = spec.constraints(t, x, u);
  const Vector h_tilde = pert.constraint_offset(t);
  require_same_size(h_tilde.size(), r, "constraint offset");
  mats.b_hat = -mats.h_value - pert.epsilon() * h_tilde;

  for (Index k = 0; k < r; ++k) {
    if (mu(k) > active_threshold) {
      mats.active.push_back(k);
    }
  }
  const Index s = static_cast<Index>(mats.active.size());
  mats.a.resize(s, m);
  mats.b_tilde.resize(s);
  for (Index k = 0; k < s; ++k) {
    mats.a.row(k) = mats.a_hat.row(mats.active[k]);
    mats.b_tilde(k) = -h_tilde(mats.active[k]);
  }
  return mats;
}

Vector stage_delta_equality(const StageMatrices &mats) {
  const Index m = mats.h.rows();
  const Index s = mats.a.rows();
  if (row_rank(mats.a) < s) {
    throw Error(ErrorCode::RegularityViolated, "active constraint rows are dependent");
  }
  // In the step variable the stage optimum sits at the origin.
  const QuadraticProgram qp(mats.h, Vector::Zero(m), mats.a, Vector::Zero(s));
  const QpSolution sol{Vector::Zero(m), Vector::Zero(s), 0.0};
  const QpPerturbation pert{Matrix::Zero(m, m), mats.e_tilde, mats.b_tilde, 1.0};
  return perturb_at_zero(qp, sol, pert).d;
}

InequalityDelta stage_delta_inequality(const StageMatrices &mats, double epsilon) {
  // The tabulated gradient e only approximately equals -A^T mu, so the
  // unperturbed subproblem has a small nonzero minimizer of its own.
  // Subtracting it isolates the response to the perturbation.
  const InequalityQpResult perturbed =
      solve_inequality_qp(mats.h + epsilon * mats.h_tilde, mats.e + epsilon * mats.e_tilde,
                          mats.a_hat, mats.b_hat);
  const InequalityQpResult nominal =
      solve_inequality_qp(mats.h, mats.e, mats.a_hat, Vector(-mats.h_value));
  return {perturbed.d - nominal.d, perturbed.iterations + nominal.iterations};
}

double stage_value_delta(const DynamicProgramSpec &spec, const PerturbationSpec &pert,
                         const StateGrid &grid, const Vector &delta_value_next, int t,
                         const Vector &x, const Vector &u, const Vector &e,
                         const Vector &d) {
  // The successor term V~_{t+1}(f_t) carries the perturbation of later
  // stages; without it the recursion would drop everything but c~_t.
  return pert.cost(t, x, u) +
         grid.interpolate(delta_value_next, spec.dynamics(t, x, u)) + e.dot(d);
}

WaspResult wasp_backward_pass(const DynamicProgramSpec &spec, const PerturbationSpec &pert,
                              const DpSolution &base, const StateGrid &grid,
                              const WaspOptions &options) {
  const int horizon = spec.horizon();
  if (base.horizon() != horizon) {
    throw Error(ErrorCode::DimensionMismatch, "base solution horizon does not match");
  }
  const double eps = pert.epsilon();
  if (!(eps >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  }
  const Index nodes = grid.size();
  const Index m = spec.action_dim();

  WaspResult res;
  res.mode = options.mode;
  res.epsilon = eps;
  res.delta_policy.assign(horizon + 1, Matrix::Zero(nodes, m));
  res.delta_value.assign(horizon + 2, Vector::Zero(nodes));
  res.flags.assign(horizon + 1, std::vector<std::uint32_t>(nodes, kNodeOk));
  res.qp_iterations.assign(horizon + 1, std::vector<int>(nodes, 0));
  res.active_count.assign(horizon + 1, std::vector<int>(nodes, 0));
  for (Index i = 0; i < nodes; ++i) {
    res.delta_value[horizon + 1](i) = pert.terminal_cost(grid.point(i));
  }

  Trajectory nominal;
  if (options.mode == WaspMode::TrajectoryFrozen) {
    if (options.trajectory_start.size() != spec.state_dim()) {
      throw Error(ErrorCode::InvalidArgument, "trajectory-frozen mode needs a start state");
    }
    nominal = simulate_trajectory(spec, grid, base, options.trajectory_start);
  }

  for (int t = horizon; t >= 0; --t) {
    const GridDerivatives value_deriv = grid_gradient_hessian(base.value[t + 1], grid);
    const GridDerivatives delta_deriv = grid_gradient_hessian(res.delta_value[t + 1], grid);
    const NextStage next{base.value[t + 1], value_deriv, res.delta_value[t + 1], delta_deriv};

    Vector frozen_d;
    if (options.mode == WaspMode::TrajectoryFrozen) {
      const Vector &xt = nominal.states[t];
      const Vector ut = grid.interpolate_columns(base.policy[t], xt);
      const Vector mut = grid.interpolate_columns(base.multiplier[t], xt);
      frozen_d = stage_delta_equality(build_stage_matrices(spec, pert, grid, next, t, xt, ut,
                                                           mut, options.active_threshold));
    }

    parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t k) {
      const Index i = static_cast<Index>(k);
      const Vector x = grid.point(i);
      const Vector u = base.policy[t].row(i).transpose();
      const Vector mu = base.multiplier[t].row(i).transpose();
      NodeDelta out;
      out.d = Vector::Zero(m);
      try {
        const StageMatrices mats =
            build_stage_matrices(spec, pert, grid, next, t, x, u, mu, options.active_threshold);
        out.active = static_cast<int>(mats.active.size());
        switch (options.mode) {
        case WaspMode::Equality:
          out.d = stage_delta_equality(mats);
          break;
        case WaspMode::Inequality:
          if (eps > 0.0) {
            try {
              const InequalityDelta step = stage_delta_inequality(mats, eps);
              out.d = step.d / eps;
              out.iterations = step.iterations;
            } catch (const Error &err) {
              // The tabulated curvature of V~ is noisy near kinks of the
              // base policy; an indefinite perturbed Hessian there says
              // nothing about the node, so take the linear step.
              if (err.code() != ErrorCode::NotPositiveDefinite) {
                throw;
              }
              out.d = stage_delta_equality(mats);
              out.flags |= kNodeEqualityFallback;
            }
          }
          break;
        case WaspMode::TrajectoryFrozen:
          out.d = frozen_d;
          break;
        }
        out.delta_value = stage_value_delta(spec, pert, grid, res.delta_value[t + 1], t, x, u,
                                            mats.e, out.d);
      } catch (const Error &err) {
        const std::uint32_t flag = flag_for(err.code());
        if (flag == kNodeOk) {
          throw;
        }
        out.flags |= flag;
        out.d = Vector::Zero(m);
        out.delta_value = pert.cost(t, x, u) +
                          grid.interpolate(res.delta_value[t + 1],
                                           clamp_to_grid(grid, spec.dynamics(t, x, u)));
      }
      res.delta_policy[t].row(i) = out.d.transpose();
      res.delta_value[t](i) = out.delta_value;
      res.flags[t][i] = out.flags;
      res.qp_iterations[t][i] = out.iterations;
      res.active_count[t][i] = out.active;
    });

    const auto flagged = std::count_if(res.flags[t].begin(), res.flags[t].end(),
                                       [](std::uint32_t f) { return node_failed(f); });
    if (static_cast<double>(flagged) > options.max_flagged_fraction * static_cast<double>(nodes)) {
      std::ostringstream msg;
      msg << "perturbation pass, stage " << t << ": " << flagged << " of " << nodes
          << " nodes flagged";
      throw Error(ErrorCode::TooManyFlaggedNodes, msg.str());
    }
  }

  res.policy.resize(horizon + 1);
  res.value.resize(horizon + 2);
  for (int t = 0; t <= horizon; ++t) {
    res.policy[t] = base.policy[t] + eps * res.delta_policy[t];
  }
  for (int t = 0; t <= horizon + 1; ++t) {
    res.value[t] = base.value[t] + eps * res.delta_value[t];
  }
  return res;
}

} // namespace wasp
