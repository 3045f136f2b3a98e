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
#include <utility>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wasp/errors.hpp"
#include "wasp/problems.hpp"

namespace wasp {
namespace {

// x' = x + u in n dimensions, c_t = w |u|^2, h = u - cap (componentwise),
// terminal |x - target|^2. The stage problem separates by coordinate.
class ShiftProgram final : public DynamicProgramSpec {
public:
  ShiftProgram(Index n, int horizon, double weight, double cap, double target)
      : n_(n), horizon_(horizon), weight_(weight), cap_(cap), target_(target) {}
  int horizon() const override { return horizon_; }
  Index state_dim() const override { return n_; }
  Index action_dim() const override { return n_; }
  Index constraint_dim() const override { return n_; }
  Vector dynamics(int, const Vector &x, const Vector &u) const override { return x + u; }
  Matrix dynamics_jacobian(int, const Vector &, const Vector &) const override {
    return Matrix::Identity(n_, n_);
  }
  std::vector<Matrix> dynamics_hessians(int, const Vector &, const Vector &) const override {
    return std::vector<Matrix>(n_, Matrix::Zero(n_, n_));
  }
  double cost(int, const Vector &, const Vector &u) const override {
    return weight_ * u.squaredNorm();
  }
  Vector cost_gradient(int, const Vector &, const Vector &u) const override {
    return 2.0 * weight_ * u;
  }
  Matrix cost_hessian(int, const Vector &, const Vector &) const override {
    return 2.0 * weight_ * Matrix::Identity(n_, n_);
  }
  Vector constraints(int, const Vector &, const Vector &u) const override {
    return u - Vector::Constant(n_, cap_);
  }
  Matrix constraint_jacobian(int, const Vector &, const Vector &) const override {
    return Matrix::Identity(n_, n_);
  }
  double terminal_cost(const Vector &x) const override {
    return (x - Vector::Constant(n_, target_)).squaredNorm();
  }
  ActionBox action_box(int, const Vector &) const override {
    return {Vector::Constant(n_, -3.0), Vector::Constant(n_, 3.0)};
  }

private:
  Index n_;
  int horizon_;
  double weight_;
  double cap_;
  double target_;
};

StateGrid velocity_grid(Index nodes = 2001) { return StateGrid({Axis{2.0, 22.0, nodes}}); }

Vector terminal_table(const DynamicProgramSpec &spec, const StateGrid &grid) {
  Vector v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    v(i) = spec.terminal_cost(grid.point(i));
  }
  return v;
}

TEST(AugmentedLagrangian, SlackConstraintAddsNothing) {
  const ShiftProgram spec(1, 0, 1.0, 5.0, 0.0);
  const StateGrid grid({Axis{-4, 4, 9}});
  const Vector next = terminal_table(spec, grid);
  const Vector x = Vector::Constant(1, 0.5);
  const Vector u = Vector::Constant(1, 0.25);
  EXPECT_DOUBLE_EQ(augmented_lagrangian(spec, grid, next, 0, x, u, Vector::Zero(1), 1.0),
                   spec.cost(0, x, u) + grid.interpolate(next, x + u));
}

TEST(AugmentedLagrangian, PenaltyTermHandValues) {
  const ShiftProgram spec(1, 0, 0.0, 0.5, 0.0);
  const StateGrid grid({Axis{-4, 4, 9}});
  const Vector zero = Vector::Zero(grid.size());
  const Vector x = Vector::Zero(1);
  // h = +0.5, mu = 0, c = 2: (1 / 4) max(0, 1)^2.
  EXPECT_NEAR(augmented_lagrangian(spec, grid, zero, 0, x, Vector::Constant(1, 1.0),
                                   Vector::Zero(1), 2.0),
              0.25, 1e-15);
  // h = -2, mu = 1, c = 1: 1/2 (max(0, -1)^2 - 1).
  EXPECT_NEAR(augmented_lagrangian(spec, grid, zero, 0, x, Vector::Constant(1, -1.5),
                                   Vector::Ones(1), 1.0),
              -0.5, 1e-15);
}

TEST(SolveStageState, VelocityAtReferenceStaysPut) {
  const VelocityTrackingProblem p;
  const VelocityTrackingSpec spec(p);
  const StateGrid grid = velocity_grid();
  const StageStateResult r = solve_stage_state(spec, grid, terminal_table(spec, grid), p.horizon,
                                               Vector::Constant(1, p.v_ref));
  EXPECT_NEAR(r.action(0), 0.0, 1e-6);
  EXPECT_EQ(r.multiplier.norm(), 0.0);
}

TEST(SolveStageState, VelocityLastStageUnconstrained) {
  const VelocityTrackingProblem p;
  const VelocityTrackingSpec spec(p);
  const StateGrid grid = velocity_grid(4001);
  const oracle::ScalarRiccati ric = oracle::scalar_riccati(p.w_p, p.w_e, p.dt, p.horizon);
  EXPECT_NEAR(ric.k[p.horizon], 5.0 / 6.0, 1e-15);
  const StageStateResult r = solve_stage_state(spec, grid, terminal_table(spec, grid), p.horizon,
                                               Vector::Constant(1, 10.0));
  EXPECT_NEAR(r.action(0), 5.0 / 3.0, 5e-3);
  EXPECT_EQ(r.multiplier.norm(), 0.0);
  EXPECT_EQ(r.flags, kNodeOk);
}

TEST(SolveStageState, VelocityLastStageClippedWithMultiplier) {
  const VelocityTrackingProblem p;
  const VelocityTrackingSpec spec(p);
  const StateGrid grid = velocity_grid(4001);
  const StageStateResult r = solve_stage_state(spec, grid, terminal_table(spec, grid), p.horizon,
                                               Vector::Constant(1, 8.0));
  EXPECT_NEAR(r.action(0), 2.0, 1e-6);
  // Stationarity 2 w_e u + 2 w_p (v + u - v_ref) + mu = 0 at u = 2.
  EXPECT_NEAR(r.multiplier(0), 16.0, 0.1);
  EXPECT_EQ(r.multiplier(1), 0.0);
  EXPECT_DOUBLE_EQ(r.final_penalty,
                   MomOptions{}.initial_penalty *
                       std::pow(MomOptions{}.penalty_growth, r.outer_iterations - 1));
}

TEST(SolveStageState, MultiDimensionalBoxMatchesClippedClosedForm) {
  // min w |u|^2 + |x + u - r|^2 s.t. u <= cap separates into clipped scalars.
  const double w = 1.0, cap = 0.4, target = 1.0;
  const ShiftProgram spec(2, 0, w, cap, target);
  const StateGrid grid({Axis{-3, 3, 401}, Axis{-3, 3, 401}});
  const Vector next = terminal_table(spec, grid);
  for (const auto &xs : {std::pair{0.0, 0.5}, std::pair{-1.0, 1.2}, std::pair{0.9, -0.4}}) {
    const Vector x = (Vector(2) << xs.first, xs.second).finished();
    const StageStateResult r = solve_stage_state(spec, grid, next, 0, x);
    for (Index i = 0; i < 2; ++i) {
      const double free = (target - x(i)) / (1.0 + w);
      EXPECT_NEAR(r.action(i), std::min(free, cap), 0.01) << "x = " << x.transpose();
      if (free > cap) {
        // 2 w u + 2 (x + u - r) + mu = 0.
        EXPECT_NEAR(r.multiplier(i), -(2 * w * cap + 2 * (x(i) + cap - target)), 0.05);
      } else {
        EXPECT_EQ(r.multiplier(i), 0.0);
      }
    }
  }
}

TEST(BackwardInduction, ResourceAllocationClosedForm) {
  ResourceAllocationProblem p;
  p.coefficients = {1, 1, 1, 1};
  const ResourceAllocationSpec spec(p);
  const StateGrid grid({Axis{0.1, 10.0, 200, Spacing::Log}});
  const DpSolution sol = backward_induction(spec, grid);
  ASSERT_EQ(sol.horizon(), 2);
  double worst = 0.0;
  for (Index i = 1; i + 1 < grid.size(); ++i) {
    const double x = grid.point(i)(0);
    for (int t = 0; t <= 2; ++t) {
      // Skip nodes whose optimal path would end below the grid.
      const double tail = oracle::resource_tail(p.coefficients, t);
      if (x * p.coefficients.back() / tail < grid.nodes(0)[1]) {
        continue;
      }
      const double exact = p.coefficients[t] * x / oracle::resource_tail(p.coefficients, t);
      worst = std::max(worst, std::abs(sol.policy[t](i, 0) - exact) / exact);
    }
  }
  EXPECT_LE(worst, 0.01);
  // Realized cost of a rollout agrees with the value table.
  const Vector x0 = Vector::Constant(1, 5.0);
  const Trajectory traj = simulate_trajectory(spec, grid, sol, x0);
  const double v0 = interpolate_value(sol.value[0], grid, x0);
  EXPECT_NEAR(traj.total_cost, v0, 0.01 * std::abs(v0));
}

TEST(BackwardInduction, SingleStageCollapsesToStaticMinimization) {
  // T = 0 with zero stage cost: V_0(x) = min_u |x + u - r|^2 over u <= cap.
  const ShiftProgram spec(1, 0, 0.0, 0.5, 1.0);
  const StateGrid grid({Axis{-2, 2, 81}});
  const DpSolution sol = backward_induction(spec, grid);
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i)(0);
    const double gap = std::max(0.0, 1.0 - x - 0.5);
    EXPECT_NEAR(sol.value[0](i), gap * gap, 1e-5) << "x = " << x;
  }
}

TEST(BackwardInduction, ZeroCostRolloutCostsNothing) {
  const ShiftProgram spec(1, 2, 0.0, 1.0, 0.0);
  // Terminal cost is nonzero, so only compare stage costs.
  const StateGrid grid({Axis{-4, 4, 41}});
  const DpSolution sol = backward_induction(spec, grid);
  const Trajectory traj = simulate_trajectory(spec, grid, sol, Vector::Constant(1, 2.0));
  ASSERT_EQ(traj.stage_costs.size(), 4u);
  for (int t = 0; t <= 2; ++t) {
    EXPECT_EQ(traj.stage_costs[t], 0.0);
  }
}

class VelocityDp : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    spec_ = new VelocityTrackingSpec(VelocityTrackingProblem{});
    grid_ = new StateGrid(velocity_grid());
    solution_ = new DpSolution(backward_induction(*spec_, *grid_));
  }
  static void TearDownTestSuite() {
    delete solution_;
    delete grid_;
    delete spec_;
  }
  static VelocityTrackingSpec *spec_;
  static StateGrid *grid_;
  static DpSolution *solution_;
};

VelocityTrackingSpec *VelocityDp::spec_ = nullptr;
StateGrid *VelocityDp::grid_ = nullptr;
DpSolution *VelocityDp::solution_ = nullptr;

TEST_F(VelocityDp, MatchesRiccatiWhereBoundsAreSlack) {
  const VelocityTrackingProblem &p = spec_->problem();
  const oracle::ScalarRiccati ric = oracle::scalar_riccati(p.w_p, p.w_e, p.dt, p.horizon);
  int checked = 0;
  for (int t = 0; t <= p.horizon; ++t) {
    for (Index i = 0; i < grid_->size(); ++i) {
      // Slack: the unconstrained closed loop from here never touches a bound.
      double v = grid_->point(i)(0);
      double first = 0.0;
      bool slack = true;
      for (int s = t; s <= p.horizon && slack; ++s) {
        const double a = -ric.k[s] * (v - p.v_ref);
        slack = a > p.a_min && a < p.a_max;
        first = s == t ? a : first;
        v += a * p.dt;
      }
      if (!slack) {
        continue;
      }
      ++checked;
      EXPECT_NEAR(solution_->policy[t](i, 0), first, 0.01 * std::max(1.0, std::abs(first)));
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST_F(VelocityDp, KktAndComplementarityAtEveryNode) {
  for (int t = 0; t <= solution_->horizon(); ++t) {
    for (Index i = 0; i < grid_->size(); ++i) {
      const KktResidual k = kkt_residual(*spec_, *grid_, *solution_, t, i);
      ASSERT_LE(k.stationarity, 1e-4) << "t " << t << " node " << i;
      ASSERT_LE(k.complementarity, 1e-4) << "t " << t << " node " << i;
      ASSERT_GE(solution_->multiplier[t].row(i).minCoeff(), 0.0);
      ASSERT_EQ(solution_->flags[t][i], kNodeOk);
    }
  }
}

TEST_F(VelocityDp, BellmanConsistency) {
  for (int t = 0; t <= solution_->horizon(); ++t) {
    for (Index i = 0; i < grid_->size(); ++i) {
      const Vector x = grid_->point(i);
      const Vector u = solution_->policy[t].row(i).transpose();
      const double rhs =
          spec_->cost(t, x, u) + grid_->interpolate(solution_->value[t + 1], spec_->dynamics(t, x, u));
      ASSERT_NEAR(solution_->value[t](i), rhs, 1e-4);
    }
  }
}

TEST_F(VelocityDp, RolloutConvergesToReference) {
  const Trajectory traj = simulate_trajectory(*spec_, *grid_, *solution_, Vector::Constant(1, 10.0));
  ASSERT_EQ(traj.states.size(), 7u);
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    EXPECT_LE(std::abs(traj.states[t](0) - 12.0), std::abs(traj.states[t - 1](0) - 12.0) + 1e-12);
  }
  EXPECT_LE(std::abs(traj.states[3](0) - 12.0), 0.05);
}

TEST(BackwardInduction, RejectsInvalidOptions) {
  const ShiftProgram spec(1, 0, 1.0, 1.0, 0.0);
  const StateGrid grid({Axis{-1, 1, 5}});
  MomOptions bad;
  bad.penalty_growth = 0.5;
  EXPECT_THROW(backward_induction(spec, grid, bad), Error);
}

TEST(InterpolateValue, NodeAndMidpoint) {
  const StateGrid grid({Axis{0, 1, 3}});
  const Vector table = (Vector(3) << 1.0, 3.0, 4.0).finished();
  EXPECT_DOUBLE_EQ(interpolate_value(table, grid, Vector::Constant(1, 0.5)), 3.0);
  EXPECT_DOUBLE_EQ(interpolate_value(table, grid, Vector::Constant(1, 0.25)), 2.0);
  EXPECT_THROW(interpolate_value(table, grid, Vector::Constant(1, 2.0)), Error);
}

TEST(InterpolateValue, BilinearCell) {
  const StateGrid grid({Axis{0, 1, 2}, Axis{0, 1, 2}});
  // Corner values f00 = 1, f01 = 2, f10 = 3, f11 = 7.
  const Vector table = (Vector(4) << 1.0, 2.0, 3.0, 7.0).finished();
  const double a = 0.3, b = 0.6;
  const double expected = 1.0 * (1 - a) * (1 - b) + 2.0 * (1 - a) * b + 3.0 * a * (1 - b) + 7.0 * a * b;
  EXPECT_NEAR(interpolate_value(table, grid, (Vector(2) << a, b).finished()), expected, 1e-15);
}

} // namespace
} // namespace wasp
