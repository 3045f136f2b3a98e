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


// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "wasp/dp_solver.hpp"
#include "wasp/experiment.hpp"
#include "wasp/nlp_perturb.hpp"
#include "wasp/problems.hpp"
#include "wasp/qp.hpp"
#include "wasp/value_calculus.hpp"
#include "wasp/wasp.hpp"

namespace {

using namespace wasp;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char *format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome example_qp_golden() {
  Outcome out;
  const auto start = Clock::now();
  Matrix h(2, 2), ht(2, 2), a(1, 2);
  h << 6, 2, 2, 1;
  ht << 0.5, 0.1, 0.1, 0.3;
  a << 0, -1;
  const Vector e = (Vector(2) << 3, 5).finished();
  const Vector et = (Vector(2) << 0.4, 0.2).finished();
  const Vector b = Vector::Zero(1);
  const Vector bt = Vector::Constant(1, -0.3);
  const QuadraticProgram qp(h, e, a, b);
  const QpSolution sol = solve_equality_qp(qp);
  const QpSolution perturbed = solve_equality_qp(QuadraticProgram(h + ht, e + et, a, b + bt));
  const FirstOrderQpDelta delta = perturb_qp(qp, sol, QpPerturbation{ht, et, bt, 1.0});
  const double elapsed = seconds_since(start);

  const double tol = 1e-3;
  auto near = [&](double got, double want, const char *name) {
    out.require(std::abs(got - want) <= tol, std::string(name) + fmt(" off by %.3g", std::abs(got - want)));
  };
  near(sol.z_star(0), -0.5, "z*_0");
  near(sol.z_star(1), 0.0, "z*_1");
  near(sol.kappa_star(0), 4.0, "k*");
  near(perturbed.z_star(0), -0.62, "z~*_0");
  near(perturbed.z_star(1), 0.3, "z~*_1");
  near(perturbed.kappa_star(0), 4.288, "k~*");
  near(delta.k_tilde(0), 0.2, "k~");
  near(delta.d(0), -0.125, "d_0");
  near(delta.d(1), 0.3, "d_1");
  out.require(elapsed < 1e-3, fmt("runtime %.3g s", elapsed));
  out.detail += (out.detail.empty() ? "" : "; ") +
                fmt("z*=[%.4f,%.4f] ", sol.z_star(0), sol.z_star(1)) +
                fmt("k~=%.4f d=[%.4f,%.4f]", delta.k_tilde(0), delta.d(0), delta.d(1));
  return out;
}

StaticProgram one_step_resource(double c, double s, double ct, double st, double x) {
  StaticProgram sp;
  sp.dimension = 1;
  sp.num_constraints = 2;
  sp.objective = [=](const Vector &u) { return -c * std::log(u(0)) - s * std::log(x - u(0)); };
  sp.gradient = [=](const Vector &u) { return Vector::Constant(1, -c / u(0) + s / (x - u(0))); };
  sp.hessian = [=](const Vector &u) {
    return Matrix::Constant(1, 1, c / (u(0) * u(0)) + s / ((x - u(0)) * (x - u(0))));
  };
  sp.constraints = [=](const Vector &u) { return Vector((Vector(2) << u(0) - x, -u(0)).finished()); };
  sp.objective_tilde = [=](const Vector &u) { return -ct * std::log(u(0)) - st * std::log(x - u(0)); };
  sp.gradient_tilde = [=](const Vector &u) {
    return Vector::Constant(1, -ct / u(0) + st / (x - u(0)));
  };
  sp.hessian_tilde = [=](const Vector &u) {
    return Matrix::Constant(1, 1, ct / (u(0) * u(0)) + st / ((x - u(0)) * (x - u(0))));
  };
  sp.constraint_tilde = Vector::Zero(2);
  return sp;
}

Outcome one_step_resource_allocation() {
  Outcome out;
  const double c = 5, s = 10, ct = -0.3, st = 0.4;
  auto split_value = [](double cc, double ss, double x) {
    const double u = cc * x / (cc + ss);
    return -cc * std::log(u) - ss * std::log(x - u);
  };
  double worst_time = 0.0;
  for (double x : {0.5, 1.0, 4.0}) {
    const auto start = Clock::now();
    const StaticProgram sp = one_step_resource(c, s, ct, st, x);
    const KnownOptimum opt(sp, Vector::Constant(1, c * x / (c + s)), Vector::Zero(2));
    const StaticDelta delta = first_order_static(sp, opt, 1.0);
    worst_time = std::max(worst_time, seconds_since(start));
    const double exact_d = (c + ct) * x / (c + ct + s + st) - c * x / (c + s);
    // Value change constant: strip the -(C~ + S~) ln x part that both share.
    const double est_v = delta.value_delta + (ct + st) * std::log(x);
    const double exact_v = split_value(c + ct, s + st, x) - split_value(c, s, x) +
                           (ct + st) * std::log(x);
    out.require(std::abs(delta.d(0) + 0.0222 * x) <= 5e-5 * x, fmt("d=%.6f at x=%.2f", delta.d(0), x));
    out.require(std::abs(exact_d + 0.0221 * x) <= 5e-5 * x, fmt("exact d=%.6f at x=%.2f", exact_d, x));
    out.require(std::abs(est_v + 0.2007) <= 5e-4, fmt("value estimate %.5f at x=%.2f", est_v, x));
    out.require(std::abs(exact_v + 0.1841) <= 5e-4, fmt("exact value %.5f at x=%.2f", exact_v, x));
    if (x == 1.0) {
      out.detail += (out.detail.empty() ? "" : "; ") +
                    fmt("d/x=%.5f exact=%.5f ", delta.d(0), exact_d) +
                    fmt("value %.4f exact %.4f", est_v, exact_v);
    }
  }
  out.require(worst_time < 1e-3, fmt("runtime %.3g s", worst_time));
  return out;
}

Outcome dynamic_resource_oracle() {
  Outcome out;
  const auto start = Clock::now();
  ResourceAllocationProblem p;
  p.coefficients = {1.0, 1.0, 1.0, 1.0, 1.0};
  p.perturbation = {0.2, -0.1, 0.15, 0.05, -0.1};
  const ResourceAllocationSpec spec(p);
  const ResourceAllocationPerturbation pert(p);
  const StateGrid grid({Axis{0.1, 10.0, 200, Spacing::Log}});
  const DpSolution base = backward_induction(spec, grid);
  WaspOptions options;
  options.mode = WaspMode::Equality;
  const WaspResult res = wasp_backward_pass(spec, pert, base, grid, options);
  const double elapsed = seconds_since(start);

  double worst = 0.0;
  int checked = 0;
  for (int t = 0; t <= spec.horizon(); ++t) {
    const double s = oracle::resource_tail(p.coefficients, t);
    const double s_next = oracle::resource_tail(p.coefficients, t + 1);
    const double st_next = oracle::resource_tail(p.perturbation, t + 1);
    for (Index i = 1; i + 1 < grid.size(); ++i) {
      const double x = grid.point(i)(0);
      // Interior: the optimal path from x ends at least three cells above the
      // lower edge, so no derivative stencil touches nodes whose own optimal
      // path is cut off by the grid.
      if (x * p.coefficients.back() / s < grid.nodes(0)[3]) {
        continue;
      }
      const double exact =
          (p.perturbation[t] * s_next - p.coefficients[t] * st_next) * x / (s * s);
      worst = std::max(worst, std::abs(res.delta_policy[t](i, 0) - exact) / std::abs(exact));
      ++checked;
    }
  }
  out.require(worst <= 0.01, fmt("worst relative error %.4g", worst));
  out.require(elapsed < 10.0, fmt("runtime %.3g s", elapsed));
  out.detail += (out.detail.empty() ? "" : "; ") +
                fmt("worst relative error %.3g%% over %.0f nodes, %.2f s", 100 * worst, checked, elapsed);
  return out;
}

Outcome second_order_scaling() {
  Outcome out;
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    std::mt19937_64 rng(seed);
    const Matrix h = oracle::random_spd(rng, 4);
    Matrix ht = oracle::random_matrix(rng, 4, 4);
    ht = 0.5 * (ht + ht.transpose());
    const Matrix a = oracle::random_matrix(rng, 2, 4);
    const Vector e = oracle::random_vector(rng, 4), et = oracle::random_vector(rng, 4);
    const Vector b = oracle::random_vector(rng, 2), bt = oracle::random_vector(rng, 2);
    const QuadraticProgram qp(h, e, a, b);
    const QpSolution sol = solve_equality_qp(qp);
    std::vector<std::array<double, 3>> errs;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      const Matrix inv_exact = (h + eps * ht).inverse();
      const double err_inv = (inv_exact - perturbed_inverse_first_order(h, ht, eps)).norm();
      const FirstOrderQpDelta delta = perturb_qp(qp, sol, QpPerturbation{ht, et, bt, eps});
      const oracle::KktPoint exact = oracle::kkt_solve(h + eps * ht, e + eps * et, a, b + eps * bt);
      const double err_k = (exact.kappa - (sol.kappa_star + eps * delta.k_tilde)).norm();
      const double err_z = (exact.z - (sol.z_star + eps * delta.d)).norm();
      errs.push_back({err_inv, err_k, err_z});
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
      for (int q = 0; q < 3; ++q) {
        const double ratio = errs[k - 1][q] / errs[k][q];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    }
  }
  out.require(lo >= 25.0 && hi <= 400.0, fmt("ratio outside [25, 400]: %.3g..%.3g", lo, hi));
  out.detail += (out.detail.empty() ? "" : "; ") + fmt("error ratios per 10x step in [%.1f, %.1f]", lo, hi);
  return out;
}

// u -> y = f(u) with y_i = sin(alpha_i . u) + 1/2 (beta_i . u)^2 and
// V(y) = sum_k exp(0.3 y_k) + 1/2 |y|^2.
struct SmoothTriple {
  Matrix alpha, beta;  // n x m

  Vector f(const Vector &u) const {
    return (alpha * u).array().sin().matrix() + 0.5 * (beta * u).array().square().matrix();
  }
  double v(const Vector &y) const { return (0.3 * y.array()).exp().sum() + 0.5 * y.squaredNorm(); }
  Vector v_gradient(const Vector &y) const {
    return (0.3 * (0.3 * y.array()).exp()).matrix() + y;
  }
  Matrix v_hessian(const Vector &y) const {
    Matrix out = Matrix::Identity(y.size(), y.size());
    out.diagonal() += (0.09 * (0.3 * y.array()).exp()).matrix();
    return out;
  }
  // m x n, column i the gradient of y_i.
  Matrix jacobian(const Vector &u) const {
    Matrix j(alpha.cols(), alpha.rows());
    for (Index i = 0; i < alpha.rows(); ++i) {
      j.col(i) = std::cos(alpha.row(i).dot(u)) * alpha.row(i).transpose() +
                 beta.row(i).dot(u) * beta.row(i).transpose();
    }
    return j;
  }
  std::vector<Matrix> hessians(const Vector &u) const {
    std::vector<Matrix> out;
    for (Index i = 0; i < alpha.rows(); ++i) {
      const Vector ai = alpha.row(i).transpose(), bi = beta.row(i).transpose();
      out.push_back(-std::sin(ai.dot(u)) * ai * ai.transpose() + bi * bi.transpose());
    }
    return out;
  }
};

Outcome composite_hessian_check() {
  Outcome out;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 9; ++seed) {
    std::mt19937_64 rng(500 + seed);
    const Index m = 1 + seed % 3, n = 1 + (seed / 3) % 3;
    SmoothTriple tr{oracle::random_matrix(rng, n, m), oracle::random_matrix(rng, n, m)};
    const Vector u = 0.7 * oracle::random_vector(rng, m);
    const Vector y = tr.f(u);
    const Matrix hess = composite_hessian(tr.jacobian(u), tr.v_hessian(y), tr.v_gradient(y), tr.hessians(u));
    const Matrix fd = oracle::fd_hessian([&](const Vector &w) { return tr.v(tr.f(w)); }, u, 1e-4);
    worst = std::max(worst, (hess - fd).norm() / std::max(1.0, fd.norm()));
  }
  out.require(worst <= 1e-4, fmt("relative mismatch %.3g", worst));
  out.detail += (out.detail.empty() ? "" : "; ") + fmt("worst relative mismatch %.2g over 9 triples", worst);
  return out;
}

Outcome dp_correctness() {
  Outcome out;
  const VelocityTrackingProblem p;
  const VelocityTrackingSpec spec(p);
  const StateGrid grid({Axis{2.0, 22.0, 2001}});
  const DpSolution sol = backward_induction(spec, grid);
  const oracle::ScalarRiccati ric = oracle::scalar_riccati(p.w_p, p.w_e, p.dt, p.horizon);

  double worst_policy = 0.0, worst_kkt = 0.0, worst_cs = 0.0;
  int slack_nodes = 0;
  for (int t = 0; t <= p.horizon; ++t) {
    for (Index i = 0; i < grid.size(); ++i) {
      const KktResidual k = kkt_residual(spec, grid, sol, t, i);
      worst_kkt = std::max(worst_kkt, k.stationarity);
      worst_cs = std::max(worst_cs, k.complementarity);
      // Bound-slack: the unconstrained closed loop from (t, v) never reaches a bound.
      double v = grid.point(i)(0), first = 0.0;
      bool slack = true;
      for (int s = t; s <= p.horizon && slack; ++s) {
        const double a = -ric.k[s] * (v - p.v_ref);
        slack = a > p.a_min && a < p.a_max;
        first = s == t ? a : first;
        v += a * p.dt;
      }
      if (slack) {
        ++slack_nodes;
        worst_policy = std::max(worst_policy, std::abs(sol.policy[t](i, 0) - first) /
                                                  std::max(1.0, std::abs(first)));
      }
    }
  }
  const Trajectory traj = simulate_trajectory(spec, grid, sol, Vector::Constant(1, p.v0));
  const double v3 = traj.states[3](0);
  out.require(worst_policy <= 0.01, fmt("policy mismatch %.3g", worst_policy));
  out.require(std::abs(v3 - p.v_ref) <= 0.05, fmt("v_3 = %.4f", v3));
  out.require(worst_kkt <= 1e-4 && worst_cs <= 1e-4, fmt("KKT %.3g, CS %.3g", worst_kkt, worst_cs));
  out.detail += (out.detail.empty() ? "" : "; ") +
                fmt("Riccati mismatch %.3g%% on %.0f slack nodes, ", 100 * worst_policy, slack_nodes) +
                fmt("v_3=%.4f, KKT %.2g, CS %.2g", v3, worst_kkt, worst_cs);
  return out;
}

nlohmann::json velocity_compare_config(std::uint64_t seed, double sigma) {
  return {{"problem", {{"type", "velocity"}}},
          {"grid", {{"axes", {{{"min", 2.0}, {"max", 22.0}, {"count", 401}}}}}},
          {"wasp", {{"mode", "inequality"}}},
          {"perturbation",
           {{"kind", "random"}, {"seed", seed}, {"sigma", sigma}, {"relative_spread", 0.1}}}};
}

struct CompareBatch {
  Outcome outcome;
  double wasp_seconds = 0.0;
  double perturbed_seconds = 0.0;
};

CompareBatch random_perturbation_comparison() {
  CompareBatch batch;
  Outcome &out = batch.outcome;
  const auto start = Clock::now();
  for (double sigma : {0.1, 1.0}) {
    double ratio_sum = 0.0, worst_ratio = 0.0;
    int seeds = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunRecord rec;
      try {
        rec = run_compare(parse_config(velocity_compare_config(seed, sigma)));
      } catch (const std::exception &err) {
        out.require(false, fmt("sigma %.1f seed %.0f: ", sigma, double(seed)) + err.what());
        continue;
      }
      double seed_ratio = 0.0;
      for (const StageMetrics &m : rec.metrics) {
        const double ratio = m.value_wasp_max / m.value_unperturbed_max;
        seed_ratio = std::max(seed_ratio, ratio);
        if (!(m.value_wasp_max < m.value_unperturbed_max)) {
          out.require(false, fmt("sigma %.1f seed %.0f stage %.0f: ", sigma, double(seed), m.stage) +
                                 fmt("e_wasp %.4g >= e_unpert %.4g", m.value_wasp_max,
                                     m.value_unperturbed_max));
        }
      }
      ratio_sum += seed_ratio;
      worst_ratio = std::max(worst_ratio, seed_ratio);
      ++seeds;
      if (sigma == 0.1) {
        batch.wasp_seconds += rec.timings.wasp;
        batch.perturbed_seconds += rec.timings.perturbed_dp;
      }
    }
    const double mean_ratio = seeds > 0 ? ratio_sum / seeds : 1e300;
    if (sigma == 0.1) {
      out.require(mean_ratio <= 0.25, fmt("mean ratio %.3g at sigma 0.1", mean_ratio));
    }
    out.detail += (out.detail.empty() ? "" : "; ") +
                  fmt("sigma %.1f: mean worst-stage ratio %.3f, max %.3f", sigma, mean_ratio, worst_ratio);
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 60.0, fmt("runtime %.3g s", elapsed));
  out.detail += fmt("; %.1f s", elapsed);
  return batch;
}

Outcome speed(const CompareBatch &batch) {
  Outcome out;
  const double ratio = batch.wasp_seconds / batch.perturbed_seconds;
  out.require(ratio < 1.0, fmt("WASP/perturbed DP time ratio %.3g", ratio));
  out.detail += (out.detail.empty() ? "" : "; ") +
                fmt("WASP %.3f s vs perturbed DP %.3f s over 10 runs (ratio %.3f, target 0.5)",
                    batch.wasp_seconds, batch.perturbed_seconds, ratio);
  return out;
}

Outcome zero_perturbation_fixed_point() {
  Outcome out;
  double worst = 0.0;
  const VelocityTrackingSpec velocity{VelocityTrackingProblem{}};
  ResourceAllocationProblem rp;
  rp.coefficients = {1.0, 0.8, 1.2, 1.0};
  const ResourceAllocationSpec resource(rp);
  const StateGrid vgrid({Axis{2.0, 22.0, 401}});
  const StateGrid rgrid({Axis{0.1, 10.0, 200, Spacing::Log}});
  for (const auto &[spec, grid] : {std::pair<const DynamicProgramSpec *, const StateGrid *>{&velocity, &vgrid},
                                   std::pair<const DynamicProgramSpec *, const StateGrid *>{&resource, &rgrid}}) {
    const DpSolution base = backward_induction(*spec, *grid);
    const ZeroPerturbation zero(*spec, 1.0);
    for (WaspMode mode : {WaspMode::Inequality, WaspMode::Equality}) {
      WaspOptions options;
      options.mode = mode;
      const WaspResult res = wasp_backward_pass(*spec, zero, base, *grid, options);
      for (int t = 0; t <= spec->horizon(); ++t) {
        worst = std::max(worst, (res.policy[t] - base.policy[t]).cwiseAbs().maxCoeff());
      }
      for (int t = 0; t <= spec->horizon() + 1; ++t) {
        worst = std::max(worst, (res.value[t] - base.value[t]).cwiseAbs().maxCoeff());
      }
    }
  }
  out.require(worst <= 1e-12, fmt("max deviation %.3g", worst));
  out.detail += (out.detail.empty() ? "" : "; ") + fmt("max deviation %.3g", worst);
  return out;
}

bool report(int id, const char *name, const std::function<Outcome()> &check) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception &err) {
    out.pass = false;
    out.detail = std::string("exception: ") + err.what();
  }
  std::printf("%s  [%d] %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
  return out.pass;
}

} // namespace

int main() {
  bool ok = true;
  ok &= report(1, "equality QP example and its perturbation", example_qp_golden);
  ok &= report(2, "one-step resource allocation", one_step_resource_allocation);
  ok &= report(3, "dynamic resource allocation vs closed form", dynamic_resource_oracle);
  ok &= report(4, "second-order error scaling", second_order_scaling);
  ok &= report(5, "composite Hessian vs finite differences", composite_hessian_check);
  ok &= report(6, "velocity DP vs Riccati, trajectory and KKT", dp_correctness);
  CompareBatch batch;
  ok &= report(7, "random perturbations: WASP beats unperturbed", [&] {
    batch = random_perturbation_comparison();
    return batch.outcome;
  });
  ok &= report(8, "WASP phase faster than perturbed DP", [&] {
    if (batch.perturbed_seconds <= 0.0) {
      Outcome out;
      out.require(false, "no timings from criterion 7");
      return out;
    }
    return speed(batch);
  });
  ok &= report(9, "zero perturbation is a fixed point", zero_perturbation_fixed_point);
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
