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

#include "wasp/problems.hpp"

#include <algorithm>
#include <cmath>

#include "wasp/errors.hpp"

namespace wasp {
namespace {

Matrix one(double v) { return Matrix::Constant(1, 1, v); }
Vector vec(double v) { return Vector::Constant(1, v); }

void require_stage(int t, int horizon) {
  if (t < 0 || t > horizon) {
    throw Error(ErrorCode::InvalidArgument, "stage index out of range");
  }
}

} // namespace

double ResourceAllocationProblem::tail_sum(int t) const {
  double s = 0.0;
  for (std::size_t k = static_cast<std::size_t>(t); k < coefficients.size(); ++k) {
    s += coefficients[k];
  }
  return s;
}

double ResourceAllocationProblem::tail_sum_perturbation(int t) const {
  double s = 0.0;
  for (std::size_t k = static_cast<std::size_t>(t); k < perturbation.size(); ++k) {
    s += perturbation[k];
  }
  return s;
}

void ResourceAllocationProblem::validate() const {
  if (coefficients.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need coefficients C_0 .. C_{T+1} with T >= 0");
  }
  if (!perturbation.empty() && perturbation.size() != coefficients.size()) {
    throw Error(ErrorCode::DimensionMismatch, "perturbation must match the coefficients");
  }
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    const double c = coefficients[k];
    const double ct = perturbation.empty() ? 0.0 : perturbation[k];
    if (!(c > 0.0) || !(c + epsilon * ct > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "coefficients must stay positive under the perturbation");
    }
  }
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  }
}

double resource_value_constant(const std::vector<double> &coefficients, int t) {
  const int last = static_cast<int>(coefficients.size()) - 1;
  double xi = 0.0;
  double tail = coefficients[last];
  for (int s = last - 1; s >= t; --s) {
    const double c = coefficients[s];
    const double total = c + tail;
    xi += -c * std::log(c / total) - tail * std::log(tail / total);
    tail = total;
  }
  return xi;
}

ResourceOracle resource_oracle(const ResourceAllocationProblem &problem, int t, double x) {
  require_stage(t, problem.horizon());
  if (!(x > 0.0)) {
    throw Error(ErrorCode::NonpositiveState, "resource level must be positive");
  }
  const double c = problem.coefficients[t];
  const double ct = problem.perturbation.empty() ? 0.0 : problem.perturbation[t];
  const double s = problem.tail_sum(t);
  const double s_next = problem.tail_sum(t + 1);
  const double st_next = problem.tail_sum_perturbation(t + 1);
  ResourceOracle out;
  out.policy = c * x / s;
  out.value = resource_value_constant(problem.coefficients, t) - s * std::log(x);
  out.delta_policy = (ct * s_next - c * st_next) * x / (s * s);
  return out;
}

ResourceAllocationSpec::ResourceAllocationSpec(ResourceAllocationProblem problem)
    : problem_(std::move(problem)) {
  problem_.validate();
}

Vector ResourceAllocationSpec::dynamics(int, const Vector &x, const Vector &u) const {
  return x - u;
}

Matrix ResourceAllocationSpec::dynamics_jacobian(int, const Vector &, const Vector &) const {
  return one(-1.0);
}

std::vector<Matrix> ResourceAllocationSpec::dynamics_hessians(int, const Vector &,
                                                              const Vector &) const {
  return {one(0.0)};
}

double ResourceAllocationSpec::cost(int t, const Vector &, const Vector &u) const {
  return -problem_.coefficients[t] * std::log(u(0));
}

Vector ResourceAllocationSpec::cost_gradient(int t, const Vector &, const Vector &u) const {
  return vec(-problem_.coefficients[t] / u(0));
}

Matrix ResourceAllocationSpec::cost_hessian(int t, const Vector &, const Vector &u) const {
  return one(problem_.coefficients[t] / (u(0) * u(0)));
}

Vector ResourceAllocationSpec::constraints(int, const Vector &x, const Vector &u) const {
  const double margin = 1e-6 * x(0);
  Vector h(2);
  h << u(0) - x(0) + margin, -u(0) + margin;
  return h;
}

Matrix ResourceAllocationSpec::constraint_jacobian(int, const Vector &, const Vector &) const {
  Matrix g(2, 1);
  g << 1.0, -1.0;
  return g;
}

double ResourceAllocationSpec::terminal_cost(const Vector &x) const {
  return -problem_.coefficients.back() * std::log(x(0));
}

ActionBox ResourceAllocationSpec::action_box(int, const Vector &x) const {
  return {vec(1e-9 * x(0)), vec(x(0))};
}

ResourceAllocationPerturbation::ResourceAllocationPerturbation(ResourceAllocationProblem problem)
    : problem_(std::move(problem)) {
  problem_.validate();
  if (problem_.perturbation.empty()) {
    problem_.perturbation.assign(problem_.coefficients.size(), 0.0);
  }
}

double ResourceAllocationPerturbation::cost(int t, const Vector &, const Vector &u) const {
  return -problem_.perturbation[t] * std::log(u(0));
}

Vector ResourceAllocationPerturbation::cost_gradient(int t, const Vector &,
                                                     const Vector &u) const {
  return vec(-problem_.perturbation[t] / u(0));
}

Matrix ResourceAllocationPerturbation::cost_hessian(int t, const Vector &,
                                                    const Vector &u) const {
  return one(problem_.perturbation[t] / (u(0) * u(0)));
}

Vector ResourceAllocationPerturbation::constraint_offset(int) const { return Vector::Zero(2); }

double ResourceAllocationPerturbation::terminal_cost(const Vector &x) const {
  return -problem_.perturbation.back() * std::log(x(0));
}

void VelocityTrackingProblem::validate() const {
  if (horizon < 0) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  }
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  }
  if (!(a_min < a_max) || !(a_min_tilde < a_max_tilde)) {
    throw Error(ErrorCode::InvalidArgument, "acceleration bounds must satisfy min < max");
  }
  if (!(w_p > 0.0) || !(w_e > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "weights must be positive");
  }
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  }
  const double wp_eps = w_p + epsilon * (w_p_tilde - w_p);
  const double we_eps = w_e + epsilon * (w_e_tilde - w_e);
  if (!(wp_eps > 0.0) || !(we_eps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "perturbed weights must stay positive");
  }
}

VelocityTrackingProblem VelocityTrackingProblem::unperturbed() const {
  VelocityTrackingProblem p = *this;
  p.v_ref_tilde = v_ref;
  p.w_p_tilde = w_p;
  p.w_e_tilde = w_e;
  p.a_min_tilde = a_min;
  p.a_max_tilde = a_max;
  return p;
}

VelocityTrackingSpec::VelocityTrackingSpec(VelocityTrackingProblem problem)
    : problem_(problem) {
  problem_.validate();
}

Vector VelocityTrackingSpec::dynamics(int, const Vector &x, const Vector &u) const {
  return x + problem_.dt * u;
}

Matrix VelocityTrackingSpec::dynamics_jacobian(int, const Vector &, const Vector &) const {
  return one(problem_.dt);
}

std::vector<Matrix> VelocityTrackingSpec::dynamics_hessians(int, const Vector &,
                                                            const Vector &) const {
  return {one(0.0)};
}

double VelocityTrackingSpec::cost(int, const Vector &x, const Vector &u) const {
  const double err = x(0) - problem_.v_ref;
  return problem_.w_p * err * err + problem_.w_e * u(0) * u(0);
}

Vector VelocityTrackingSpec::cost_gradient(int, const Vector &, const Vector &u) const {
  return vec(2.0 * problem_.w_e * u(0));
}

Matrix VelocityTrackingSpec::cost_hessian(int, const Vector &, const Vector &) const {
  return one(2.0 * problem_.w_e);
}

Vector VelocityTrackingSpec::constraints(int, const Vector &, const Vector &u) const {
  Vector h(2);
  h << u(0) - problem_.a_max, problem_.a_min - u(0);
  return h;
}

Matrix VelocityTrackingSpec::constraint_jacobian(int, const Vector &, const Vector &) const {
  Matrix g(2, 1);
  g << 1.0, -1.0;
  return g;
}

double VelocityTrackingSpec::terminal_cost(const Vector &x) const {
  const double err = x(0) - problem_.v_ref;
  return problem_.w_p * err * err;
}

ActionBox VelocityTrackingSpec::action_box(int, const Vector &) const {
  const double lo = std::min(problem_.a_min, problem_.a_min_tilde);
  const double hi = std::max(problem_.a_max, problem_.a_max_tilde);
  const double span = hi - lo;
  return {vec(lo - span), vec(hi + span)};
}

VelocityTrackingPerturbation::VelocityTrackingPerturbation(VelocityTrackingProblem problem)
    : problem_(problem) {
  problem_.validate();
}

double VelocityTrackingPerturbation::cost(int, const Vector &x, const Vector &u) const {
  const auto &p = problem_;
  const double err = x(0) - p.v_ref;
  const double err_t = x(0) - p.v_ref_tilde;
  const double a2 = u(0) * u(0);
  return (p.w_p_tilde * err_t * err_t + p.w_e_tilde * a2) - (p.w_p * err * err + p.w_e * a2);
}

Vector VelocityTrackingPerturbation::cost_gradient(int, const Vector &, const Vector &u) const {
  return vec(2.0 * (problem_.w_e_tilde - problem_.w_e) * u(0));
}

Matrix VelocityTrackingPerturbation::cost_hessian(int, const Vector &, const Vector &) const {
  return one(2.0 * (problem_.w_e_tilde - problem_.w_e));
}

Vector VelocityTrackingPerturbation::constraint_offset(int) const {
  Vector h(2);
  h << problem_.a_max - problem_.a_max_tilde, problem_.a_min_tilde - problem_.a_min;
  return h;
}

double VelocityTrackingPerturbation::terminal_cost(const Vector &x) const {
  const auto &p = problem_;
  const double err = x(0) - p.v_ref;
  const double err_t = x(0) - p.v_ref_tilde;
  return p.w_p_tilde * err_t * err_t - p.w_p * err * err;
}

RiccatiGains riccati_oracle(const VelocityTrackingProblem &problem) {
  if (!(problem.dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  }
  const int horizon = problem.horizon;
  const double dt2 = problem.dt * problem.dt;
  RiccatiGains g;
  g.p.assign(horizon + 2, 0.0);
  g.k.assign(horizon + 1, 0.0);
  g.p[horizon + 1] = problem.w_p;
  for (int t = horizon; t >= 0; --t) {
    const double next = g.p[t + 1];
    const double denom = problem.w_e + next * dt2;
    g.p[t] = problem.w_p + next * problem.w_e / denom;
    g.k[t] = next * problem.dt / denom;
  }
  return g;
}

} // namespace wasp
