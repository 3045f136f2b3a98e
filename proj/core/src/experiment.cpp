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

#include "wasp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "wasp/errors.hpp"
#include "wasp/rng.hpp"
#include "wasp/table_io.hpp"

namespace wasp {
namespace {

using json = nlohmann::json;

constexpr double kSpeedTargetRatio = 0.5;

std::string mode_name(WaspMode mode) {
  switch (mode) {
  case WaspMode::Equality:
    return "equality";
  case WaspMode::Inequality:
    return "inequality";
  case WaspMode::TrajectoryFrozen:
    return "trajectory_frozen";
  }
  return "inequality";
}

WaspMode parse_mode(const std::string &name) {
  if (name == "equality") {
    return WaspMode::Equality;
  }
  if (name == "inequality") {
    return WaspMode::Inequality;
  }
  if (name == "trajectory_frozen") {
    return WaspMode::TrajectoryFrozen;
  }
  throw Error(ErrorCode::ConfigError, "unknown wasp mode '" + name + "'");
}

std::string kind_name(PerturbationKind kind) {
  switch (kind) {
  case PerturbationKind::Explicit:
    return "explicit";
  case PerturbationKind::Random:
    return "random";
  case PerturbationKind::Zero:
    return "zero";
  }
  return "explicit";
}

PerturbationKind parse_kind(const std::string &name) {
  if (name == "explicit") {
    return PerturbationKind::Explicit;
  }
  if (name == "random") {
    return PerturbationKind::Random;
  }
  if (name == "zero") {
    return PerturbationKind::Zero;
  }
  throw Error(ErrorCode::ConfigError, "unknown perturbation kind '" + name + "'");
}

template <typename T> void read_optional(const json &j, const char *key, T &target) {
  if (j.contains(key)) {
    target = j.at(key).get<T>();
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Stats {
  double max = 0.0;
  double mean = 0.0;
};

Stats abs_stats(const Vector &diff) {
  if (diff.size() == 0) {
    return {};
  }
  const Vector a = diff.cwiseAbs();
  return {a.maxCoeff(), a.mean()};
}

Vector row_max_abs(const Matrix &m) {
  return m.cwiseAbs().rowwise().maxCoeff();
}

std::size_t count_flagged(const std::vector<std::vector<std::uint32_t>> &flags) {
  std::size_t n = 0;
  for (const auto &stage : flags) {
    for (auto f : stage) {
      n += node_failed(f) ? 1 : 0;
    }
  }
  return n;
}

} // namespace

ExperimentConfig parse_config(const json &j) {
  ExperimentConfig c;
  try {
    const json &problem = j.at("problem");
    const std::string type = problem.at("type").get<std::string>();
    if (type == "velocity") {
      c.problem = ProblemKind::Velocity;
      auto &v = c.velocity;
      read_optional(problem, "v0", v.v0);
      read_optional(problem, "v_ref", v.v_ref);
      read_optional(problem, "w_p", v.w_p);
      read_optional(problem, "w_e", v.w_e);
      read_optional(problem, "a_min", v.a_min);
      read_optional(problem, "a_max", v.a_max);
      read_optional(problem, "dt", v.dt);
      read_optional(problem, "horizon", v.horizon);
      v = v.unperturbed();
      if (problem.contains("perturbed")) {
        const json &p = problem.at("perturbed");
        read_optional(p, "v_ref", v.v_ref_tilde);
        read_optional(p, "w_p", v.w_p_tilde);
        read_optional(p, "w_e", v.w_e_tilde);
        read_optional(p, "a_min", v.a_min_tilde);
        read_optional(p, "a_max", v.a_max_tilde);
      }
    } else if (type == "resource") {
      c.problem = ProblemKind::Resource;
      c.resource.coefficients = problem.at("coefficients").get<std::vector<double>>();
      read_optional(problem, "perturbation", c.resource.perturbation);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown problem type '" + type + "'");
    }

    for (const json &axis : j.at("grid").at("axes")) {
      Axis a;
      a.min = axis.at("min").get<double>();
      a.max = axis.at("max").get<double>();
      a.count = axis.at("count").get<Index>();
      const std::string spacing = axis.value("spacing", std::string("linear"));
      if (spacing == "linear") {
        a.spacing = Spacing::Linear;
      } else if (spacing == "log") {
        a.spacing = Spacing::Log;
      } else {
        throw Error(ErrorCode::ConfigError, "unknown spacing '" + spacing + "'");
      }
      c.grid.push_back(a);
    }

    if (j.contains("solver")) {
      const json &s = j.at("solver");
      read_optional(s, "initial_multiplier", c.solver.initial_multiplier);
      read_optional(s, "initial_penalty", c.solver.initial_penalty);
      read_optional(s, "penalty_growth", c.solver.penalty_growth);
      read_optional(s, "multiplier_tolerance", c.solver.multiplier_tolerance);
      read_optional(s, "inner_tolerance", c.solver.inner_tolerance);
      read_optional(s, "max_outer_iterations", c.solver.max_outer_iterations);
    }
    if (j.contains("wasp")) {
      c.mode = parse_mode(j.at("wasp").value("mode", std::string("inequality")));
    }
    if (j.contains("perturbation")) {
      const json &p = j.at("perturbation");
      c.perturbation.kind = parse_kind(p.value("kind", std::string("explicit")));
      if (p.contains("seed")) {
        c.perturbation.seed = p.at("seed").get<std::uint64_t>();
      }
      read_optional(p, "sigma", c.perturbation.sigma);
      read_optional(p, "relative_spread", c.perturbation.relative_spread);
      read_optional(p, "epsilon", c.perturbation.epsilon);
    }
    if (j.contains("output")) {
      read_optional(j.at("output"), "directory", c.output_directory);
    }
  } catch (const json::exception &err) {
    throw Error(ErrorCode::ConfigError, err.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception &err) {
    throw Error(ErrorCode::ConfigError, err.what());
  }
  return parse_config(j);
}

void ExperimentConfig::validate() const {
  if (grid.size() != 1) {
    throw Error(ErrorCode::ConfigError, "built-in problems have a one-dimensional state grid");
  }
  if (perturbation.kind == PerturbationKind::Random && !perturbation.seed) {
    throw Error(ErrorCode::ConfigError, "random perturbations need a seed");
  }
  if (!(perturbation.epsilon >= 0.0) || !(perturbation.sigma >= 0.0) ||
      !(perturbation.relative_spread >= 0.0) || perturbation.relative_spread >= 1.0) {
    throw Error(ErrorCode::ConfigError, "perturbation parameters out of range");
  }
  if (problem == ProblemKind::Resource && grid[0].min <= 0.0) {
    throw Error(ErrorCode::ConfigError, "resource grid must lie in x > 0");
  }
  try {
    StateGrid check(grid);
    (void)check;
    solver.validate();
    const ExperimentConfig resolved = resolve_perturbation(*this);
    if (problem == ProblemKind::Velocity) {
      resolved.velocity.validate();
    } else {
      resolved.resource.validate();
    }
  } catch (const Error &err) {
    if (err.code() == ErrorCode::ConfigError) {
      throw;
    }
    throw Error(ErrorCode::ConfigError, err.what());
  }
}

json config_to_json(const ExperimentConfig &c) {
  json j;
  if (c.problem == ProblemKind::Velocity) {
    const auto &v = c.velocity;
    j["problem"] = {{"type", "velocity"}, {"v0", v.v0},       {"v_ref", v.v_ref},
                    {"w_p", v.w_p},       {"w_e", v.w_e},     {"a_min", v.a_min},
                    {"a_max", v.a_max},   {"dt", v.dt},       {"horizon", v.horizon}};
    j["problem"]["perturbed"] = {{"v_ref", v.v_ref_tilde},
                                 {"w_p", v.w_p_tilde},
                                 {"w_e", v.w_e_tilde},
                                 {"a_min", v.a_min_tilde},
                                 {"a_max", v.a_max_tilde}};
  } else {
    j["problem"] = {{"type", "resource"},
                    {"coefficients", c.resource.coefficients},
                    {"perturbation", c.resource.perturbation}};
  }
  json axes = json::array();
  for (const auto &a : c.grid) {
    axes.push_back({{"min", a.min},
                    {"max", a.max},
                    {"count", a.count},
                    {"spacing", a.spacing == Spacing::Log ? "log" : "linear"}});
  }
  j["grid"] = {{"axes", axes}};
  j["solver"] = {{"initial_multiplier", c.solver.initial_multiplier},
                 {"initial_penalty", c.solver.initial_penalty},
                 {"penalty_growth", c.solver.penalty_growth},
                 {"multiplier_tolerance", c.solver.multiplier_tolerance},
                 {"inner_tolerance", c.solver.inner_tolerance},
                 {"max_outer_iterations", c.solver.max_outer_iterations}};
  j["wasp"] = {{"mode", mode_name(c.mode)}};
  j["perturbation"] = {{"kind", kind_name(c.perturbation.kind)},
                       {"sigma", c.perturbation.sigma},
                       {"relative_spread", c.perturbation.relative_spread},
                       {"epsilon", c.perturbation.epsilon}};
  if (c.perturbation.seed) {
    j["perturbation"]["seed"] = *c.perturbation.seed;
  }
  j["output"] = {{"directory", c.output_directory}};
  return j;
}

VelocityTrackingProblem draw_velocity_perturbation(const VelocityTrackingProblem &nominal,
                                                   std::uint64_t seed, double sigma,
                                                   double spread) {
  VelocityTrackingProblem p = nominal.unperturbed();
  // The redraw loop below only terminates for a valid nominal bound pair.
  p.validate();
  PortableRng rng(seed);
  p.v_ref_tilde = nominal.v_ref * (1.0 + rng.uniform(-spread, spread));
  p.w_p_tilde = nominal.w_p * (1.0 + rng.uniform(-spread, spread));
  p.w_e_tilde = nominal.w_e * (1.0 + rng.uniform(-spread, spread));
  // Redraw the bound pair in the rare case that it crosses.
  do {
    p.a_min_tilde = nominal.a_min + sigma * rng.gaussian();
    p.a_max_tilde = nominal.a_max + sigma * rng.gaussian();
  } while (!(p.a_min_tilde < p.a_max_tilde));
  return p;
}

ExperimentConfig resolve_perturbation(const ExperimentConfig &config) {
  ExperimentConfig c = config;
  const auto &pc = config.perturbation;
  switch (pc.kind) {
  case PerturbationKind::Explicit:
    break;
  case PerturbationKind::Zero:
    c.velocity = c.velocity.unperturbed();
    c.resource.perturbation.assign(c.resource.coefficients.size(), 0.0);
    break;
  case PerturbationKind::Random:
    if (c.problem == ProblemKind::Velocity) {
      c.velocity = draw_velocity_perturbation(c.velocity, *pc.seed, pc.sigma, pc.relative_spread);
    } else {
      PortableRng rng(*pc.seed);
      c.resource.perturbation.clear();
      for (double coef : c.resource.coefficients) {
        c.resource.perturbation.push_back(coef * rng.uniform(-pc.relative_spread,
                                                             pc.relative_spread));
      }
    }
    break;
  }
  c.perturbation.kind = PerturbationKind::Explicit;
  c.velocity.epsilon = pc.epsilon;
  c.resource.epsilon = pc.epsilon;
  if (c.resource.perturbation.empty()) {
    c.resource.perturbation.assign(c.resource.coefficients.size(), 0.0);
  }
  return c;
}

ProblemInstance make_problem(const ExperimentConfig &resolved) {
  ProblemInstance inst;
  if (resolved.problem == ProblemKind::Velocity) {
    inst.spec = std::make_unique<VelocityTrackingSpec>(resolved.velocity);
    inst.perturbation = std::make_unique<VelocityTrackingPerturbation>(resolved.velocity);
  } else {
    inst.spec = std::make_unique<ResourceAllocationSpec>(resolved.resource);
    inst.perturbation = std::make_unique<ResourceAllocationPerturbation>(resolved.resource);
  }
  return inst;
}

std::vector<StageMetrics> compute_metrics(const DpSolution &base, const WaspResult &wasp,
                                          const DpSolution &perturbed) {
  std::vector<StageMetrics> out;
  for (int t = 0; t <= base.horizon(); ++t) {
    StageMetrics m;
    m.stage = t;
    const Stats vw = abs_stats(wasp.value[t] - perturbed.value[t]);
    const Stats vu = abs_stats(base.value[t] - perturbed.value[t]);
    const Stats pw = abs_stats(row_max_abs(wasp.policy[t] - perturbed.policy[t]));
    const Stats pu = abs_stats(row_max_abs(base.policy[t] - perturbed.policy[t]));
    m.value_wasp_max = vw.max;
    m.value_wasp_mean = vw.mean;
    m.value_unperturbed_max = vu.max;
    m.value_unperturbed_mean = vu.mean;
    m.policy_wasp_max = pw.max;
    m.policy_wasp_mean = pw.mean;
    m.policy_unperturbed_max = pu.max;
    m.policy_unperturbed_mean = pu.mean;
    out.push_back(m);
  }
  return out;
}

namespace {

struct Session {
  ExperimentConfig resolved;
  ProblemInstance instance;
  StateGrid grid;

  explicit Session(const ExperimentConfig &config)
      : resolved(resolve_perturbation(config)), instance(make_problem(resolved)),
        grid(resolved.grid) {}

  WaspOptions wasp_options() const {
    WaspOptions opts;
    opts.mode = resolved.mode;
    if (resolved.problem == ProblemKind::Velocity) {
      opts.trajectory_start = Vector::Constant(1, resolved.velocity.v0);
    } else {
      opts.trajectory_start =
          Vector::Constant(1, std::sqrt(grid.nodes(0).front() * grid.nodes(0).back()));
    }
    return opts;
  }
};

RunRecord run_phases(const ExperimentConfig &config, bool with_wasp, bool with_perturbed) {
  config.validate();
  Session session(config);
  RunRecord rec;
  rec.config = session.resolved;
  rec.grid = session.grid;

  auto start = std::chrono::steady_clock::now();
  rec.base = backward_induction(*session.instance.spec, session.grid, session.resolved.solver);
  rec.timings.base_dp = seconds_since(start);

  if (with_wasp) {
    start = std::chrono::steady_clock::now();
    rec.wasp = wasp_backward_pass(*session.instance.spec, *session.instance.perturbation,
                                  *rec.base, session.grid, session.wasp_options());
    rec.timings.wasp = seconds_since(start);
  }
  if (with_perturbed) {
    const PerturbedProgram perturbed(*session.instance.spec, *session.instance.perturbation);
    start = std::chrono::steady_clock::now();
    rec.perturbed = backward_induction(perturbed, session.grid, session.resolved.solver);
    rec.timings.perturbed_dp = seconds_since(start);
  }
  if (rec.wasp && rec.perturbed) {
    rec.metrics = compute_metrics(*rec.base, *rec.wasp, *rec.perturbed);
  }
  if (!config.output_directory.empty()) {
    emit_tables(rec, config.output_directory);
  }
  return rec;
}

} // namespace

RunRecord run_solve(const ExperimentConfig &config) { return run_phases(config, false, false); }

RunRecord run_wasp(const ExperimentConfig &config) { return run_phases(config, true, false); }

RunRecord run_compare(const ExperimentConfig &config) { return run_phases(config, true, true); }

json summary_json(const RunRecord &record) {
  json j;
  j["config"] = config_to_json(record.config);
  j["epsilon"] = record.config.perturbation.epsilon;
  json metrics = json::array();
  for (const auto &m : record.metrics) {
    metrics.push_back({{"stage", m.stage},
                       {"value_error_wasp_max", m.value_wasp_max},
                       {"value_error_wasp_mean", m.value_wasp_mean},
                       {"value_error_unperturbed_max", m.value_unperturbed_max},
                       {"value_error_unperturbed_mean", m.value_unperturbed_mean},
                       {"policy_error_wasp_max", m.policy_wasp_max},
                       {"policy_error_wasp_mean", m.policy_wasp_mean},
                       {"policy_error_unperturbed_max", m.policy_unperturbed_max},
                       {"policy_error_unperturbed_mean", m.policy_unperturbed_mean}});
  }
  j["metrics"] = metrics;
  json timings = {{"base_dp_seconds", record.timings.base_dp}};
  if (record.wasp) {
    timings["wasp_seconds"] = record.timings.wasp;
  }
  if (record.perturbed) {
    timings["perturbed_dp_seconds"] = record.timings.perturbed_dp;
  }
  if (record.wasp && record.perturbed && record.timings.perturbed_dp > 0.0) {
    const double ratio = record.timings.wasp / record.timings.perturbed_dp;
    timings["wasp_to_perturbed_dp_ratio"] = ratio;
    timings["target_ratio"] = kSpeedTargetRatio;
    timings["meets_target_ratio"] = ratio <= kSpeedTargetRatio;
  }
  j["timings"] = timings;
  json flagged;
  if (record.base) {
    flagged["base_dp"] = count_flagged(record.base->flags);
  }
  if (record.wasp) {
    flagged["wasp"] = count_flagged(record.wasp->flags);
  }
  if (record.perturbed) {
    flagged["perturbed_dp"] = count_flagged(record.perturbed->flags);
  }
  j["flagged_nodes"] = flagged;
  return j;
}

void emit_tables(const RunRecord &record, const std::string &directory) {
  namespace fs = std::filesystem;
  if (!record.grid || !record.base) {
    throw Error(ErrorCode::InvalidArgument, "record has no solution to emit");
  }
  const StateGrid &grid = *record.grid;
  auto stage_path = [&](const char *sub, int t) {
    return (fs::path(directory) / sub / ("stage_" + std::to_string(t) + ".csv")).string();
  };
  try {
    fs::create_directories(fs::path(directory) / "base");
    if (record.perturbed) {
      fs::create_directories(fs::path(directory) / "perturbed");
    }
  } catch (const fs::filesystem_error &err) {
    throw Error(ErrorCode::IoError, err.what());
  }

  const DpSolution &base = *record.base;
  const int horizon = base.horizon();
  for (int t = 0; t <= horizon + 1; ++t) {
    StageColumns cols;
    cols.value = base.value[t];
    if (t <= horizon) {
      cols.policy = base.policy[t];
      cols.multiplier = base.multiplier[t];
      if (record.wasp) {
        cols.delta_policy = record.wasp->delta_policy[t];
      }
    }
    if (record.wasp) {
      cols.delta_value = record.wasp->delta_value[t];
    }
    write_stage_csv(stage_path("base", t), make_stage_table(grid, cols));
  }
  if (record.perturbed) {
    const DpSolution &pert = *record.perturbed;
    for (int t = 0; t <= horizon + 1; ++t) {
      StageColumns cols;
      cols.value = pert.value[t];
      if (t <= horizon) {
        cols.policy = pert.policy[t];
        cols.multiplier = pert.multiplier[t];
      }
      write_stage_csv(stage_path("perturbed", t), make_stage_table(grid, cols));
    }
  }
  std::ofstream out(fs::path(directory) / "summary.json");
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write summary.json");
  }
  out << summary_json(record).dump(2) << '\n';
}

} // namespace wasp
