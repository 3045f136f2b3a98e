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

// Command-line front end: solve / wasp / compare / goldens.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "wasp/errors.hpp"
#include "wasp/experiment.hpp"
#include "wasp/goldens.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

void print_metrics(const wasp::RunRecord &rec) {
  std::printf("%5s %14s %14s %14s %14s\n", "stage", "value_wasp", "value_unpert", "policy_wasp",
              "policy_unpert");
  for (const auto &m : rec.metrics) {
    std::printf("%5d %14.6e %14.6e %14.6e %14.6e\n", m.stage, m.value_wasp_max,
                m.value_unperturbed_max, m.policy_wasp_max, m.policy_unperturbed_max);
  }
}

// True when the first-order value estimate is closer to the perturbed
// solution than the unperturbed one at every stage (ties only when both are 0).
bool estimate_beats_unperturbed(const wasp::RunRecord &rec) {
  for (const auto &m : rec.metrics) {
    const bool both_zero = m.value_wasp_max == 0.0 && m.value_unperturbed_max == 0.0;
    if (!both_zero && !(m.value_wasp_max < m.value_unperturbed_max)) {
      return false;
    }
  }
  return true;
}

void print_timings(const wasp::RunRecord &rec) {
  std::printf("base dp      %.4f s\n", rec.timings.base_dp);
  if (rec.wasp) {
    std::printf("wasp         %.4f s\n", rec.timings.wasp);
  }
  if (rec.perturbed) {
    std::printf("perturbed dp %.4f s\n", rec.timings.perturbed_dp);
  }
}

int run_goldens_command() {
  bool all = true;
  for (const auto &c : wasp::run_goldens()) {
    std::printf("%-4s %-42s expected % .10g actual % .10g tol %.1e\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.expected, c.actual, c.tolerance);
    all = all && c.passed;
  }
  return all ? kExitOk : kExitFailed;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Constrained dynamic programming with first-order warm starts"};
  app.require_subcommand(1);

  std::string config_path;
  auto *solve = app.add_subcommand("solve", "Solve the unperturbed program");
  auto *wasp_cmd = app.add_subcommand("wasp", "Solve and compute the first-order perturbation");
  auto *compare = app.add_subcommand(
      "compare", "Solve, perturb, and compare against a direct solve of the perturbed program");
  auto *goldens = app.add_subcommand("goldens", "Check fixed reference values");
  for (auto *sub : {solve, wasp_cmd, compare}) {
    sub->add_option("--config", config_path, "Experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (goldens->parsed()) {
    return run_goldens_command();
  }

  wasp::ExperimentConfig config;
  try {
    config = wasp::load_config(config_path);
  } catch (const wasp::Error &err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  }

  const char *phase = "solve";
  int status = kExitOk;
  try {
    wasp::RunRecord rec;
    if (solve->parsed()) {
      rec = wasp::run_solve(config);
    } else if (wasp_cmd->parsed()) {
      phase = "wasp";
      rec = wasp::run_wasp(config);
    } else {
      phase = "compare";
      rec = wasp::run_compare(config);
      print_metrics(rec);
      const bool beats = estimate_beats_unperturbed(rec);
      std::printf("estimate beats unperturbed at every stage: %s\n", beats ? "yes" : "no");
      status = beats ? kExitOk : kExitFailed;
    }
    print_timings(rec);
    if (!config.output_directory.empty()) {
      std::printf("results written to %s\n", config.output_directory.c_str());
    }
  } catch (const wasp::Error &err) {
    std::cerr << phase << " failed: " << err.what() << '\n';
    return err.code() == wasp::ErrorCode::ConfigError ? kExitConfig : kExitFailed;
  }
  return status;
}
