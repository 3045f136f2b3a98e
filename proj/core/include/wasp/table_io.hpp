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

#pragma once

#include <string>
#include <vector>

#include "wasp/grid.hpp"

namespace wasp {

/// One per-stage CSV table: a header and a numeric body (one row per node).
/// The first column is the node index.
struct StageTable {
  std::vector<std::string> header;
  Matrix data;

  /// Column index by name; throws IoError when missing.
  Index column(const std::string &name) const;
  Vector column_values(const std::string &name) const;
};

/// Column groups of a stage table; empty matrices are omitted from the file.
struct StageColumns {
  Vector value;
  Matrix policy;
  Matrix multiplier;
  Matrix delta_policy;
  Vector delta_value;
};

/// Builds the table `state_index, state_*, value, policy_*, multiplier_*,
/// delta_policy_*, delta_value`.
StageTable make_stage_table(const StateGrid &grid, const StageColumns &columns);

/// Writes with 17 significant digits so that reading back is bitwise exact.
void write_stage_csv(const std::string &path, const StageTable &table);
StageTable read_stage_csv(const std::string &path);

std::string format_double(double v);

} // namespace wasp
