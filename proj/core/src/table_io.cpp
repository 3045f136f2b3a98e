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

#include "wasp/table_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wasp/errors.hpp"

namespace wasp {
namespace {

void append_group(std::vector<std::string> &header, std::vector<const Matrix *> &blocks,
                  const std::string &prefix, const Matrix &block) {
  for (Index k = 0; k < block.cols(); ++k) {
    header.push_back(prefix + "_" + std::to_string(k));
  }
  blocks.push_back(&block);
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Index StageTable::column(const std::string &name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) {
      return static_cast<Index>(k);
    }
  }
  throw Error(ErrorCode::IoError, "missing column '" + name + "'");
}

Vector StageTable::column_values(const std::string &name) const {
  return data.col(column(name));
}

StageTable make_stage_table(const StateGrid &grid, const StageColumns &columns) {
  const Index nodes = grid.size();
  std::vector<std::string> header{"state_index"};
  Matrix states(nodes, grid.dimension());
  for (Index i = 0; i < nodes; ++i) {
    states.row(i) = grid.point(i).transpose();
  }
  std::vector<const Matrix *> blocks;
  append_group(header, blocks, "state", states);

  const Matrix value = columns.value;
  const Matrix delta_value = columns.delta_value;
  if (value.size() > 0) {
    header.push_back("value");
    blocks.push_back(&value);
  }
  if (columns.policy.size() > 0) {
    append_group(header, blocks, "policy", columns.policy);
  }
  if (columns.multiplier.size() > 0) {
    append_group(header, blocks, "multiplier", columns.multiplier);
  }
  if (columns.delta_policy.size() > 0) {
    append_group(header, blocks, "delta_policy", columns.delta_policy);
  }
  if (delta_value.size() > 0) {
    header.push_back("delta_value");
    blocks.push_back(&delta_value);
  }

  StageTable table;
  table.header = header;
  table.data.resize(nodes, static_cast<Index>(header.size()));
  Index col = 0;
  table.data.col(col++) = Vector::LinSpaced(nodes, 0.0, static_cast<double>(nodes - 1));
  for (const Matrix *block : blocks) {
    require_same_size(block->rows(), nodes, "stage table column");
    table.data.middleCols(col, block->cols()) = *block;
    col += block->cols();
  }
  return table;
}

void write_stage_csv(const std::string &path, const StageTable &table) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  }
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    out << (k ? "," : "") << table.header[k];
  }
  out << '\n';
  for (Index i = 0; i < table.data.rows(); ++i) {
    // The index column is integral.
    out << static_cast<long long>(table.data(i, 0));
    for (Index j = 1; j < table.data.cols(); ++j) {
      out << ',' << format_double(table.data(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
  }
}

StageTable read_stage_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  StageTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::IoError, "'" + path + "' is empty");
  }
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      table.header.push_back(cell);
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char *end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || errno == ERANGE) {
        throw Error(ErrorCode::IoError, "bad number '" + cell + "' in '" + path + "'");
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::IoError, "ragged row in '" + path + "'");
    }
    rows.push_back(std::move(row));
  }
  table.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return table;
}

} // namespace wasp
