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

#include <array>
#include <vector>

#include "wasp/linalg.hpp"

namespace wasp {

enum class Spacing { Linear, Log };

struct Axis {
  double min = 0.0;
  double max = 1.0;
  Index count = 2;
  Spacing spacing = Spacing::Linear;
};

/// Tensor-product grid over the state space with row-major flattening (the
/// last dimension varies fastest). Tables over the grid are stored as one
/// value per node, or as a (nodes x k) matrix for vector-valued tables.
class StateGrid {
public:
  static constexpr Index kMaxDimension = 6;

  explicit StateGrid(const std::vector<Axis> &axes);
  explicit StateGrid(std::vector<std::vector<double>> nodes);

  Index dimension() const noexcept { return static_cast<Index>(nodes_.size()); }
  Index size() const noexcept { return size_; }
  Index count(Index dim) const { return static_cast<Index>(nodes_[dim].size()); }
  const std::vector<double> &nodes(Index dim) const { return nodes_[dim]; }

  Vector point(Index flat) const;
  std::vector<Index> multi_index(Index flat) const;
  Index flat_index(const std::vector<Index> &multi) const;
  Index stride(Index dim) const { return strides_[dim]; }

  bool contains(const Vector &x) const;

  /// Multilinear interpolation; exact at nodes. Throws OutOfGrid outside the
  /// hull (beyond a round-off allowance).
  double interpolate(const Vector &values, const Vector &x) const;
  /// Row-wise multilinear interpolation of a (nodes x k) table.
  Vector interpolate_columns(const Matrix &table, const Vector &x) const;

  /// One-sided derivative of the interpolant at x along `direction`. Where x
  /// sits on a cell face the cell on the side the direction points into is
  /// used, so this is the directional derivative of a piecewise function.
  double directional_derivative(const Vector &values, const Vector &x,
                                const Vector &direction) const;

private:
  struct Cell {
    std::array<Index, kMaxDimension> lower{};
    std::array<double, kMaxDimension> t{};
    std::array<double, kMaxDimension> width{};
  };

  Cell locate(const Vector &x, const Vector *direction) const;
  void init();

  std::vector<std::vector<double>> nodes_;
  std::vector<Index> strides_;
  Index size_ = 0;
};

} // namespace wasp
