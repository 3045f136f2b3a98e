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

#include "wasp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wasp/errors.hpp"

namespace wasp {
namespace {

std::vector<double> axis_nodes(const Axis &axis) {
  if (axis.count < 2) {
    throw Error(ErrorCode::TooFewNodes, "each axis needs at least 2 nodes");
  }
  if (!(axis.max > axis.min) || !std::isfinite(axis.min) || !std::isfinite(axis.max)) {
    throw Error(ErrorCode::InvalidArgument, "axis bounds must satisfy min < max");
  }
  if (axis.spacing == Spacing::Log && axis.min <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "log-spaced axis needs min > 0");
  }
  std::vector<double> nodes(static_cast<std::size_t>(axis.count));
  const double last = static_cast<double>(axis.count - 1);
  for (Index i = 0; i < axis.count; ++i) {
    const double s = static_cast<double>(i) / last;
    nodes[i] = axis.spacing == Spacing::Linear
                   ? axis.min + s * (axis.max - axis.min)
                   : std::exp(std::log(axis.min) + s * (std::log(axis.max) - std::log(axis.min)));
  }
  nodes.front() = axis.min;
  nodes.back() = axis.max;
  return nodes;
}

} // namespace

StateGrid::StateGrid(const std::vector<Axis> &axes) {
  for (const auto &axis : axes) {
    nodes_.push_back(axis_nodes(axis));
  }
  init();
}

StateGrid::StateGrid(std::vector<std::vector<double>> nodes) : nodes_(std::move(nodes)) {
  for (const auto &axis : nodes_) {
    if (axis.size() < 2) {
      throw Error(ErrorCode::TooFewNodes, "each axis needs at least 2 nodes");
    }
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (!(axis[i] > axis[i - 1])) {
        throw Error(ErrorCode::InvalidArgument, "grid nodes must be strictly increasing");
      }
    }
  }
  init();
}

void StateGrid::init() {
  const Index n = dimension();
  if (n < 1 || n > kMaxDimension) {
    throw Error(ErrorCode::InvalidArgument, "grid dimension must be between 1 and 6");
  }
  strides_.assign(n, 1);
  for (Index d = n - 2; d >= 0; --d) {
    strides_[d] = strides_[d + 1] * count(d + 1);
  }
  size_ = strides_[0] * count(0);
}

Vector StateGrid::point(Index flat) const {
  Vector x(dimension());
  for (Index d = 0; d < dimension(); ++d) {
    x(d) = nodes_[d][(flat / strides_[d]) % count(d)];
  }
  return x;
}

std::vector<Index> StateGrid::multi_index(Index flat) const {
  std::vector<Index> idx(dimension());
  for (Index d = 0; d < dimension(); ++d) {
    idx[d] = (flat / strides_[d]) % count(d);
  }
  return idx;
}

Index StateGrid::flat_index(const std::vector<Index> &multi) const {
  Index flat = 0;
  for (Index d = 0; d < dimension(); ++d) {
    flat += multi[d] * strides_[d];
  }
  return flat;
}

bool StateGrid::contains(const Vector &x) const {
  if (x.size() != dimension()) {
    return false;
  }
  for (Index d = 0; d < dimension(); ++d) {
    const double lo = nodes_[d].front();
    const double hi = nodes_[d].back();
    const double slack = 1e-12 * (hi - lo);
    if (!(x(d) >= lo - slack && x(d) <= hi + slack)) {
      return false;
    }
  }
  return true;
}

StateGrid::Cell StateGrid::locate(const Vector &x, const Vector *direction) const {
  require_same_size(x.size(), dimension(), "grid query");
  if (!contains(x)) {
    std::ostringstream msg;
    msg << "query (" << x.transpose() << ") is outside the grid";
    throw Error(ErrorCode::OutOfGrid, msg.str());
  }
  Cell cell;
  for (Index d = 0; d < dimension(); ++d) {
    const auto &axis = nodes_[d];
    const double xd = std::clamp(x(d), axis.front(), axis.back());
    auto it = std::upper_bound(axis.begin(), axis.end(), xd);
    Index lo = static_cast<Index>(it - axis.begin()) - 1;
    lo = std::clamp<Index>(lo, 0, count(d) - 2);
    // A query sitting on an interior node belongs to the cell the direction
    // points into. Queries within a small fraction of a cell from a node
    // are treated as sitting on it, since the minimizer that produces them
    // only resolves the kink to finite precision.
    if (direction != nullptr && (*direction)(d) != 0.0) {
      const double snap = 1e-4 * (axis[lo + 1] - axis[lo]);
      if ((*direction)(d) < 0.0 && lo > 0 && xd - axis[lo] <= snap) {
        --lo;
      } else if ((*direction)(d) > 0.0 && lo + 2 < count(d) && axis[lo + 1] - xd <= snap) {
        ++lo;
      }
    }
    cell.lower[d] = lo;
    cell.width[d] = axis[lo + 1] - axis[lo];
    cell.t[d] = (xd - axis[lo]) / cell.width[d];
  }
  return cell;
}

double StateGrid::interpolate(const Vector &values, const Vector &x) const {
  require_same_size(values.size(), size_, "value table");
  const Cell cell = locate(x, nullptr);
  const Index n = dimension();
  if (n == 1) {
    const Index i = cell.lower[0];
    return values(i) + cell.t[0] * (values(i + 1) - values(i));
  }
  double acc = 0.0;
  for (Index corner = 0; corner < (Index{1} << n); ++corner) {
    double w = 1.0;
    Index flat = 0;
    for (Index d = 0; d < n; ++d) {
      const bool up = (corner >> d) & 1;
      w *= up ? cell.t[d] : 1.0 - cell.t[d];
      flat += (cell.lower[d] + (up ? 1 : 0)) * strides_[d];
    }
    if (w != 0.0) {
      acc += w * values(flat);
    }
  }
  return acc;
}

Vector StateGrid::interpolate_columns(const Matrix &table, const Vector &x) const {
  require_same_size(table.rows(), size_, "vector table");
  const Cell cell = locate(x, nullptr);
  const Index n = dimension();
  Vector acc = Vector::Zero(table.cols());
  for (Index corner = 0; corner < (Index{1} << n); ++corner) {
    double w = 1.0;
    Index flat = 0;
    for (Index d = 0; d < n; ++d) {
      const bool up = (corner >> d) & 1;
      w *= up ? cell.t[d] : 1.0 - cell.t[d];
      flat += (cell.lower[d] + (up ? 1 : 0)) * strides_[d];
    }
    if (w != 0.0) {
      acc += w * table.row(flat).transpose();
    }
  }
  return acc;
}

double StateGrid::directional_derivative(const Vector &values, const Vector &x,
                                         const Vector &direction) const {
  require_same_size(values.size(), size_, "value table");
  require_same_size(direction.size(), dimension(), "direction");
  const Cell cell = locate(x, &direction);
  const Index n = dimension();
  double acc = 0.0;
  for (Index corner = 0; corner < (Index{1} << n); ++corner) {
    Index flat = 0;
    for (Index d = 0; d < n; ++d) {
      flat += (cell.lower[d] + ((corner >> d) & 1)) * strides_[d];
    }
    // Gradient of the multilinear weight of this corner, dotted with the
    // direction.
    double dw = 0.0;
    for (Index k = 0; k < n; ++k) {
      double w = ((corner >> k) & 1) ? 1.0 / cell.width[k] : -1.0 / cell.width[k];
      for (Index d = 0; d < n; ++d) {
        if (d != k) {
          w *= ((corner >> d) & 1) ? cell.t[d] : 1.0 - cell.t[d];
        }
      }
      dw += w * direction(k);
    }
    acc += dw * values(flat);
  }
  return acc;
}

} // namespace wasp
