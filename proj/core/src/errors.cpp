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

#include "wasp/errors.hpp"

namespace wasp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::InvalidArgument:
    return "InvalidArgument";
  case ErrorCode::DimensionMismatch:
    return "DimensionMismatch";
  case ErrorCode::NotPositiveDefinite:
    return "NotPositiveDefinite";
  case ErrorCode::RankDeficientConstraints:
    return "RankDeficientConstraints";
  case ErrorCode::NotAtZero:
    return "NotAtZero";
  case ErrorCode::HasConstraints:
    return "HasConstraints";
  case ErrorCode::Infeasible:
    return "Infeasible";
  case ErrorCode::IterationLimit:
    return "IterationLimit";
  case ErrorCode::InconsistentActiveSet:
    return "InconsistentActiveSet";
  case ErrorCode::RegularityViolated:
    return "RegularityViolated";
  case ErrorCode::OutOfGrid:
    return "OutOfGrid";
  case ErrorCode::TooFewNodes:
    return "TooFewNodes";
  case ErrorCode::NonpositiveState:
    return "NonpositiveState";
  case ErrorCode::TooManyFlaggedNodes:
    return "TooManyFlaggedNodes";
  case ErrorCode::ConfigError:
    return "ConfigError";
  case ErrorCode::IoError:
    return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

} // namespace wasp
