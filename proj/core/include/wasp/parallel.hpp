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

#include <cstddef>
#include <functional>

namespace wasp {

/// Number of worker threads: WASP_THREADS if set and positive, otherwise the
/// hardware concurrency (WASP_THREADS=0 also means "auto").
unsigned worker_threads();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; results
/// written to per-index slots are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace wasp
