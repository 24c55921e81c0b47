/*
 * Copyright 2026 The Subtune Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SUBTUNE_PARALLEL_H_
#define SUBTUNE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace subtune {

// Number of logical cores, at least 1.
int DefaultJobs();

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out
// in index order; results must be written to per-index slots by fn. The
// first exception thrown by any task is rethrown after all threads join.
void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)>& fn);

}  // namespace subtune

#endif  // SUBTUNE_PARALLEL_H_
