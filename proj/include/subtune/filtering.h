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

#ifndef SUBTUNE_FILTERING_H_
#define SUBTUNE_FILTERING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subtune/acquisition.h"
#include "subtune/linalg.h"

namespace subtune {

enum class FilterKind { kCea, kRandom, kNone };

struct FilterPolicy {
  FilterKind kind = FilterKind::kCea;
  double beta = 0.1;  // in (0, 1]; ignored by kNone
};

std::string FilterKindName(FilterKind kind);
FilterKind ParseFilterKind(const std::string& name);
// Throws SpecError when beta is outside (0, 1].
void ValidateFilterPolicy(const FilterPolicy& policy);

// Predicted accuracy times the feasibility product, both at z itself.
double Cea(const AcquisitionContext& ctx, std::span<const double> z);

// max(1, ceil(beta * n)) for n > 0.
std::size_t FilterSize(double beta, std::size_t n);

// Chooses the candidate set D from untested point ids (enumeration
// indices); `features` holds the encoded row of every point id.
//   kNone:   every untested id, ascending
//   kCea:    the FilterSize() best by CEA, descending score, ties by id
//   kRandom: a seeded sample of FilterSize() ids, ascending
// The result depends only on the set of ids, not on their order.
std::vector<std::size_t> SelectCandidates(const FilterPolicy& policy,
                                          std::span<const std::size_t> untested,
                                          const Matrix& features,
                                          const AcquisitionContext& ctx,
                                          std::uint64_t seed, int jobs = 1);

}  // namespace subtune

#endif  // SUBTUNE_FILTERING_H_
