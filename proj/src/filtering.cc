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

#include "subtune/filtering.h"

#include <algorithm>
#include <cmath>

#include "subtune/errors.h"
#include "subtune/parallel.h"
#include "subtune/random.h"

namespace subtune {

std::string FilterKindName(FilterKind kind) {
  switch (kind) {
    case FilterKind::kCea:
      return "cea";
    case FilterKind::kRandom:
      return "random";
    case FilterKind::kNone:
      return "none";
  }
  return "unknown";
}

FilterKind ParseFilterKind(const std::string& name) {
  if (name == "cea") return FilterKind::kCea;
  if (name == "random") return FilterKind::kRandom;
  if (name == "none") return FilterKind::kNone;
  throw UsageError("unknown filter '" + name +
                   "' (expected cea, random or none)");
}

void ValidateFilterPolicy(const FilterPolicy& policy) {
  if (policy.kind == FilterKind::kNone) return;
  if (!(policy.beta > 0.0 && policy.beta <= 1.0)) {
    throw SpecError("filter beta must lie in (0, 1]");
  }
}

double Cea(const AcquisitionContext& ctx, std::span<const double> z) {
  return ctx.accuracy->Predict(z).mean * FeasibilityProduct(ctx, z);
}

std::size_t FilterSize(double beta, std::size_t n) {
  if (n == 0) return 0;
  // The epsilon keeps exact products such as 0.1 * 100 from rounding up.
  const double raw = std::ceil(beta * static_cast<double>(n) - 1e-9);
  const std::size_t k = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
  return std::min(k, n);
}

std::vector<std::size_t> SelectCandidates(const FilterPolicy& policy,
                                          std::span<const std::size_t> untested,
                                          const Matrix& features,
                                          const AcquisitionContext& ctx,
                                          std::uint64_t seed, int jobs) {
  ValidateFilterPolicy(policy);
  std::vector<std::size_t> ids(untested.begin(), untested.end());
  std::sort(ids.begin(), ids.end());
  if (policy.kind == FilterKind::kNone || ids.empty()) return ids;
  const std::size_t k = FilterSize(policy.beta, ids.size());

  if (policy.kind == FilterKind::kRandom) {
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(ids[i], ids[i + UniformIndex(rng, ids.size() - i)]);
    }
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::vector<double> scores(ids.size());
  ParallelFor(ids.size(), jobs, [&](std::size_t i) {
    scores[i] = Cea(ctx, features.row(ids[i]));
  });
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = ids[order[i]];
  return out;
}

}  // namespace subtune
