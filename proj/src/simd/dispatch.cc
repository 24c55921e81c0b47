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

#include <cstdlib>
#include <string>
#include <string_view>

#include "subtune/errors.h"
#include "subtune/simd/kernels.h"

namespace subtune::simd {
namespace {

constexpr KernelTable kScalarTable = {
    Isa::kScalar, &scalar::Dot, &scalar::Axpy, &scalar::WeightedSqDist,
    &scalar::MaxValue};

#if defined(SUBTUNE_WITH_AVX2)
constexpr KernelTable kAvx2Table = {Isa::kAvx2, &avx2::Dot, &avx2::Axpy,
                                    &avx2::WeightedSqDist, &avx2::MaxValue};
#endif

const KernelTable& SelectTable() {
  const char* forced = std::getenv("SUBTUNE_ISA");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    return kScalarTable;
  }
#if defined(SUBTUNE_WITH_AVX2)
  if (IsSupported(Isa::kAvx2)) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool IsSupported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(SUBTUNE_WITH_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& KernelsFor(Isa isa) {
  if (!IsSupported(isa)) {
    throw UsageError("SIMD level '" + std::string(IsaName(isa)) +
                     "' is not available on this machine");
  }
#if defined(SUBTUNE_WITH_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& Kernels() {
  static const KernelTable& table = SelectTable();
  return table;
}

}  // namespace subtune::simd
