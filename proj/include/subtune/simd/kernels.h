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

#ifndef SUBTUNE_SIMD_KERNELS_H_
#define SUBTUNE_SIMD_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the dense linear algebra, the GP kernel
// matrices and the Monte Carlo argmax. Every kernel has a portable scalar
// reference; wider variants are selected once at runtime from the CPU
// features and can be forced back to scalar with SUBTUNE_ISA=scalar.

namespace subtune::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view IsaName(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i w[i] * (a[i] - b[i])^2
  double (*weighted_sq_dist)(const double* a, const double* b,
                             const double* w, std::size_t n);
  // max_i a[i]; -inf for n == 0
  double (*max_value)(const double* a, std::size_t n);
};

// True when the running CPU can execute `isa` and it was compiled in.
bool IsSupported(Isa isa);

// The kernel table for an explicit ISA. Throws UsageError if unsupported.
const KernelTable& KernelsFor(Isa isa);

// The table selected for this process (best supported ISA unless
// overridden through the environment).
const KernelTable& Kernels();

inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Kernels().dot(a.data(), b.data(), a.size());
}

inline void Axpy(double alpha, std::span<const double> x,
                 std::span<double> y) {
  Kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline double WeightedSqDist(std::span<const double> a,
                             std::span<const double> b,
                             std::span<const double> w) {
  return Kernels().weighted_sq_dist(a.data(), b.data(), w.data(), a.size());
}

inline double MaxValue(std::span<const double> a) {
  return Kernels().max_value(a.data(), a.size());
}

namespace scalar {
double Dot(const double* a, const double* b, std::size_t n);
void Axpy(double alpha, const double* x, double* y, std::size_t n);
double WeightedSqDist(const double* a, const double* b, const double* w,
                      std::size_t n);
double MaxValue(const double* a, std::size_t n);
}  // namespace scalar

namespace avx2 {
double Dot(const double* a, const double* b, std::size_t n);
void Axpy(double alpha, const double* x, double* y, std::size_t n);
double WeightedSqDist(const double* a, const double* b, const double* w,
                      std::size_t n);
double MaxValue(const double* a, std::size_t n);
}  // namespace avx2

}  // namespace subtune::simd

#endif  // SUBTUNE_SIMD_KERNELS_H_
