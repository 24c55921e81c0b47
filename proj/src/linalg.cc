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

#include "subtune/linalg.h"

#include <cmath>
#include <sstream>

#include "subtune/errors.h"
#include "subtune/simd/kernels.h"

namespace subtune {

void Matrix::AppendRow(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) cols_ = values.size();
  if (values.size() != cols_) {
    throw UsageError("row width does not match matrix column count");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

bool CholeskyInPlace(Matrix& a) {
  const std::size_t n = a.rows();
  const auto& k = simd::Kernels();
  for (std::size_t j = 0; j < n; ++j) {
    const double* row_j = a.row(j).data();
    const double pivot = a(j, j) - k.dot(row_j, row_j, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
    const double diag = std::sqrt(pivot);
    a(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double* row_i = a.row(i).data();
      a(i, j) = (a(i, j) - k.dot(row_i, row_j, j)) / diag;
    }
  }
  // Zero the strict upper triangle so the factor is a clean L.
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) a(r, c) = 0.0;
  }
  return true;
}

CholeskyFactor CholeskyWithJitter(const Matrix& a) {
  if (a.rows() != a.cols()) throw UsageError("Cholesky needs a square matrix");
  for (double jitter = kInitialJitter; jitter <= kMaxJitter * 1.0000001;
       jitter *= 10.0) {
    Matrix work = a;
    for (std::size_t i = 0; i < work.rows(); ++i) work(i, i) += jitter;
    if (CholeskyInPlace(work)) return {std::move(work), jitter};
  }
  std::ostringstream msg;
  msg << "Cholesky factorization of a " << a.rows() << "x" << a.cols()
      << " matrix failed with diagonal jitter up to " << kMaxJitter;
  throw NumericalError(msg.str());
}

std::vector<double> ForwardSubstitute(const Matrix& lower,
                                      std::span<const double> b) {
  const std::size_t n = lower.rows();
  std::vector<double> y(n);
  const auto& k = simd::Kernels();
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (b[i] - k.dot(lower.row(i).data(), y.data(), i)) / lower(i, i);
  }
  return y;
}

std::vector<double> BackSubstituteTransposed(const Matrix& lower,
                                             std::span<const double> y) {
  const std::size_t n = lower.rows();
  std::vector<double> rhs(y.begin(), y.end());
  std::vector<double> x(n);
  const auto& k = simd::Kernels();
  for (std::size_t i = n; i-- > 0;) {
    x[i] = rhs[i] / lower(i, i);
    // Row i of L holds column i of L^T.
    k.axpy(-x[i], lower.row(i).data(), rhs.data(), i);
  }
  return x;
}

std::vector<double> CholeskySolve(const Matrix& lower,
                                  std::span<const double> b) {
  return BackSubstituteTransposed(lower, ForwardSubstitute(lower, b));
}

Matrix ForwardSubstitute(const Matrix& lower, const Matrix& b) {
  const std::size_t n = lower.rows();
  const std::size_t m = b.cols();
  Matrix x = b;
  const auto& k = simd::Kernels();
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.row(i).data();
    for (std::size_t p = 0; p < i; ++p) {
      k.axpy(-lower(i, p), x.row(p).data(), xi, m);
    }
    const double inv = 1.0 / lower(i, i);
    for (std::size_t c = 0; c < m; ++c) xi[c] *= inv;
  }
  return x;
}

double LogDetFromCholesky(const Matrix& lower) {
  double sum = 0.0;
  for (std::size_t i = 0; i < lower.rows(); ++i) sum += std::log(lower(i, i));
  return 2.0 * sum;
}

double StableMean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double first = values[0];
  double acc = 0.0;
  for (double v : values) acc += v - first;
  return first + acc / static_cast<double>(values.size());
}

}  // namespace subtune
