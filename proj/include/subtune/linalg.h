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

#ifndef SUBTUNE_LINALG_H_
#define SUBTUNE_LINALG_H_

#include <cstddef>
#include <span>
#include <vector>

namespace subtune {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const { return data_; }

  // Appends a row; the first appended row fixes the column count of an
  // empty matrix.
  void AppendRow(std::span<const double> values);

  Matrix Transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Diagonal jitter schedule applied before every Cholesky attempt.
inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-6;

struct CholeskyFactor {
  Matrix lower;          // L with A + jitter * I = L L^T
  double jitter = 0.0;   // diagonal jitter that was needed
};

// Factorizes a symmetric matrix, adding kInitialJitter to the diagonal and
// escalating x10 up to kMaxJitter. Throws NumericalError beyond that.
CholeskyFactor CholeskyWithJitter(const Matrix& a);

// Plain Cholesky without jitter; returns false when a pivot is not positive.
bool CholeskyInPlace(Matrix& a);

// Solves L y = b.
std::vector<double> ForwardSubstitute(const Matrix& lower,
                                      std::span<const double> b);
// Solves L^T x = y.
std::vector<double> BackSubstituteTransposed(const Matrix& lower,
                                             std::span<const double> y);
// Solves (L L^T) x = b.
std::vector<double> CholeskySolve(const Matrix& lower,
                                  std::span<const double> b);
// Solves L X = B for a matrix right-hand side (B is n x m).
Matrix ForwardSubstitute(const Matrix& lower, const Matrix& b);

// Mean that is exact when all values are equal.
double StableMean(std::span<const double> values);

// log det(L L^T).
double LogDetFromCholesky(const Matrix& lower);

}  // namespace subtune

#endif  // SUBTUNE_LINALG_H_
