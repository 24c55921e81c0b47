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

#include "subtune/surrogate.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "subtune/errors.h"
#include "subtune/gp_model.h"
#include "subtune/random.h"
#include "subtune/simd/kernels.h"
#include "subtune/tree_ensemble.h"

namespace subtune {

std::string TargetRoleName(TargetRole role) {
  switch (role) {
    case TargetRole::kAccuracy:
      return "accuracy";
    case TargetRole::kCost:
      return "cost";
    case TargetRole::kQos:
      return "qos";
  }
  return "unknown";
}

void ObservationDataset::Add(std::span<const double> z, double y) {
  features.AppendRow(z);
  targets.push_back(y);
}

void ValidateDataset(const ObservationDataset& data) {
  if (data.features.rows() != data.targets.size()) {
    throw FitError("feature rows and targets differ in length");
  }
  for (std::size_t i = 0; i < data.targets.size(); ++i) {
    const double y = data.targets[i];
    std::string problem;
    if (!std::isfinite(y)) {
      problem = "is not finite";
    } else if (data.role == TargetRole::kAccuracy && (y < 0.0 || y > 1.0)) {
      problem = "is outside [0, 1]";
    } else if (UsesLogTarget(data.role) && !(y > 0.0)) {
      problem = "is not strictly positive";
    }
    if (!problem.empty()) {
      std::ostringstream msg;
      msg << TargetRoleName(data.role) << " target at row " << i << " (" << y
          << ") " << problem;
      throw FitError(msg.str());
    }
  }
}

std::vector<Prediction> SurrogateModel::PredictLatentBatch(
    const Matrix& points) const {
  std::vector<Prediction> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    out[i] = PredictLatent(points.row(i));
  }
  return out;
}

Prediction SurrogateModel::Predict(std::span<const double> z) const {
  Prediction p = PredictLatent(z);
  if (log_target()) p.mean = std::exp(p.mean);
  return p;
}

Matrix StandardNormals(std::size_t num_samples, std::size_t num_points,
                       std::uint64_t seed) {
  Matrix out(num_samples, num_points);
  Rng rng(seed);
  for (std::size_t f = 0; f < num_samples; ++f) {
    for (std::size_t j = 0; j < num_points; ++j) out(f, j) = StandardNormal(rng);
  }
  return out;
}

Matrix CovarianceFactor(const Matrix& covariance) {
  const std::size_t n = covariance.rows();
  if (covariance.cols() != n) throw UsageError("covariance must be square");
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_diag = std::max(max_diag, covariance(i, i));
  }
  Matrix a = covariance;
  if (!(max_diag > 0.0)) {
    for (std::size_t i = 0; i < n; ++i) {
      if (covariance(i, i) < 0.0) return CholeskyWithJitter(covariance).lower;
    }
    return Matrix(n, n);
  }
  const double zero_tol = 1e-12 * max_diag;
  const double negative_tol = 1e-6 * max_diag;
  const auto& k = simd::Kernels();
  for (std::size_t j = 0; j < n; ++j) {
    const double* row_j = a.row(j).data();
    const double pivot = a(j, j) - k.dot(row_j, row_j, j);
    if (!std::isfinite(pivot) || pivot < -negative_tol) {
      return CholeskyWithJitter(covariance).lower;
    }
    if (pivot <= zero_tol) {
      for (std::size_t i = j; i < n; ++i) a(i, j) = 0.0;
      continue;
    }
    const double diag = std::sqrt(pivot);
    a(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - k.dot(a.row(i).data(), row_j, j)) / diag;
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) a(r, c) = 0.0;
  }
  return a;
}

Matrix SampleFunctions(const JointPosterior& joint, const Matrix& normals) {
  const std::size_t num_samples = normals.rows();
  if (num_samples == 0) throw UsageError("sample count F must be positive");
  const std::size_t m = joint.size();
  Matrix out(num_samples, m);
  if (joint.ensemble) {
    const std::size_t members = joint.members.rows();
    for (std::size_t f = 0; f < num_samples; ++f) {
      const auto src = joint.members.row(f % members);
      std::copy(src.begin(), src.end(), out.row(f).begin());
    }
    return out;
  }
  if (normals.cols() != m) {
    throw UsageError("normal draws do not match the joint dimension");
  }
  const Matrix lower = CovarianceFactor(joint.covariance);
  const auto& k = simd::Kernels();
  for (std::size_t f = 0; f < num_samples; ++f) {
    const double* z = normals.row(f).data();
    for (std::size_t i = 0; i < m; ++i) {
      out(f, i) = joint.mean[i] + k.dot(lower.row(i).data(), z, i + 1);
    }
  }
  return out;
}

Matrix SampleFunctions(const JointPosterior& joint, std::size_t num_samples,
                       std::uint64_t seed) {
  if (num_samples == 0) throw UsageError("sample count F must be positive");
  const std::size_t cols = joint.ensemble ? 0 : joint.size();
  return SampleFunctions(joint, StandardNormals(num_samples, cols, seed));
}

std::string SurrogateKindName(SurrogateKind kind) {
  return kind == SurrogateKind::kGp ? "gp" : "trees";
}

SurrogateKind ParseSurrogateKind(const std::string& name) {
  if (name == "gp") return SurrogateKind::kGp;
  if (name == "trees") return SurrogateKind::kTrees;
  throw UsageError("unknown surrogate '" + name + "' (expected gp or trees)");
}

ModelPtr FitSurrogate(const SurrogateOptions& options,
                      const ObservationDataset& data, std::uint64_t seed) {
  if (options.kind == SurrogateKind::kGp) {
    GpOptions gp;
    gp.role = data.role;
    gp.restarts = options.gp_restarts;
    gp.max_evaluations = options.gp_max_evaluations;
    auto model = std::make_shared<GpModel>(gp);
    model->Fit(data, seed);
    return model;
  }
  TreeOptions trees;
  trees.role = data.role;
  trees.n_trees = options.n_trees;
  trees.min_leaf = options.min_leaf;
  trees.fidelity_offset = options.tree_fidelity_offset;
  auto model = std::make_shared<TreeEnsemble>(trees);
  model->Fit(data, seed);
  return model;
}

}  // namespace subtune
