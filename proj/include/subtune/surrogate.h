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

#ifndef SUBTUNE_SURROGATE_H_
#define SUBTUNE_SURROGATE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "subtune/linalg.h"

namespace subtune {

enum class TargetRole { kAccuracy, kCost, kQos };

std::string TargetRoleName(TargetRole role);

// Training rows for one modeled quantity. Rows are encoded feature vectors
// (the last coordinate is the sub-sampling rate).
struct ObservationDataset {
  TargetRole role = TargetRole::kAccuracy;
  Matrix features;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  void Add(std::span<const double> z, double y);
};

// Accuracy targets are modeled as-is; cost and QoS targets in log space.
inline bool UsesLogTarget(TargetRole role) {
  return role != TargetRole::kAccuracy;
}

// Checks role-specific target invariants (finite, accuracy in [0, 1],
// costs strictly positive). Throws FitError naming the offending row.
void ValidateDataset(const ObservationDataset& data);

struct Prediction {
  double mean = 0.0;
  double std = 0.0;
};

// Joint posterior over a list of points, in latent (model) units.
// A GP carries a mean vector and full covariance; a tree ensemble carries
// one row of member predictions per tree.
struct JointPosterior {
  std::vector<double> mean;
  Matrix covariance;
  Matrix members;
  bool ensemble = false;

  std::size_t size() const { return mean.size(); }
};

class SurrogateModel {
 public:
  virtual ~SurrogateModel() = default;

  virtual bool fitted() const = 0;
  virtual bool log_target() const = 0;
  virtual std::size_t num_observations() const = 0;

  // Posterior in latent units (log space for log-target models).
  virtual Prediction PredictLatent(std::span<const double> z) const = 0;
  virtual std::vector<Prediction> PredictLatentBatch(
      const Matrix& points) const;

  // Posterior in original units: for log targets the mean is exp(mu_log)
  // (the posterior median) and std stays the log-space std.
  Prediction Predict(std::span<const double> z) const;

  virtual JointPosterior PredictJoint(const Matrix& points) const = 0;

  // Fantasy update: the model refit on its data plus (z, y), with y in
  // original units. The receiver is left untouched.
  virtual std::shared_ptr<const SurrogateModel> Condition(
      std::span<const double> z, double y) const = 0;
};

using ModelPtr = std::shared_ptr<const SurrogateModel>;

// Standard normal draws, F rows of m columns.
Matrix StandardNormals(std::size_t num_samples, std::size_t num_points,
                       std::uint64_t seed);

// F function samples (rows) over the joint's points. For a GP each row is
// mean + L z with L a factor of the covariance and z the matching row of
// `normals`; for an ensemble the member rows are returned, cycled when F
// exceeds the number of members. Throws UsageError when F = 0.
Matrix SampleFunctions(const JointPosterior& joint, const Matrix& normals);
Matrix SampleFunctions(const JointPosterior& joint, std::size_t num_samples,
                       std::uint64_t seed);

// Lower factor used for sampling. Pivots that vanish to rounding are
// treated as exact rank deficiency; a clearly indefinite matrix falls back
// to jitter escalation and throws NumericalError beyond it.
Matrix CovarianceFactor(const Matrix& covariance);

enum class SurrogateKind { kGp, kTrees };

std::string SurrogateKindName(SurrogateKind kind);
SurrogateKind ParseSurrogateKind(const std::string& name);

struct SurrogateOptions {
  SurrogateKind kind = SurrogateKind::kTrees;
  int n_trees = 20;
  int min_leaf = 2;
  bool tree_fidelity_offset = true;  // see TreeOptions::fidelity_offset
  int gp_restarts = 5;
  int gp_max_evaluations = 200;  // per restart
};

// Fits the configured model family on `data`.
ModelPtr FitSurrogate(const SurrogateOptions& options,
                      const ObservationDataset& data, std::uint64_t seed);

}  // namespace subtune

#endif  // SUBTUNE_SURROGATE_H_
