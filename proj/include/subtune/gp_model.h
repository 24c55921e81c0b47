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

#ifndef SUBTUNE_GP_MODEL_H_
#define SUBTUNE_GP_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "subtune/linalg.h"
#include "subtune/surrogate.h"

namespace subtune {

// Basis of the finite-rank covariance over the sub-sampling rate s.
//   kSaturating: phi(s) = (1, (1 - s)^2), used for accuracy
//   kGrowing:    phi(s) = (1, s),         used for (log) cost and QoS
enum class FidelityBasis { kSaturating, kGrowing };

// Kernel and likelihood parameters. The fidelity covariance is
// Sigma = L L^T with L = [[1, 0], [fidelity_offdiag, fidelity_diag]], so it
// is positive semi-definite by construction and its scale lives entirely in
// signal_variance.
struct GpHyperparameters {
  std::vector<double> length_scales;  // one per non-fidelity feature
  double signal_variance = 1.0;
  double fidelity_offdiag = 0.0;
  double fidelity_diag = 1.0;
  double noise_variance = 1e-6;
  double prior_mean = 0.0;  // latent units
};

struct GpOptions {
  TargetRole role = TargetRole::kAccuracy;
  int restarts = 5;
  int max_evaluations = 300;  // per restart
  // Pins the noise variance instead of fitting it.
  std::optional<double> fixed_noise;
};

// Gaussian process with a Matern-5/2 kernel over the configuration
// coordinates multiplied by the fidelity kernel phi(s)^T Sigma phi(s').
class GpModel final : public SurrogateModel {
 public:
  explicit GpModel(GpOptions options);

  // Fits hyperparameters by multi-start coordinate ascent on the log
  // marginal likelihood, then conditions on the data. Deterministic in
  // `seed`. Throws FitError for invalid targets.
  void Fit(const ObservationDataset& data, std::uint64_t seed);

  // A model with frozen hyperparameters conditioned on `data`, which may be
  // empty (prior).
  static GpModel WithHyperparameters(GpOptions options, GpHyperparameters hp,
                                     const ObservationDataset& data);

  bool fitted() const override { return fitted_; }
  bool log_target() const override { return UsesLogTarget(options_.role); }
  std::size_t num_observations() const override { return targets_.size(); }

  Prediction PredictLatent(std::span<const double> z) const override;
  std::vector<Prediction> PredictLatentBatch(
      const Matrix& points) const override;
  JointPosterior PredictJoint(const Matrix& points) const override;
  ModelPtr Condition(std::span<const double> z, double y) const override;

  // Log marginal likelihood of the attached data under `hp`.
  // Throws NumericalError when the covariance cannot be factorized.
  double LogMarginalLikelihood(const GpHyperparameters& hp) const;

  double Kernel(std::span<const double> a, std::span<const double> b) const;

  const GpHyperparameters& hyperparameters() const { return hp_; }
  const GpOptions& options() const { return options_; }
  FidelityBasis basis() const { return basis_; }

  // Initial points of the last Fit() restarts, for diagnostics.
  const std::vector<GpHyperparameters>& start_points() const {
    return start_points_;
  }

  // Training inputs and latent targets.
  const Matrix& features() const { return features_; }
  const std::vector<double>& latent_targets() const { return targets_; }

 private:
  void AttachData(const ObservationDataset& data);
  void ComputePosterior();
  void RequireFitted() const;

  GpOptions options_;
  FidelityBasis basis_;
  GpHyperparameters hp_;
  bool fitted_ = false;

  Matrix features_;
  std::vector<double> targets_;  // latent units

  Matrix chol_;                // factor of K + noise I
  std::vector<double> alpha_;  // (K + noise I)^-1 (y - prior_mean)
  std::vector<double> inv_ls2_;

  std::vector<GpHyperparameters> start_points_;
};

}  // namespace subtune

#endif  // SUBTUNE_GP_MODEL_H_
