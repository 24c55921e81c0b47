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

#ifndef SUBTUNE_TREE_ENSEMBLE_H_
#define SUBTUNE_TREE_ENSEMBLE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "subtune/linalg.h"
#include "subtune/random.h"
#include "subtune/surrogate.h"

namespace subtune {

struct TreeOptions {
  TargetRole role = TargetRole::kAccuracy;
  int n_trees = 20;
  int min_leaf = 2;
  // Log-target models regress log(y / s) and add log(s) back at prediction
  // time. Piecewise-constant trees cannot extrapolate along s, so without
  // the offset full-fidelity costs are pooled with cheap sub-sampled rows.
  bool fidelity_offset = true;
};

// Extremely randomized regression trees, each grown on a bootstrap resample
// of the data. The predictive Gaussian takes the member mean and the
// population standard deviation of the member predictions.
class TreeEnsemble final : public SurrogateModel {
 public:
  explicit TreeEnsemble(TreeOptions options);

  // Throws FitError for invalid targets or an empty data-set.
  void Fit(const ObservationDataset& data, std::uint64_t seed);

  bool fitted() const override { return fitted_; }
  bool log_target() const override { return UsesLogTarget(options_.role); }
  std::size_t num_observations() const override { return targets_.size(); }

  Prediction PredictLatent(std::span<const double> z) const override;
  JointPosterior PredictJoint(const Matrix& points) const override;
  // Refits every tree on fresh bootstraps of the extended data, seeded from
  // the fit seed and the bit pattern of z.
  ModelPtr Condition(std::span<const double> z, double y) const override;

  // Latent prediction of every member, in tree order.
  std::vector<double> MemberPredictions(std::span<const double> z) const;

  std::size_t num_trees() const { return trees_.size(); }
  const TreeOptions& options() const { return options_; }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  void Grow();
  int GrowNode(Tree& tree, std::vector<std::size_t>& rows, Rng& rng) const;
  static double Evaluate(const Tree& tree, std::span<const double> z);
  void RequireFitted() const;
  // Latent offset at z: log(s) for offset models, else 0.
  double Offset(std::span<const double> z) const;

  TreeOptions options_;
  std::uint64_t seed_ = 0;
  bool fitted_ = false;
  Matrix features_;
  std::vector<double> targets_;  // latent units
  std::vector<Tree> trees_;
};

}  // namespace subtune

#endif  // SUBTUNE_TREE_ENSEMBLE_H_
