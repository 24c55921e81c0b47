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

#include "subtune/tree_ensemble.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "subtune/errors.h"

namespace subtune {

TreeEnsemble::TreeEnsemble(TreeOptions options) : options_(options) {
  if (options_.n_trees < 1) throw UsageError("n_trees must be positive");
  if (options_.min_leaf < 1) throw UsageError("min_leaf must be positive");
}

void TreeEnsemble::Fit(const ObservationDataset& data, std::uint64_t seed) {
  ValidateDataset(data);
  if (data.size() == 0) {
    throw FitError("cannot fit a tree ensemble on an empty data-set");
  }
  features_ = data.features;
  targets_.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    targets_[i] = log_target() ? std::log(data.targets[i]) : data.targets[i];
    targets_[i] -= Offset(features_.row(i));
  }
  seed_ = seed;
  Grow();
}

void TreeEnsemble::Grow() {
  const std::size_t n = targets_.size();
  trees_.assign(static_cast<std::size_t>(options_.n_trees), Tree());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    Rng rng(DeriveSeed({seed_, t}));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = UniformIndex(rng, n);
    std::sort(rows.begin(), rows.end());
    GrowNode(trees_[t], rows, rng);
  }
  fitted_ = true;
}

int TreeEnsemble::GrowNode(Tree& tree, std::vector<std::size_t>& rows,
                           Rng& rng) const {
  const int index = static_cast<int>(tree.size());
  tree.emplace_back();
  const std::size_t min_leaf = static_cast<std::size_t>(options_.min_leaf);

  std::vector<double> ys(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = targets_[rows[i]];
  const bool constant = std::all_of(ys.begin(), ys.end(),
                                    [&](double y) { return y == ys[0]; });
  tree[index].value = constant ? ys[0] : StableMean(ys);
  if (constant || rows.size() < 2 * min_leaf) return index;

  int best_feature = -1;
  double best_threshold = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < features_.cols(); ++f) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, features_(r, f));
      hi = std::max(hi, features_(r, f));
    }
    if (!(hi > lo)) continue;
    const double threshold = lo + UniformUnit(rng) * (hi - lo);
    std::size_t n_left = 0;
    double sum_left = 0.0;
    double sum_right = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (features_(rows[i], f) <= threshold) {
        ++n_left;
        sum_left += ys[i];
      } else {
        sum_right += ys[i];
      }
    }
    const std::size_t n_right = rows.size() - n_left;
    if (n_left < min_leaf || n_right < min_leaf) continue;
    const double score = sum_left * sum_left / static_cast<double>(n_left) +
                         sum_right * sum_right / static_cast<double>(n_right);
    if (score > best_score) {
      best_score = score;
      best_feature = static_cast<int>(f);
      best_threshold = threshold;
    }
  }
  if (best_feature < 0) return index;

  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t r : rows) {
    (features_(r, best_feature) <= best_threshold ? left : right).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();
  tree[index].feature = best_feature;
  tree[index].threshold = best_threshold;
  const int l = GrowNode(tree, left, rng);
  tree[index].left = l;
  const int r = GrowNode(tree, right, rng);
  tree[index].right = r;
  return index;
}

double TreeEnsemble::Evaluate(const Tree& tree, std::span<const double> z) {
  int node = 0;
  while (tree[node].feature >= 0) {
    node = z[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                         : tree[node].right;
  }
  return tree[node].value;
}

double TreeEnsemble::Offset(std::span<const double> z) const {
  if (!log_target() || !options_.fidelity_offset) return 0.0;
  const double s = z.back();
  if (!(s > 0.0)) throw UsageError("sub-sampling rate must be > 0");
  return std::log(s);
}

void TreeEnsemble::RequireFitted() const {
  if (!fitted_) throw UsageError("tree ensemble used before fit()");
}

std::vector<double> TreeEnsemble::MemberPredictions(
    std::span<const double> z) const {
  RequireFitted();
  if (z.size() != features_.cols()) {
    throw UsageError("query width does not match the training features");
  }
  const double offset = Offset(z);
  std::vector<double> out(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    out[t] = Evaluate(trees_[t], z) + offset;
  }
  return out;
}

Prediction TreeEnsemble::PredictLatent(std::span<const double> z) const {
  const std::vector<double> members = MemberPredictions(z);
  const double mean = StableMean(members);
  double ss = 0.0;
  for (double m : members) ss += (m - mean) * (m - mean);
  return {mean, std::sqrt(ss / static_cast<double>(members.size()))};
}

JointPosterior TreeEnsemble::PredictJoint(const Matrix& points) const {
  RequireFitted();
  if (points.rows() == 0) throw UsageError("joint prediction over no points");
  JointPosterior joint;
  joint.ensemble = true;
  joint.members = Matrix(trees_.size(), points.rows());
  joint.mean.resize(points.rows());
  for (std::size_t j = 0; j < points.rows(); ++j) {
    const std::vector<double> members = MemberPredictions(points.row(j));
    for (std::size_t t = 0; t < members.size(); ++t) {
      joint.members(t, j) = members[t];
    }
    joint.mean[j] = StableMean(members);
  }
  return joint;
}

ModelPtr TreeEnsemble::Condition(std::span<const double> z, double y) const {
  RequireFitted();
  if (!std::isfinite(y)) throw UsageError("fantasy observation is not finite");
  if (log_target() && !(y > 0.0)) {
    throw UsageError("fantasy observation for a log-space model must be > 0");
  }
  auto next = std::make_shared<TreeEnsemble>(options_);
  next->features_ = features_;
  next->features_.AppendRow(z);
  next->targets_ = targets_;
  next->targets_.push_back((log_target() ? std::log(y) : y) - Offset(z));
  next->seed_ = DeriveSeed({seed_, HashFeatures(z)});
  next->Grow();
  return next;
}

}  // namespace subtune
