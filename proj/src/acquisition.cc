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

#include "subtune/acquisition.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "subtune/errors.h"
#include "subtune/random.h"

namespace subtune {
namespace {

constexpr std::size_t kMaxExactRepresenters = 512;
constexpr std::size_t kSampledRepresenters = 256;

bool AlwaysSatisfied(const Constraint& c) {
  return c.direction == ConstraintDirection::kAtMost &&
         c.threshold == std::numeric_limits<double>::infinity();
}

}  // namespace

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double NormalPdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double FeasibilityProbFromLatent(const Prediction& latent, bool log_target,
                                 const Constraint& c) {
  if (std::isnan(c.threshold)) throw SpecError("constraint threshold is NaN");
  if (AlwaysSatisfied(c)) return 1.0;
  if (log_target && !(c.threshold > 0.0)) {
    throw SpecError("threshold on '" + c.role + "' must be > 0");
  }
  const double limit = log_target ? std::log(c.threshold) : c.threshold;
  double below;  // P(quantity <= limit)
  if (latent.std > 0.0) {
    below = NormalCdf((limit - latent.mean) / latent.std);
  } else {
    below = latent.mean <= limit ? 1.0 : 0.0;
  }
  if (c.direction == ConstraintDirection::kAtMost) return below;
  if (latent.std > 0.0) return 1.0 - below;
  return latent.mean >= limit ? 1.0 : 0.0;
}

double FeasibilityProb(const SurrogateModel& model, const Constraint& c,
                       std::span<const double> z) {
  if (AlwaysSatisfied(c)) return 1.0;
  return FeasibilityProbFromLatent(model.PredictLatent(z), model.log_target(),
                                   c);
}

double ExpectedImprovement(double mean, double std, double eta) {
  const double gap = mean - eta;
  if (!(std > 0.0)) return std::max(0.0, gap);
  const double u = gap / std;
  return std::max(0.0, gap * NormalCdf(u) + std * NormalPdf(u));
}

double FeasibilityProduct(const AcquisitionContext& ctx,
                          std::span<const double> z) {
  double product = 1.0;
  for (std::size_t i = 0; i < ctx.constraints.constraints.size(); ++i) {
    product *= FeasibilityProb(*ctx.constraint_models.at(i),
                               ctx.constraints.constraints[i], z);
  }
  return product;
}

double ExpectedImprovement(const AcquisitionContext& ctx,
                           std::span<const double> z) {
  const Prediction p = ctx.accuracy->Predict(z);
  return ExpectedImprovement(p.mean, p.std, ctx.eta);
}

double ConstrainedEi(const AcquisitionContext& ctx, std::span<const double> z) {
  return ExpectedImprovement(ctx, z) * FeasibilityProduct(ctx, z);
}

double EicPerCost(const AcquisitionContext& ctx, std::span<const double> z) {
  const double cost = ctx.cost->Predict(z).mean;
  return ConstrainedEi(ctx, z) / std::max(cost, kCostFloor);
}

std::vector<double> POpt(const Matrix& samples) {
  const std::size_t m = samples.cols();
  if (m == 0) throw UsageError("p_opt needs at least one representer");
  if (samples.rows() == 0) throw UsageError("p_opt needs at least one sample");
  std::vector<double> mass(m, 0.0);
  std::vector<std::size_t> winners;
  for (std::size_t f = 0; f < samples.rows(); ++f) {
    const auto row = samples.row(f);
    const double best = *std::max_element(row.begin(), row.end());
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    winners.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (row[j] >= best - tol) winners.push_back(j);
    }
    const double share = 1.0 / static_cast<double>(winners.size());
    for (std::size_t j : winners) mass[j] += share;
  }
  const double total = static_cast<double>(samples.rows());
  for (double& v : mass) v /= total;
  return mass;
}

std::vector<double> POpt(const AcquisitionContext& ctx,
                         const SurrogateModel& accuracy_model) {
  const JointPosterior joint = accuracy_model.PredictJoint(ctx.representers);
  if (joint.ensemble) return POpt(joint.members);
  return POpt(SampleFunctions(joint, ctx.normals));
}

double InfoGain(std::span<const double> p) {
  if (p.empty()) throw UsageError("info gain of an empty distribution");
  const double n = static_cast<double>(p.size());
  double kl = 0.0;
  for (double v : p) {
    if (v < 0.0 || std::isnan(v)) {
      throw UsageError("probability vector has a negative entry");
    }
    if (v > 0.0) kl += v * std::log(v * n);
  }
  return std::max(0.0, kl);
}

double FabolasAf(const AcquisitionContext& ctx, std::span<const double> z) {
  const double a_hat = ctx.accuracy->Predict(z).mean;
  const ModelPtr fantasy = ctx.accuracy->Condition(z, a_hat);
  const double gain = InfoGain(POpt(ctx, *fantasy));
  const double cost = ctx.cost->Predict(z).mean;
  return gain / std::max(cost, kCostFloor);
}

double TrimTunerAf(const AcquisitionContext& ctx, std::span<const double> z) {
  // (1) Fantasy updates at the single quadrature root.
  const double a_hat = ctx.accuracy->Predict(z).mean;
  const ModelPtr accuracy = ctx.accuracy->Condition(z, a_hat);
  const auto& constraints = ctx.constraints.constraints;
  std::map<const SurrogateModel*, ModelPtr> fantasies;
  std::vector<const SurrogateModel*> active(constraints.size(), nullptr);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (AlwaysSatisfied(constraints[i])) continue;
    const SurrogateModel* base = ctx.constraint_models.at(i).get();
    auto it = fantasies.find(base);
    if (it == fantasies.end()) {
      it = fantasies.emplace(base, base->Condition(z, base->Predict(z).mean))
               .first;
    }
    active[i] = it->second.get();
  }

  // (2) New incumbent among the representers under the fantasy models.
  const JointPosterior joint = accuracy->PredictJoint(ctx.representers);
  const std::size_t m = joint.size();
  std::vector<double> feasibility(m, 1.0);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (active[i] == nullptr) continue;
    const std::vector<Prediction> latent =
        active[i]->PredictLatentBatch(ctx.representers);
    for (std::size_t j = 0; j < m; ++j) {
      feasibility[j] *= FeasibilityProbFromLatent(
          latent[j], active[i]->log_target(), constraints[i]);
    }
  }
  const IncumbentChoice incumbent =
      ChooseIncumbent(joint.mean, feasibility, ctx.feasibility_threshold);

  // (3) Feasibility factor of that incumbent.
  const double factor = incumbent.feasibility;
  if (factor == 0.0) return 0.0;

  // (4) Information gain per unit of predicted cost.
  const double gain = InfoGain(joint.ensemble
                                   ? POpt(joint.members)
                                   : POpt(SampleFunctions(joint, ctx.normals)));
  const double cost = ctx.cost->Predict(z).mean;
  return factor * gain / std::max(cost, kCostFloor);
}

IncumbentChoice ChooseIncumbent(std::span<const double> accuracy,
                                std::span<const double> feasibility,
                                double threshold) {
  if (accuracy.empty() || accuracy.size() != feasibility.size()) {
    throw UsageError("incumbent selection needs matching non-empty inputs");
  }
  IncumbentChoice best;
  bool found = false;
  for (std::size_t j = 0; j < accuracy.size(); ++j) {
    if (feasibility[j] < threshold) continue;
    if (!found || accuracy[j] > best.accuracy) {
      best = {j, accuracy[j], feasibility[j], false};
      found = true;
    }
  }
  if (found) return best;
  best = {0, accuracy[0], feasibility[0], true};
  for (std::size_t j = 1; j < accuracy.size(); ++j) {
    if (feasibility[j] > best.feasibility ||
        (feasibility[j] == best.feasibility && accuracy[j] > best.accuracy)) {
      best = {j, accuracy[j], feasibility[j], true};
    }
  }
  return best;
}

std::string AcquisitionName(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::kEi:
      return "ei";
    case AcquisitionKind::kEic:
      return "eic";
    case AcquisitionKind::kEicPerCost:
      return "eic-usd";
    case AcquisitionKind::kFabolas:
      return "fabolas";
    case AcquisitionKind::kTrimTuner:
      return "trimtuner";
    case AcquisitionKind::kRandom:
      return "random";
  }
  return "unknown";
}

AcquisitionKind ParseAcquisition(const std::string& name) {
  for (AcquisitionKind kind :
       {AcquisitionKind::kEi, AcquisitionKind::kEic,
        AcquisitionKind::kEicPerCost, AcquisitionKind::kFabolas,
        AcquisitionKind::kTrimTuner, AcquisitionKind::kRandom}) {
    if (AcquisitionName(kind) == name) return kind;
  }
  throw UsageError("unknown acquisition '" + name +
                   "' (expected ei, eic, eic-usd, fabolas, trimtuner or "
                   "random)");
}

bool UsesSubsampling(AcquisitionKind kind) {
  return kind == AcquisitionKind::kFabolas ||
         kind == AcquisitionKind::kTrimTuner;
}

double Score(AcquisitionKind kind, const AcquisitionContext& ctx,
             std::span<const double> z) {
  switch (kind) {
    case AcquisitionKind::kEi:
      return ExpectedImprovement(ctx, z);
    case AcquisitionKind::kEic:
      return ConstrainedEi(ctx, z);
    case AcquisitionKind::kEicPerCost:
      return EicPerCost(ctx, z);
    case AcquisitionKind::kFabolas:
      return FabolasAf(ctx, z);
    case AcquisitionKind::kTrimTuner:
      return TrimTunerAf(ctx, z);
    case AcquisitionKind::kRandom:
      return 0.0;
  }
  return 0.0;
}

std::vector<std::size_t> SelectRepresenters(const SearchSpace& space,
                                            std::uint64_t seed) {
  const std::size_t n = space.num_configs();
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (n <= kMaxExactRepresenters) return ids;
  Rng rng(seed);
  for (std::size_t i = 0; i < kSampledRepresenters; ++i) {
    std::swap(ids[i], ids[i + UniformIndex(rng, n - i)]);
  }
  ids.resize(kSampledRepresenters);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace subtune
