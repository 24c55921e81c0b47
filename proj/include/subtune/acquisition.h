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

#ifndef SUBTUNE_ACQUISITION_H_
#define SUBTUNE_ACQUISITION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subtune/config_space.h"
#include "subtune/linalg.h"
#include "subtune/surrogate.h"

namespace subtune {

// Floor applied to every predicted cost used as a denominator.
inline constexpr double kCostFloor = 1e-9;

enum class ConstraintDirection { kAtMost, kAtLeast };

// One QoS requirement on a modeled quantity at full fidelity. Roles:
//   "cost": evaluation cost in USD, modeled by the cost model
//   "time": training time in seconds, modeled by a dedicated model
struct Constraint {
  std::string role = "cost";
  ConstraintDirection direction = ConstraintDirection::kAtMost;
  double threshold = 0.0;  // +inf disables an kAtMost constraint
};

struct ConstraintSpec {
  std::vector<Constraint> constraints;
};

// P(quantity satisfies c) under the model's Gaussian posterior at z. For
// log-target models the threshold is compared in log space; a non-positive
// threshold then throws SpecError. A zero std gives the indicator.
double FeasibilityProb(const SurrogateModel& model, const Constraint& c,
                       std::span<const double> z);
double FeasibilityProbFromLatent(const Prediction& latent, bool log_target,
                                 const Constraint& c);

double NormalCdf(double x);
double NormalPdf(double x);

// Closed-form Gaussian expected improvement over eta, >= 0.
double ExpectedImprovement(double mean, double std, double eta);

// Frozen snapshot of everything a candidate score depends on.
struct AcquisitionContext {
  ModelPtr accuracy;
  ModelPtr cost;
  ConstraintSpec constraints;
  // Parallel to constraints.constraints; "cost" entries alias `cost`.
  std::vector<ModelPtr> constraint_models;
  double eta = 0.0;
  double feasibility_threshold = 0.9;
  // Encoded full-fidelity representer rows; config ids for reporting.
  Matrix representers;
  std::vector<std::size_t> representer_ids;
  // Common random numbers for GP function samples: F rows x
  // |representers| columns. Ensembles use their member rows instead.
  Matrix normals;
};

// Product of the per-constraint feasibility probabilities at z.
double FeasibilityProduct(const AcquisitionContext& ctx,
                          std::span<const double> z);

double ExpectedImprovement(const AcquisitionContext& ctx,
                           std::span<const double> z);
double ConstrainedEi(const AcquisitionContext& ctx, std::span<const double> z);
double EicPerCost(const AcquisitionContext& ctx, std::span<const double> z);

// Monte Carlo argmax frequencies over the columns of `samples`. Entries
// within 1e-12 * max(1, |max|) of a row maximum share the row's unit mass.
std::vector<double> POpt(const Matrix& samples);
// p_opt of `accuracy_model` over ctx.representers.
std::vector<double> POpt(const AcquisitionContext& ctx,
                         const SurrogateModel& accuracy_model);

// KL(p || uniform) in nats, clamped at 0. Negative entries throw
// UsageError.
double InfoGain(std::span<const double> p);

double FabolasAf(const AcquisitionContext& ctx, std::span<const double> z);
double TrimTunerAf(const AcquisitionContext& ctx, std::span<const double> z);

struct IncumbentChoice {
  std::size_t index = 0;
  double accuracy = 0.0;
  double feasibility = 0.0;
  bool fallback = false;
};

// Highest accuracy among entries with feasibility >= threshold (ties by
// index). With none qualifying: highest feasibility, ties by accuracy then
// index, flagged as fallback.
IncumbentChoice ChooseIncumbent(std::span<const double> accuracy,
                                std::span<const double> feasibility,
                                double threshold);

enum class AcquisitionKind { kEi, kEic, kEicPerCost, kFabolas, kTrimTuner,
                             kRandom };

std::string AcquisitionName(AcquisitionKind kind);
AcquisitionKind ParseAcquisition(const std::string& name);

// Whether the method explores sub-sampled fidelities.
bool UsesSubsampling(AcquisitionKind kind);

// Score of one candidate; kRandom scores every candidate 0.
double Score(AcquisitionKind kind, const AcquisitionContext& ctx,
             std::span<const double> z);

// Config ids of the representer set: the whole full-fidelity slice up to
// 512 configs, otherwise a seeded sample of 256 in ascending order.
std::vector<std::size_t> SelectRepresenters(const SearchSpace& space,
                                            std::uint64_t seed);

}  // namespace subtune

#endif  // SUBTUNE_ACQUISITION_H_
