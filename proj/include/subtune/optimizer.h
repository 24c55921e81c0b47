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

#ifndef SUBTUNE_OPTIMIZER_H_
#define SUBTUNE_OPTIMIZER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "subtune/acquisition.h"
#include "subtune/config_space.h"
#include "subtune/filtering.h"
#include "subtune/linalg.h"
#include "subtune/oracle.h"
#include "subtune/surrogate.h"

namespace subtune {

enum class InitMode {
  kAuto,            // sub-sampled for fabolas/trimtuner, LHS otherwise
  kSubsampled,      // one random config at several fidelities
  kLatinHypercube,  // full-fidelity configs from a discrete LHS
};

struct OptimizerConfig {
  AcquisitionKind acquisition = AcquisitionKind::kTrimTuner;
  SurrogateOptions surrogate;
  FilterPolicy filter;
  int max_iterations = 44;
  // Empty selects the <= 0.5 prefix of the fidelity grid.
  std::vector<double> init_fidelities;
  double incumbent_feasibility_threshold = 0.9;
  std::uint64_t seed = 0;
  ConstraintSpec constraints;
  int num_samples = 200;  // GP function samples per selection round
  InitMode init = InitMode::kAuto;
  int lhs_samples = 4;
  int jobs = 1;
};

struct Observation {
  std::size_t point = 0;
  Measurement value;
};

struct Incumbent {
  std::size_t config = 0;
  double predicted_accuracy = 0.0;
  double feasibility = 0.0;
  bool fallback = false;
};

// State after the initialization (iteration 0) or after one step.
struct RunRecord {
  int iteration = 0;
  double cumulative_cost = 0.0;
  Incumbent incumbent;
  double true_accuracy = 0.0;
  double true_cost = 0.0;
  double constrained_accuracy = 0.0;
  std::optional<std::size_t> selected_point;  // none for iteration 0
  std::size_t num_candidates = 0;             // acquisition evaluations
  double wall_seconds = 0.0;                  // never serialized
};

struct RunTrace {
  std::vector<RunRecord> records;
};

// Cap used for constrained accuracy: the tightest upper bound on cost, or
// +inf without one.
double CostCap(const ConstraintSpec& spec);

// Discrete Latin hypercube: value index floor((perm[j] + U) / n * |values|)
// per parameter. Distinct configs; clashes are redrawn, then replaced by the
// next unused config id.
std::vector<std::size_t> LatinHypercubeConfigs(const SearchSpace& space,
                                               std::size_t n,
                                               std::uint64_t seed);

// Initial sub-sampling levels: `requested` mapped onto the grid, or by
// default the grid entries <= 0.5 (the smallest entry when none is).
// Throws SpecError for rates off the grid or full-fidelity rates on a
// multi-level grid.
std::vector<std::size_t> InitLevels(const SearchSpace& space,
                                    const std::vector<double>& requested);

class Optimizer {
 public:
  // The oracle must outlive the optimizer.
  Optimizer(OptimizerConfig config, const Oracle& oracle);

  // Evaluates the initial design, fits the models and returns record 0.
  RunRecord Initialize();
  // One filter/score/evaluate/refit round; nullopt when nothing is left.
  std::optional<RunRecord> Step();
  // Initialize() followed by up to max_iterations steps.
  RunTrace Run();

  // Snapshot the next Step() would score with.
  AcquisitionContext BuildContext() const;

  // Untested point ids in the searched region, ascending.
  std::vector<std::size_t> Untested() const;
  const std::vector<Observation>& observations() const { return observations_; }
  const Incumbent& incumbent() const { return incumbent_; }
  double cumulative_cost() const { return cumulative_cost_; }
  int iteration() const { return iteration_; }
  const ModelPtr& accuracy_model() const { return accuracy_model_; }
  const ModelPtr& cost_model() const { return cost_model_; }
  const Matrix& point_features() const { return point_features_; }
  const OptimizerConfig& config() const { return config_; }
  // Candidate set D of the last step.
  const std::vector<std::size_t>& last_candidates() const {
    return last_candidates_;
  }

  // Best observed accuracy among observations meeting every constraint at
  // their own measured values; 0 when none does.
  double ObservedIncumbentValue() const;

 private:
  bool Searchable(std::size_t point) const;
  void Record(std::size_t point, const Measurement& m);
  void Refit();
  RunRecord MakeRecord(double wall_seconds) const;
  std::uint64_t Stream(std::uint64_t tag) const;

  OptimizerConfig config_;
  const Oracle& oracle_;
  const SearchSpace& space_;
  bool subsampling_ = true;
  Matrix point_features_;
  Matrix full_features_;  // s = 1 row per config
  std::vector<std::size_t> representer_ids_;

  std::vector<bool> tested_;
  std::vector<Observation> observations_;
  ObservationDataset accuracy_data_;
  ObservationDataset cost_data_;
  ObservationDataset time_data_;
  ModelPtr accuracy_model_;
  ModelPtr cost_model_;
  ModelPtr time_model_;
  Incumbent incumbent_;
  double cumulative_cost_ = 0.0;
  int iteration_ = 0;
  bool initialized_ = false;
  std::optional<std::size_t> last_selected_;
  std::vector<std::size_t> last_candidates_;
};

}  // namespace subtune

#endif  // SUBTUNE_OPTIMIZER_H_
