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

#ifndef SUBTUNE_SETTINGS_H_
#define SUBTUNE_SETTINGS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "subtune/config_space.h"
#include "subtune/harness.h"
#include "subtune/optimizer.h"
#include "subtune/oracle.h"

namespace subtune {

// Overlays the keys of a run document onto `base`. Recognized keys:
//   acquisition, surrogate, filter, beta, max_iterations, seed,
//   init_fidelities, incumbent_threshold, cost_cap, constraints,
//   num_samples, n_trees, min_leaf, tree_fidelity_offset, gp_restarts,
//   gp_max_evaluations,
//   init ("auto" | "subsampled" | "lhs"), lhs_samples
// Unknown keys and ill-typed or out-of-range values throw SpecError.
OptimizerConfig ApplyRunSettings(const nlohmann::json& doc,
                                 OptimizerConfig base);

nlohmann::json LoadJsonFile(const std::string& path);

// "table1" names the built-in space; anything else is a space file.
SearchSpace ResolveSpace(const std::string& ref);

struct OracleSettings {
  std::string kind = "synthetic";  // "synthetic" | "trace"
  std::string trace_path;
  std::string mapping_path;
  SyntheticOptions synthetic;
};

OracleSettings ParseOracleSettings(const nlohmann::json& doc);
std::unique_ptr<Oracle> MakeOracle(const OracleSettings& settings,
                                   const SearchSpace& space);

// Cost cap of a synthetic oracle when none is configured.
std::optional<double> DefaultCostCap(const Oracle& oracle);

struct ExperimentSettings {
  std::string space = "table1";
  OracleSettings oracle;
  std::optional<double> cost_cap;  // default: the oracle's own cap
  std::uint64_t seed = 0;
  int num_seeds = 10;
  OptimizerConfig base;
  // Per-optimizer documents applied on top of `base`; "name" labels rows.
  std::vector<std::pair<std::string, nlohmann::json>> optimizers;
};

// Relative paths inside the document resolve against `base_dir`.
ExperimentSettings ParseExperimentSettings(const nlohmann::json& doc,
                                           const std::string& base_dir);

// Expands settings into a plan over seeds seed, seed + 1, ... A cost cap
// (explicit, else the oracle default) becomes a cost constraint on every
// optimizer that declares none.
ExperimentPlan BuildPlan(const ExperimentSettings& settings,
                         const Oracle& oracle);

}  // namespace subtune

#endif  // SUBTUNE_SETTINGS_H_
