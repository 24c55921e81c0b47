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

#ifndef SUBTUNE_HARNESS_H_
#define SUBTUNE_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "subtune/optimizer.h"
#include "subtune/oracle.h"

namespace subtune {

struct FeasibilityReport {
  std::size_t total = 0;         // full-fidelity configurations
  std::size_t feasible = 0;      // mean cost <= cap
  std::size_t near_optimal = 0;  // feasible, within 5% of best feasible
  double best_feasible_accuracy = 0.0;
};

// Scan of the full-fidelity slice using ground-truth (replicate mean)
// measurements.
FeasibilityReport ComputeFeasibilityReport(const Oracle& oracle,
                                           double cost_cap);
// "feasible: N (p%)" and "near-optimal: N (p%)" lines.
std::string FormatFeasibilityReport(const FeasibilityReport& report);

inline constexpr const char* kResultsHeader =
    "optimizer,seed,iteration,cumulative_cost_usd,incumbent_id,"
    "incumbent_accuracy,incumbent_cost_usd,constrained_accuracy,fallback_flag";

struct ResultRow {
  std::string optimizer;
  std::uint64_t seed = 0;
  RunRecord record;
};

void WriteResultsCsv(std::ostream& out, const std::vector<ResultRow>& rows);
void WriteResultsFile(const std::string& path,
                      const std::vector<ResultRow>& rows);

struct NamedOptimizer {
  std::string name;
  OptimizerConfig config;  // config.seed is replaced per run
};

struct ExperimentPlan {
  std::vector<NamedOptimizer> optimizers;
  std::vector<std::uint64_t> seeds;
};

// Runs every (optimizer, seed) pair, `jobs` runs at a time. Rows are
// ordered by optimizer, then seed, then iteration, independent of `jobs`.
std::vector<ResultRow> RunExperiment(const ExperimentPlan& plan,
                                     const Oracle& oracle, int jobs);

// Cumulative cost at the first record whose constrained accuracy reaches
// `target`; +inf when none does.
double CostToReach(const std::vector<RunRecord>& records, double target);

}  // namespace subtune

#endif  // SUBTUNE_HARNESS_H_
