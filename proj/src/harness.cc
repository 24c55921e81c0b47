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

#include "subtune/harness.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "subtune/errors.h"
#include "subtune/parallel.h"

namespace subtune {
namespace {

std::string Percent(std::size_t count, std::size_t total, int digits) {
  const double pct = total == 0 ? 0.0
                                : 100.0 * static_cast<double>(count) /
                                      static_cast<double>(total);
  char buf[32];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), pct, std::chars_format::fixed,
                    digits);
  return std::string(buf, ptr);
}

}  // namespace

FeasibilityReport ComputeFeasibilityReport(const Oracle& oracle,
                                           double cost_cap) {
  const SearchSpace& space = oracle.space();
  FeasibilityReport report;
  report.total = space.num_configs();
  std::vector<Measurement> truth(report.total);
  bool any = false;
  for (std::size_t c = 0; c < report.total; ++c) {
    truth[c] = oracle.Truth(space.PointIndex(c, space.full_level()));
    if (truth[c].cost_usd <= cost_cap) {
      ++report.feasible;
      if (!any || truth[c].accuracy > report.best_feasible_accuracy) {
        report.best_feasible_accuracy = truth[c].accuracy;
        any = true;
      }
    }
  }
  if (!any) return report;
  const double best = report.best_feasible_accuracy;
  for (const Measurement& m : truth) {
    if (m.cost_usd <= cost_cap && best - m.accuracy <= 0.05 * best + 1e-12) {
      ++report.near_optimal;
    }
  }
  return report;
}

std::string FormatFeasibilityReport(const FeasibilityReport& report) {
  return "feasible: " + std::to_string(report.feasible) + " (" +
         Percent(report.feasible, report.total, 1) + "%)\n" +
         "near-optimal: " + std::to_string(report.near_optimal) + " (" +
         Percent(report.near_optimal, report.total, 2) + "%)\n";
}

void WriteResultsCsv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << "\n";
  for (const ResultRow& row : rows) {
    const RunRecord& r = row.record;
    out << row.optimizer << "," << row.seed << "," << r.iteration << ","
        << FormatDouble(r.cumulative_cost) << "," << r.incumbent.config << ","
        << FormatDouble(r.true_accuracy) << "," << FormatDouble(r.true_cost)
        << "," << FormatDouble(r.constrained_accuracy) << ","
        << (r.incumbent.fallback ? 1 : 0) << "\n";
  }
}

void WriteResultsFile(const std::string& path,
                      const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write results file '" + path + "'");
  WriteResultsCsv(out, rows);
}

std::vector<ResultRow> RunExperiment(const ExperimentPlan& plan,
                                     const Oracle& oracle, int jobs) {
  const std::size_t num_seeds = plan.seeds.size();
  const std::size_t num_runs = plan.optimizers.size() * num_seeds;
  std::vector<RunTrace> traces(num_runs);
  const int outer = std::max(1, jobs);
  ParallelFor(num_runs, outer, [&](std::size_t i) {
    OptimizerConfig config = plan.optimizers[i / num_seeds].config;
    config.seed = plan.seeds[i % num_seeds];
    // Nested fan-out would oversubscribe; results do not depend on jobs.
    if (num_runs > 1 && outer > 1) config.jobs = 1;
    Optimizer optimizer(config, oracle);
    traces[i] = optimizer.Run();
  });
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < num_runs; ++i) {
    for (const RunRecord& r : traces[i].records) {
      rows.push_back({plan.optimizers[i / num_seeds].name,
                      plan.seeds[i % num_seeds], r});
    }
  }
  return rows;
}

double CostToReach(const std::vector<RunRecord>& records, double target) {
  for (const RunRecord& r : records) {
    if (r.constrained_accuracy >= target) return r.cumulative_cost;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace subtune
