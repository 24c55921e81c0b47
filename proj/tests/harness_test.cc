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

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace subtune {
namespace {

SearchSpace ThirtyConfigSpace() {
  return SearchSpace::Create(
      {ParameterDef::Categorical("vm", {"a", "b", "c"}),
       ParameterDef::Ordinal("workers", {1, 2, 4, 8, 16}),
       ParameterDef::Categorical("mode", {"sync", "async"})},
      {0.25, 0.5, 1.0});
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

TEST(FeasibilityReportTest, DefaultSyntheticInstance) {
  const SyntheticBenchmark bench =
      SyntheticBenchmark::Generate(CloudTrainingSpace(), {});
  const FeasibilityReport report =
      ComputeFeasibilityReport(bench, bench.default_cost_cap());
  EXPECT_EQ(report.total, 288u);
  // Independent scan.
  std::size_t feasible = 0;
  double best = -1.0;
  for (std::size_t c = 0; c < 288; ++c) {
    const Measurement m = bench.Truth(bench.space().PointIndex(c, 4));
    if (m.cost_usd <= bench.default_cost_cap()) {
      ++feasible;
      best = std::max(best, m.accuracy);
    }
  }
  std::size_t near = 0;
  for (std::size_t c = 0; c < 288; ++c) {
    const Measurement m = bench.Truth(bench.space().PointIndex(c, 4));
    if (m.cost_usd <= bench.default_cost_cap() &&
        m.accuracy >= best * 0.95 - 1e-12) {
      ++near;
    }
  }
  EXPECT_EQ(report.feasible, feasible);
  EXPECT_EQ(report.near_optimal, near);
  EXPECT_EQ(report.best_feasible_accuracy, best);
  EXPECT_EQ(FormatFeasibilityReport(report),
            "feasible: " + std::to_string(feasible) + " (60.1%)\n" +
                "near-optimal: " + std::to_string(near) + " (12.50%)\n");
}

TEST(FeasibilityReportTest, InfiniteCapCountsEverything) {
  const SyntheticBenchmark bench =
      SyntheticBenchmark::Generate(ThirtyConfigSpace(), {.seed = 2});
  const FeasibilityReport report = ComputeFeasibilityReport(bench, INFINITY);
  EXPECT_EQ(report.total, 30u);
  EXPECT_EQ(report.feasible, 30u);
  EXPECT_GE(report.near_optimal, 1u);
}

TEST(FeasibilityReportTest, InvariantToTraceRowOrder) {
  const SyntheticBenchmark bench =
      SyntheticBenchmark::Generate(ThirtyConfigSpace(), {.seed = 5});
  std::ostringstream text;
  bench.ToTraceTable(3, 1).Write(text);
  std::istringstream in(text.str());
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  std::string shuffled = header + "\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    shuffled += lines[(i * 37) % lines.size()] + "\n";
  }
  ASSERT_EQ(lines.size() % 37 != 0, true);
  std::istringstream a(text.str()), b(shuffled);
  const TraceTable ta = TraceTable::Parse(a, ThirtyConfigSpace());
  const TraceTable tb = TraceTable::Parse(b, ThirtyConfigSpace());
  for (double cap : {0.001, bench.default_cost_cap(), 1.0}) {
    const FeasibilityReport ra = ComputeFeasibilityReport(ta, cap);
    const FeasibilityReport rb = ComputeFeasibilityReport(tb, cap);
    EXPECT_EQ(ra.feasible, rb.feasible);
    EXPECT_EQ(ra.near_optimal, rb.near_optimal);
  }
}

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bench_ = new SyntheticBenchmark(
        SyntheticBenchmark::Generate(ThirtyConfigSpace(), {.seed = 1}));
    ExperimentPlan plan;
    for (auto kind : {AcquisitionKind::kTrimTuner, AcquisitionKind::kEic}) {
      NamedOptimizer named;
      named.name = AcquisitionName(kind);
      named.config.acquisition = kind;
      named.config.max_iterations = 20;
      named.config.constraints.constraints = {
          {"cost", ConstraintDirection::kAtMost, bench_->default_cost_cap()}};
      if (kind == AcquisitionKind::kEic) {
        named.config.filter = {FilterKind::kNone, 1.0};
      }
      plan.optimizers.push_back(named);
    }
    for (std::uint64_t s = 0; s < 10; ++s) plan.seeds.push_back(100 + s);
    plan_ = new ExperimentPlan(plan);
    rows_ = new std::vector<ResultRow>(RunExperiment(plan, *bench_, 1));
  }
  static void TearDownTestSuite() {
    delete rows_;
    delete plan_;
    delete bench_;
  }

  static SyntheticBenchmark* bench_;
  static ExperimentPlan* plan_;
  static std::vector<ResultRow>* rows_;
};

SyntheticBenchmark* ExperimentTest::bench_ = nullptr;
ExperimentPlan* ExperimentTest::plan_ = nullptr;
std::vector<ResultRow>* ExperimentTest::rows_ = nullptr;

TEST_F(ExperimentTest, OneRowPerOptimizerSeedIteration) {
  // 30 full-fidelity configs minus 4 LHS points leaves room for 20 steps.
  ASSERT_EQ(rows_->size(), 2u * 10u * 21u);
  std::size_t i = 0;
  for (const auto& named : plan_->optimizers) {
    for (std::uint64_t seed : plan_->seeds) {
      for (int it = 0; it <= 20; ++it, ++i) {
        EXPECT_EQ((*rows_)[i].optimizer, named.name);
        EXPECT_EQ((*rows_)[i].seed, seed);
        EXPECT_EQ((*rows_)[i].record.iteration, it);
      }
    }
  }
}

TEST_F(ExperimentTest, CsvAggregationMatchesIndependentRecompute) {
  std::ostringstream csv;
  WriteResultsCsv(csv, *rows_);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kResultsHeader);
  std::map<std::pair<std::string, int>, std::vector<double>> parsed;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto cells = SplitLine(line);
    ASSERT_EQ(cells.size(), 9u);
    parsed[{cells[0], std::stoi(cells[2])}].push_back(std::stod(cells[7]));
    ++count;
  }
  EXPECT_EQ(count, rows_->size());
  std::map<std::pair<std::string, int>, std::vector<double>> direct;
  for (const ResultRow& r : *rows_) {
    direct[{r.optimizer, r.record.iteration}].push_back(
        r.record.constrained_accuracy);
  }
  ASSERT_EQ(parsed.size(), direct.size());
  for (const auto& [key, values] : direct) {
    double a = 0, b = 0;
    for (double v : values) a += v;
    for (double v : parsed[key]) b += v;
    EXPECT_NEAR(a / values.size(), b / parsed[key].size(), 1e-12);
  }
}

TEST_F(ExperimentTest, ParallelRunsGiveIdenticalCsv) {
  std::ostringstream serial, parallel;
  WriteResultsCsv(serial, *rows_);
  WriteResultsCsv(parallel, RunExperiment(*plan_, *bench_, 4));
  EXPECT_EQ(serial.str(), parallel.str());
}

TEST(CostToReachTest, FirstCrossing) {
  std::vector<RunRecord> records(4);
  const double acc[] = {0.5, 0.8, 0.7, 0.9};
  for (int i = 0; i < 4; ++i) {
    records[i].cumulative_cost = 0.1 * (i + 1);
    records[i].constrained_accuracy = acc[i];
  }
  EXPECT_EQ(CostToReach(records, 0.75), records[1].cumulative_cost);
  EXPECT_EQ(CostToReach(records, 0.5), records[0].cumulative_cost);
  EXPECT_TRUE(std::isinf(CostToReach(records, 0.95)));
}

TEST(ResultsCsvTest, FormatsOneRow) {
  ResultRow row;
  row.optimizer = "trimtuner";
  row.seed = 3;
  row.record.iteration = 2;
  row.record.cumulative_cost = 0.125;
  row.record.incumbent.config = 17;
  row.record.incumbent.fallback = true;
  row.record.true_accuracy = 0.9;
  row.record.true_cost = 0.04;
  row.record.constrained_accuracy = 0.45;
  std::ostringstream out;
  WriteResultsCsv(out, {row});
  EXPECT_EQ(out.str(), std::string(kResultsHeader) +
                           "\ntrimtuner,3,2,0.125,17,0.9,0.04,0.45,1\n");
}

}  // namespace
}  // namespace subtune
