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

#include "subtune/optimizer.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "subtune/errors.h"

namespace subtune {
namespace {

SearchSpace ThirtyConfigSpace() {
  return SearchSpace::Create(
      {ParameterDef::Categorical("vm", {"a", "b", "c"}),
       ParameterDef::Ordinal("workers", {1, 2, 4, 8, 16}),
       ParameterDef::Categorical("mode", {"sync", "async"})},
      {0.25, 0.5, 1.0});
}

const SyntheticBenchmark& Bench() {
  static const SyntheticBenchmark bench =
      SyntheticBenchmark::Generate(ThirtyConfigSpace(), {.seed = 3});
  return bench;
}

OptimizerConfig BaseConfig(AcquisitionKind kind, std::uint64_t seed = 0) {
  OptimizerConfig c;
  c.acquisition = kind;
  c.seed = seed;
  c.max_iterations = 8;
  c.constraints.constraints = {
      {"cost", ConstraintDirection::kAtMost, Bench().default_cost_cap()}};
  return c;
}

bool SameRecord(const RunRecord& a, const RunRecord& b) {
  return a.iteration == b.iteration && a.cumulative_cost == b.cumulative_cost &&
         a.incumbent.config == b.incumbent.config &&
         a.incumbent.predicted_accuracy == b.incumbent.predicted_accuracy &&
         a.incumbent.feasibility == b.incumbent.feasibility &&
         a.constrained_accuracy == b.constrained_accuracy &&
         a.selected_point == b.selected_point &&
         a.num_candidates == b.num_candidates;
}

TEST(CostCapTest, TightestUpperBound) {
  ConstraintSpec spec;
  EXPECT_TRUE(std::isinf(CostCap(spec)));
  spec.constraints = {{"cost", ConstraintDirection::kAtMost, 0.5},
                      {"time", ConstraintDirection::kAtMost, 0.1},
                      {"cost", ConstraintDirection::kAtMost, 0.2}};
  EXPECT_EQ(CostCap(spec), 0.2);
}

TEST(InitLevelsTest, DefaultsAndValidation) {
  const SearchSpace cloud = CloudTrainingSpace();
  EXPECT_EQ(InitLevels(cloud, {}), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(InitLevels(cloud, {0.5, 0.1}), (std::vector<std::size_t>{1, 3}));
  EXPECT_THROW(InitLevels(cloud, {0.3}), SpecError);
  EXPECT_THROW(InitLevels(cloud, {1.0}), SpecError);
  const SearchSpace single = SearchSpace::Create(
      {ParameterDef::Categorical("a", {"x", "y"})}, {1.0});
  EXPECT_EQ(InitLevels(single, {}), std::vector<std::size_t>{0});
}

TEST(LatinHypercubeTest, DistinctAndStratified) {
  const SearchSpace space = ThirtyConfigSpace();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto configs = LatinHypercubeConfigs(space, 4, seed);
    ASSERT_EQ(configs.size(), 4u);
    EXPECT_EQ(std::set<std::size_t>(configs.begin(), configs.end()).size(), 4u);
    EXPECT_EQ(configs, LatinHypercubeConfigs(space, 4, seed));
    for (std::size_t c : configs) EXPECT_LT(c, 30u);
  }
  EXPECT_EQ(LatinHypercubeConfigs(space, 100, 1).size(), 30u);
}

TEST(OptimizerTest, SubsampledInitChargesLargestLevel) {
  const SyntheticBenchmark bench =
      SyntheticBenchmark::Generate(CloudTrainingSpace(), {});
  OptimizerConfig config;
  config.constraints.constraints = {
      {"cost", ConstraintDirection::kAtMost, bench.default_cost_cap()}};
  Optimizer opt(config, bench);
  const RunRecord record = opt.Initialize();
  const auto& obs = opt.observations();
  ASSERT_EQ(obs.size(), 4u);
  const SearchSpace& space = bench.space();
  const std::size_t config_id = space.ConfigOfPoint(obs[0].point);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(space.ConfigOfPoint(obs[i].point), config_id);
    EXPECT_EQ(space.LevelOfPoint(obs[i].point), i);
  }
  EXPECT_EQ(space.fidelity_grid()[space.LevelOfPoint(obs[3].point)], 0.5);
  EXPECT_EQ(record.cumulative_cost, obs[3].value.cost_usd);
  EXPECT_EQ(record.iteration, 0);
  EXPECT_FALSE(record.selected_point.has_value());
}

TEST(OptimizerTest, SingleLevelGridInitializesAtFullFidelity) {
  const SearchSpace space = SearchSpace::Create(
      {ParameterDef::Categorical("a", {"x", "y", "z"}),
       ParameterDef::Ordinal("b", {1, 2})},
      {1.0});
  const SyntheticBenchmark bench = SyntheticBenchmark::Generate(space, {});
  OptimizerConfig config;
  Optimizer opt(config, bench);
  const RunRecord r = opt.Initialize();
  ASSERT_EQ(opt.observations().size(), 1u);
  EXPECT_EQ(r.cumulative_cost, opt.observations()[0].value.cost_usd);
}

TEST(OptimizerTest, LatinHypercubeInitForFullFidelityBaselines) {
  Optimizer opt(BaseConfig(AcquisitionKind::kEic), Bench());
  const RunRecord r = opt.Initialize();
  const auto& obs = opt.observations();
  ASSERT_EQ(obs.size(), 4u);
  double total = 0.0;
  for (const auto& o : obs) {
    EXPECT_EQ(Bench().space().LevelOfPoint(o.point), 2u);
    total += o.value.cost_usd;
  }
  EXPECT_NEAR(r.cumulative_cost, total, 1e-15);
  // Only the s = 1 slice is searched afterwards.
  for (std::size_t p : opt.Untested()) {
    EXPECT_EQ(Bench().space().LevelOfPoint(p), 2u);
  }
  EXPECT_EQ(opt.Untested().size(), 26u);
}

// With no filtering, the step must pick the brute-force argmax of the score
// over every untested point, ties to the lowest id.
void ExpectBruteForceArgmax(AcquisitionKind kind, SurrogateKind surrogate) {
  OptimizerConfig config = BaseConfig(kind, 5);
  config.filter = {FilterKind::kNone, 1.0};
  config.surrogate.kind = surrogate;
  config.surrogate.gp_restarts = 2;
  config.num_samples = 50;
  Optimizer opt(config, Bench());
  opt.Initialize();
  for (int step = 0; step < 3; ++step) {
    const AcquisitionContext ctx = opt.BuildContext();
    const auto untested = opt.Untested();
    std::size_t best = untested[0];
    double best_score = -1.0;
    for (std::size_t p : untested) {
      const double s = Score(kind, ctx, opt.point_features().row(p));
      if (s > best_score) {
        best_score = s;
        best = p;
      }
    }
    const auto record = opt.Step();
    ASSERT_TRUE(record.has_value());
    EXPECT_EQ(record->selected_point, best) << AcquisitionName(kind);
    EXPECT_EQ(opt.last_candidates().size(), untested.size());
  }
}

TEST(OptimizerTest, UnfilteredStepIsBruteForceArgmax) {
  ExpectBruteForceArgmax(AcquisitionKind::kTrimTuner, SurrogateKind::kTrees);
  ExpectBruteForceArgmax(AcquisitionKind::kEic, SurrogateKind::kTrees);
  ExpectBruteForceArgmax(AcquisitionKind::kEicPerCost, SurrogateKind::kTrees);
  ExpectBruteForceArgmax(AcquisitionKind::kTrimTuner, SurrogateKind::kGp);
}

TEST(OptimizerTest, CeaFilterScoresTenPercent) {
  Optimizer opt(BaseConfig(AcquisitionKind::kTrimTuner, 2), Bench());
  opt.Initialize();
  for (int step = 0; step < 4; ++step) {
    const std::size_t untested = opt.Untested().size();
    const auto record = opt.Step();
    ASSERT_TRUE(record.has_value());
    EXPECT_EQ(record->num_candidates,
              static_cast<std::size_t>(std::ceil(0.1 * untested)));
    const auto& d = opt.last_candidates();
    EXPECT_NE(std::find(d.begin(), d.end(), *record->selected_point), d.end());
  }
}

TEST(OptimizerTest, SingleCandidateIsChosen) {
  const SearchSpace space = SearchSpace::Create(
      {ParameterDef::Categorical("a", {"x", "y"})}, {0.5, 1.0});
  const SyntheticBenchmark bench = SyntheticBenchmark::Generate(space, {});
  OptimizerConfig config;
  config.max_iterations = 10;
  Optimizer opt(config, bench);
  opt.Initialize();  // one point
  opt.Step();        // random pick while fewer than 2 observations
  opt.Step();
  ASSERT_EQ(opt.Untested().size(), 1u);
  const std::size_t last = opt.Untested()[0];
  const auto record = opt.Step();
  ASSERT_TRUE(record.has_value());
  EXPECT_EQ(record->selected_point, last);
  EXPECT_FALSE(opt.Step().has_value());
}

TEST(OptimizerTest, CostBookkeepingAndExhaustion) {
  const SearchSpace space = SearchSpace::Create(
      {ParameterDef::Categorical("a", {"x", "y", "z"})}, {0.5, 1.0});
  const SyntheticBenchmark bench = SyntheticBenchmark::Generate(space, {});
  OptimizerConfig config;
  config.max_iterations = 100;
  Optimizer opt(config, bench);
  const RunTrace trace = opt.Run();
  // Init evaluates one point; the remaining five follow one per step.
  ASSERT_EQ(trace.records.size(), 6u);
  const auto& obs = opt.observations();
  ASSERT_EQ(obs.size(), 6u);
  std::set<std::size_t> unique;
  for (const auto& o : obs) unique.insert(o.point);
  EXPECT_EQ(unique.size(), 6u);
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    EXPECT_EQ(trace.records[i].iteration, static_cast<int>(i));
    EXPECT_EQ(trace.records[i].selected_point, obs[i].point);
    EXPECT_DOUBLE_EQ(trace.records[i].cumulative_cost -
                         trace.records[i - 1].cumulative_cost,
                     obs[i].value.cost_usd);
  }
}

TEST(OptimizerTest, ZeroIterationsGiveOnlyTheInitRecord) {
  OptimizerConfig config = BaseConfig(AcquisitionKind::kTrimTuner);
  config.max_iterations = 0;
  Optimizer opt(config, Bench());
  EXPECT_EQ(opt.Run().records.size(), 1u);
}

TEST(OptimizerTest, RunsAreDeterministicInSeed) {
  for (auto kind : {AcquisitionKind::kTrimTuner, AcquisitionKind::kEic,
                    AcquisitionKind::kRandom}) {
    Optimizer a(BaseConfig(kind, 7), Bench());
    Optimizer b(BaseConfig(kind, 7), Bench());
    const RunTrace ta = a.Run();
    const RunTrace tb = b.Run();
    ASSERT_EQ(ta.records.size(), tb.records.size());
    for (std::size_t i = 0; i < ta.records.size(); ++i) {
      EXPECT_TRUE(SameRecord(ta.records[i], tb.records[i]));
    }
    Optimizer c(BaseConfig(kind, 8), Bench());
    const RunTrace tc = c.Run();
    bool differs = false;
    for (std::size_t i = 0; i < tc.records.size(); ++i) {
      differs |= !SameRecord(ta.records[i], tc.records[i]);
    }
    EXPECT_TRUE(differs) << AcquisitionName(kind);
  }
}

TEST(OptimizerTest, ParallelScoringMatchesSerial) {
  OptimizerConfig serial = BaseConfig(AcquisitionKind::kTrimTuner, 4);
  OptimizerConfig parallel = serial;
  parallel.jobs = 3;
  Optimizer a(serial, Bench());
  Optimizer b(parallel, Bench());
  const RunTrace ta = a.Run();
  const RunTrace tb = b.Run();
  ASSERT_EQ(ta.records.size(), tb.records.size());
  for (std::size_t i = 0; i < ta.records.size(); ++i) {
    EXPECT_TRUE(SameRecord(ta.records[i], tb.records[i]));
  }
}

TEST(OptimizerTest, IncumbentIsTheBruteForceChoice) {
  Optimizer opt(BaseConfig(AcquisitionKind::kTrimTuner, 1), Bench());
  opt.Initialize();
  const SearchSpace& space = Bench().space();
  const Constraint& cap = opt.config().constraints.constraints[0];
  for (int step = 0; step < 6; ++step) {
    ASSERT_TRUE(opt.Step().has_value());
    std::vector<double> acc, feas;
    for (std::size_t c = 0; c < space.num_configs(); ++c) {
      const auto z = opt.point_features().row(space.PointIndex(c, 2));
      acc.push_back(opt.accuracy_model()->PredictLatent(z).mean);
      feas.push_back(FeasibilityProb(*opt.cost_model(), cap, z));
    }
    std::size_t expected = space.num_configs();
    for (std::size_t c = 0; c < acc.size(); ++c) {
      if (feas[c] >= 0.9 && (expected == space.num_configs() ||
                             acc[c] > acc[expected])) {
        expected = c;
      }
    }
    if (expected == space.num_configs()) {
      EXPECT_TRUE(opt.incumbent().fallback);
    } else {
      EXPECT_EQ(opt.incumbent().config, expected);
      EXPECT_FALSE(opt.incumbent().fallback);
    }
  }
}

TEST(OptimizerTest, RecordsScoreTheIncumbentWithGroundTruth) {
  Optimizer opt(BaseConfig(AcquisitionKind::kEic, 2), Bench());
  const RunTrace trace = opt.Run();
  const double cap = Bench().default_cost_cap();
  for (const RunRecord& r : trace.records) {
    const Measurement t = Bench().Truth(Bench().space().PointIndex(
        r.incumbent.config, Bench().space().full_level()));
    EXPECT_EQ(r.true_accuracy, t.accuracy);
    EXPECT_EQ(r.true_cost, t.cost_usd);
    EXPECT_EQ(r.constrained_accuracy,
              ConstrainedAccuracy(t.accuracy, t.cost_usd, cap));
  }
}

TEST(OptimizerTest, TimeConstraintFitsItsOwnModel) {
  OptimizerConfig config = BaseConfig(AcquisitionKind::kTrimTuner, 3);
  config.constraints.constraints.push_back(
      {"time", ConstraintDirection::kAtMost,
       Bench().default_cost_cap() * SyntheticBenchmark::kSecondsPerUsd});
  Optimizer opt(config, Bench());
  opt.Initialize();
  const AcquisitionContext ctx = opt.BuildContext();
  ASSERT_EQ(ctx.constraint_models.size(), 2u);
  EXPECT_EQ(ctx.constraint_models[0], opt.cost_model());
  EXPECT_NE(ctx.constraint_models[1], opt.cost_model());
  EXPECT_TRUE(opt.Step().has_value());
}

TEST(OptimizerTest, InvalidConfigurationsAreRejected) {
  OptimizerConfig c = BaseConfig(AcquisitionKind::kTrimTuner);
  c.constraints.constraints[0].role = "memory";
  EXPECT_THROW(Optimizer(c, Bench()), SpecError);
  c = BaseConfig(AcquisitionKind::kTrimTuner);
  c.constraints.constraints[0].threshold = -1.0;
  EXPECT_THROW(Optimizer(c, Bench()), SpecError);
  c = BaseConfig(AcquisitionKind::kTrimTuner);
  c.filter.beta = 0.0;
  EXPECT_THROW(Optimizer(c, Bench()), SpecError);
  c = BaseConfig(AcquisitionKind::kTrimTuner);
  c.max_iterations = -1;
  EXPECT_THROW(Optimizer(c, Bench()), SpecError);
  c = BaseConfig(AcquisitionKind::kTrimTuner);
  Optimizer opt(c, Bench());
  EXPECT_THROW(opt.Step(), UsageError);
  opt.Initialize();
  EXPECT_THROW(opt.Initialize(), UsageError);
}

}  // namespace
}  // namespace subtune
