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

#include "subtune/settings.h"

#include <string>

#include "gtest/gtest.h"
#include "subtune/errors.h"
#include "temp_dir.h"

namespace subtune {
namespace {

using nlohmann::json;

TEST(RunSettingsTest, EveryKeyLandsInTheConfig) {
  const json doc = json::parse(R"({
    "acquisition": "fabolas", "surrogate": "gp", "filter": "random",
    "beta": 0.2, "max_iterations": 12, "seed": 9,
    "init_fidelities": [0.1, 0.25], "incumbent_threshold": 0.8,
    "constraints": [{"role": "time", "direction": ">=", "threshold": 5}],
    "num_samples": 64, "n_trees": 8, "min_leaf": 3,
    "tree_fidelity_offset": false, "gp_restarts": 2,
    "gp_max_evaluations": 50, "init": "lhs", "lhs_samples": 6
  })");
  const OptimizerConfig c = ApplyRunSettings(doc, {});
  EXPECT_EQ(c.acquisition, AcquisitionKind::kFabolas);
  EXPECT_EQ(c.surrogate.kind, SurrogateKind::kGp);
  EXPECT_EQ(c.filter.kind, FilterKind::kRandom);
  EXPECT_EQ(c.filter.beta, 0.2);
  EXPECT_EQ(c.max_iterations, 12);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.init_fidelities, (std::vector<double>{0.1, 0.25}));
  EXPECT_EQ(c.incumbent_feasibility_threshold, 0.8);
  ASSERT_EQ(c.constraints.constraints.size(), 1u);
  EXPECT_EQ(c.constraints.constraints[0].role, "time");
  EXPECT_EQ(c.constraints.constraints[0].direction,
            ConstraintDirection::kAtLeast);
  EXPECT_EQ(c.constraints.constraints[0].threshold, 5.0);
  EXPECT_EQ(c.num_samples, 64);
  EXPECT_EQ(c.surrogate.n_trees, 8);
  EXPECT_EQ(c.surrogate.min_leaf, 3);
  EXPECT_FALSE(c.surrogate.tree_fidelity_offset);
  EXPECT_EQ(c.surrogate.gp_restarts, 2);
  EXPECT_EQ(c.surrogate.gp_max_evaluations, 50);
  EXPECT_EQ(c.init, InitMode::kLatinHypercube);
  EXPECT_EQ(c.lhs_samples, 6);
}

TEST(RunSettingsTest, CostCapBecomesAConstraint) {
  const OptimizerConfig c =
      ApplyRunSettings(json::parse(R"({"cost_cap": 0.02})"), {});
  ASSERT_EQ(c.constraints.constraints.size(), 1u);
  EXPECT_EQ(c.constraints.constraints[0].role, "cost");
  EXPECT_EQ(c.constraints.constraints[0].direction,
            ConstraintDirection::kAtMost);
  EXPECT_EQ(c.constraints.constraints[0].threshold, 0.02);
}

TEST(RunSettingsTest, UntouchedKeysKeepTheBase) {
  OptimizerConfig base;
  base.max_iterations = 3;
  base.seed = 77;
  const OptimizerConfig c =
      ApplyRunSettings(json::parse(R"({"beta": 0.5})"), base);
  EXPECT_EQ(c.max_iterations, 3);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.filter.beta, 0.5);
}

TEST(RunSettingsTest, BadDocumentsAreRejected) {
  EXPECT_THROW(ApplyRunSettings(json::parse(R"({"speed": 1})"), {}), SpecError);
  EXPECT_THROW(ApplyRunSettings(json::parse(R"({"beta": "high"})"), {}),
               SpecError);
  EXPECT_THROW(ApplyRunSettings(json::parse(R"({"n_trees": 0})"), {}),
               SpecError);
  EXPECT_THROW(ApplyRunSettings(json::parse(R"({"init": "sobol"})"), {}),
               SpecError);
  EXPECT_THROW(
      ApplyRunSettings(
          json::parse(R"({"constraints": [{"role": "cost", "direction": "<"}]})"),
          {}),
      SpecError);
  EXPECT_THROW(ApplyRunSettings(json::parse("[]"), {}), SpecError);
  EXPECT_THROW(ApplyRunSettings(json::parse(R"({"acquisition": "ucb"})"), {}),
               Error);
}

TEST(OracleSettingsTest, ParsesBothKinds) {
  const OracleSettings syn = ParseOracleSettings(json::parse(
      R"({"kind": "synthetic", "seed": 4, "noise_std": 0.0,
          "near_optimal_target": 0.2, "feasible_quantile": 0.5})"));
  EXPECT_EQ(syn.synthetic.seed, 4u);
  EXPECT_EQ(syn.synthetic.noise_std, 0.0);
  EXPECT_EQ(syn.synthetic.near_optimal_target, 0.2);
  EXPECT_EQ(syn.synthetic.feasible_quantile, 0.5);
  EXPECT_THROW(ParseOracleSettings(json::parse(R"({"kind": "trace"})")),
               SpecError);
  EXPECT_THROW(ParseOracleSettings(json::parse(R"({"kind": "live"})")),
               SpecError);
}

TEST(ExperimentSettingsTest, BundledExampleParses) {
  const std::string dir = std::string(SUBTUNE_SOURCE_DIR) + "/data";
  const ExperimentSettings s = ParseExperimentSettings(
      LoadJsonFile(dir + "/example_experiment.json"), dir);
  EXPECT_EQ(s.space, "table1");
  EXPECT_EQ(s.num_seeds, 10);
  ASSERT_EQ(s.optimizers.size(), 2u);
  const SearchSpace space = ResolveSpace(s.space);
  const auto oracle = MakeOracle(s.oracle, space);
  const ExperimentPlan plan = BuildPlan(s, *oracle);
  ASSERT_EQ(plan.optimizers.size(), 2u);
  EXPECT_EQ(plan.optimizers[0].name, "trimtuner");
  EXPECT_EQ(plan.optimizers[0].config.acquisition, AcquisitionKind::kTrimTuner);
  EXPECT_EQ(plan.optimizers[1].config.filter.kind, FilterKind::kNone);
  EXPECT_EQ(plan.optimizers[1].config.max_iterations, 44);
  for (const auto& named : plan.optimizers) {
    ASSERT_EQ(named.config.constraints.constraints.size(), 1u);
    EXPECT_EQ(named.config.constraints.constraints[0].threshold,
              *DefaultCostCap(*oracle));
  }
  EXPECT_EQ(plan.seeds.size(), 10u);
  EXPECT_EQ(plan.seeds[3], 3u);

  const OptimizerConfig run = ApplyRunSettings(
      LoadJsonFile(dir + "/example_run.json"), OptimizerConfig{});
  EXPECT_EQ(run.acquisition, AcquisitionKind::kTrimTuner);
}

TEST(ExperimentSettingsTest, RelativePathsResolveAgainstTheDocument) {
  testing::TempDir dir("settings");
  const ExperimentSettings s = ParseExperimentSettings(
      json::parse(R"({"space": "space.json",
                      "oracle": {"kind": "trace", "trace": "t.csv"},
                      "cost_cap": 0.5,
                      "optimizers": [{"name": "r", "acquisition": "random"}]})"),
      dir.path());
  EXPECT_EQ(s.space, dir.file("space.json"));
  EXPECT_EQ(s.oracle.trace_path, dir.file("t.csv"));
  EXPECT_EQ(*s.cost_cap, 0.5);
}

TEST(ExperimentSettingsTest, ErrorsSurfaceBeforeRuns) {
  EXPECT_THROW(ParseExperimentSettings(json::parse(R"({"optimizers": []})"), ""),
               SpecError);
  EXPECT_THROW(ParseExperimentSettings(json::parse(R"({"seeds": 2})"), ""),
               SpecError);
  EXPECT_THROW(
      ParseExperimentSettings(
          json::parse(R"({"optimizers": [{"acquisition": "ei"}]})"), ""),
      SpecError);
  EXPECT_THROW(ParseExperimentSettings(
                   json::parse(R"({"optimizers": [{"name": "a", "beta": 2}]})"),
                   ""),
               Error);
  EXPECT_THROW(ParseExperimentSettings(
                   json::parse(R"({"optimizers": [{"name": "a"}], "x": 1})"),
                   ""),
               SpecError);
  EXPECT_THROW(LoadJsonFile("/nonexistent.json"), LoadError);
}

TEST(ExperimentSettingsTest, ExplicitConstraintsAreKept) {
  const ExperimentSettings s = ParseExperimentSettings(
      json::parse(R"({"cost_cap": 0.5, "optimizers": [
          {"name": "a", "cost_cap": 0.1}, {"name": "b"}]})"),
      "");
  const SyntheticBenchmark oracle = SyntheticBenchmark::Generate(
      SearchSpace::Create({ParameterDef::Categorical("x", {"p", "q"})}, {1.0}),
      {});
  const ExperimentPlan plan = BuildPlan(s, oracle);
  EXPECT_EQ(plan.optimizers[0].config.constraints.constraints[0].threshold, 0.1);
  EXPECT_EQ(plan.optimizers[1].config.constraints.constraints[0].threshold, 0.5);
}

}  // namespace
}  // namespace subtune
