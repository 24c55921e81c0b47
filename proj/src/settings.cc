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

#include <filesystem>
#include <fstream>
#include <limits>

#include "subtune/errors.h"

namespace subtune {
namespace {

using nlohmann::json;

template <typename T>
T Get(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw SpecError("setting '" + key + "' has the wrong type");
  }
}

Constraint ParseConstraint(const json& doc) {
  if (!doc.is_object()) throw SpecError("constraint must be an object");
  Constraint c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "role") {
      c.role = Get<std::string>(doc, key);
    } else if (key == "direction") {
      const std::string d = Get<std::string>(doc, key);
      if (d == "<=") {
        c.direction = ConstraintDirection::kAtMost;
      } else if (d == ">=") {
        c.direction = ConstraintDirection::kAtLeast;
      } else {
        throw SpecError("constraint direction must be \"<=\" or \">=\"");
      }
    } else if (key == "threshold") {
      c.threshold = Get<double>(doc, key);
    } else {
      throw SpecError("unknown constraint key '" + key + "'");
    }
  }
  return c;
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

OptimizerConfig ApplyRunSettings(const json& doc, OptimizerConfig base) {
  if (!doc.is_object()) throw SpecError("run settings must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "acquisition") {
      base.acquisition = ParseAcquisition(Get<std::string>(doc, key));
    } else if (key == "surrogate") {
      base.surrogate.kind = ParseSurrogateKind(Get<std::string>(doc, key));
    } else if (key == "filter") {
      base.filter.kind = ParseFilterKind(Get<std::string>(doc, key));
    } else if (key == "beta") {
      base.filter.beta = Get<double>(doc, key);
    } else if (key == "max_iterations") {
      base.max_iterations = Get<int>(doc, key);
    } else if (key == "seed") {
      base.seed = Get<std::uint64_t>(doc, key);
    } else if (key == "init_fidelities") {
      base.init_fidelities = Get<std::vector<double>>(doc, key);
    } else if (key == "incumbent_threshold") {
      base.incumbent_feasibility_threshold = Get<double>(doc, key);
    } else if (key == "cost_cap") {
      base.constraints.constraints = {
          {"cost", ConstraintDirection::kAtMost, Get<double>(doc, key)}};
    } else if (key == "constraints") {
      if (!value.is_array()) throw SpecError("constraints must be a list");
      base.constraints.constraints.clear();
      for (const json& c : value) {
        base.constraints.constraints.push_back(ParseConstraint(c));
      }
    } else if (key == "num_samples") {
      base.num_samples = Get<int>(doc, key);
    } else if (key == "n_trees") {
      base.surrogate.n_trees = Get<int>(doc, key);
    } else if (key == "min_leaf") {
      base.surrogate.min_leaf = Get<int>(doc, key);
    } else if (key == "tree_fidelity_offset") {
      base.surrogate.tree_fidelity_offset = Get<bool>(doc, key);
    } else if (key == "gp_restarts") {
      base.surrogate.gp_restarts = Get<int>(doc, key);
    } else if (key == "gp_max_evaluations") {
      base.surrogate.gp_max_evaluations = Get<int>(doc, key);
    } else if (key == "init") {
      const std::string mode = Get<std::string>(doc, key);
      if (mode == "auto") {
        base.init = InitMode::kAuto;
      } else if (mode == "subsampled") {
        base.init = InitMode::kSubsampled;
      } else if (mode == "lhs") {
        base.init = InitMode::kLatinHypercube;
      } else {
        throw SpecError("init must be auto, subsampled or lhs");
      }
    } else if (key == "lhs_samples") {
      base.lhs_samples = Get<int>(doc, key);
    } else {
      throw SpecError("unknown run setting '" + key + "'");
    }
  }
  if (base.surrogate.n_trees < 1 || base.surrogate.min_leaf < 1) {
    throw SpecError("n_trees and min_leaf must be positive");
  }
  if (base.max_iterations < 0) throw SpecError("max_iterations must be >= 0");
  if (base.num_samples < 1) throw SpecError("num_samples must be >= 1");
  ValidateFilterPolicy(base.filter);
  return base;
}

json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError("'" + path + "' is not valid JSON: " + e.what());
  }
}

SearchSpace ResolveSpace(const std::string& ref) {
  if (ref == "table1") return CloudTrainingSpace();
  return SearchSpace::LoadFile(ref);
}

OracleSettings ParseOracleSettings(const json& doc) {
  if (!doc.is_object()) throw SpecError("oracle settings must be an object");
  OracleSettings s;
  for (const auto& [key, value] : doc.items()) {
    if (key == "kind") {
      s.kind = Get<std::string>(doc, key);
      if (s.kind != "synthetic" && s.kind != "trace") {
        throw SpecError("oracle kind must be synthetic or trace");
      }
    } else if (key == "trace") {
      s.trace_path = Get<std::string>(doc, key);
    } else if (key == "mapping") {
      s.mapping_path = Get<std::string>(doc, key);
    } else if (key == "seed") {
      s.synthetic.seed = Get<std::uint64_t>(doc, key);
    } else if (key == "noise_std") {
      s.synthetic.noise_std = Get<double>(doc, key);
    } else if (key == "near_optimal_target") {
      s.synthetic.near_optimal_target = Get<double>(doc, key);
    } else if (key == "feasible_quantile") {
      s.synthetic.feasible_quantile = Get<double>(doc, key);
    } else {
      throw SpecError("unknown oracle setting '" + key + "'");
    }
  }
  if (s.kind == "trace" && s.trace_path.empty()) {
    throw SpecError("a trace oracle needs a 'trace' path");
  }
  return s;
}

std::unique_ptr<Oracle> MakeOracle(const OracleSettings& settings,
                                   const SearchSpace& space) {
  if (settings.kind == "trace") {
    const ColumnMapping mapping = settings.mapping_path.empty()
                                      ? ColumnMapping{}
                                      : ColumnMapping::LoadFile(
                                            settings.mapping_path);
    return std::make_unique<TraceTable>(
        TraceTable::Load(settings.trace_path, space, mapping));
  }
  return std::make_unique<SyntheticBenchmark>(
      SyntheticBenchmark::Generate(space, settings.synthetic));
}

std::optional<double> DefaultCostCap(const Oracle& oracle) {
  if (const auto* synthetic = dynamic_cast<const SyntheticBenchmark*>(&oracle)) {
    return synthetic->default_cost_cap();
  }
  return std::nullopt;
}

ExperimentSettings ParseExperimentSettings(const json& doc,
                                           const std::string& base_dir) {
  if (!doc.is_object()) throw SpecError("experiment must be an object");
  ExperimentSettings s;
  for (const auto& [key, value] : doc.items()) {
    if (key == "space") {
      s.space = Get<std::string>(doc, key);
      if (s.space != "table1") s.space = Resolve(s.space, base_dir);
    } else if (key == "oracle") {
      s.oracle = ParseOracleSettings(value);
      s.oracle.trace_path = Resolve(s.oracle.trace_path, base_dir);
      s.oracle.mapping_path = Resolve(s.oracle.mapping_path, base_dir);
    } else if (key == "cost_cap") {
      s.cost_cap = Get<double>(doc, key);
    } else if (key == "seed") {
      s.seed = Get<std::uint64_t>(doc, key);
    } else if (key == "seeds") {
      s.num_seeds = Get<int>(doc, key);
      if (s.num_seeds < 1) throw SpecError("seeds must be >= 1");
    } else if (key == "base") {
      s.base = ApplyRunSettings(value, s.base);
    } else if (key == "optimizers") {
      if (!value.is_array() || value.empty()) {
        throw SpecError("optimizers must be a non-empty list");
      }
      for (const json& entry : value) {
        if (!entry.is_object() || !entry.contains("name")) {
          throw SpecError("each optimizer needs a 'name'");
        }
        json overrides = entry;
        const std::string name = Get<std::string>(entry, "name");
        overrides.erase("name");
        s.optimizers.emplace_back(name, overrides);
      }
    } else {
      throw SpecError("unknown experiment setting '" + key + "'");
    }
  }
  if (s.optimizers.empty()) throw SpecError("experiment lists no optimizers");
  // Surface configuration errors before any run starts.
  for (const auto& [name, overrides] : s.optimizers) {
    ApplyRunSettings(overrides, s.base);
  }
  return s;
}

ExperimentPlan BuildPlan(const ExperimentSettings& settings,
                         const Oracle& oracle) {
  const std::optional<double> cap =
      settings.cost_cap ? settings.cost_cap : DefaultCostCap(oracle);
  ExperimentPlan plan;
  for (const auto& [name, overrides] : settings.optimizers) {
    OptimizerConfig config = ApplyRunSettings(overrides, settings.base);
    if (config.constraints.constraints.empty() && cap) {
      config.constraints.constraints = {
          {"cost", ConstraintDirection::kAtMost, *cap}};
    }
    plan.optimizers.push_back({name, config});
  }
  for (int i = 0; i < settings.num_seeds; ++i) {
    plan.seeds.push_back(settings.seed + static_cast<std::uint64_t>(i));
  }
  return plan;
}

}  // namespace subtune
