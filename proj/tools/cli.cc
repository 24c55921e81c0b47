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

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "subtune/errors.h"
#include "subtune/harness.h"
#include "subtune/optimizer.h"
#include "subtune/parallel.h"
#include "subtune/settings.h"

namespace subtune {
namespace {

namespace fs = std::filesystem;

std::string OutputDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SUBTUNE_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return "subtune_out";
}

std::string PrepareOutput(const std::string& flag) {
  const std::string dir = OutputDir(flag);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw LoadError("cannot create output directory '" + dir + "'");
  return dir;
}

struct OracleFlags {
  std::string space = "table1";
  std::string trace;
  std::string mapping;
  std::optional<std::uint64_t> synthetic_seed;
  std::optional<double> noise_std;
};

void AddOracleFlags(CLI::App* cmd, OracleFlags& f) {
  cmd->add_option("--space", f.space,
                  "Space file, or 'table1' for the built-in cloud space");
  cmd->add_option("--trace", f.trace, "Trace CSV to replay")
      ->check(CLI::ExistingFile);
  cmd->add_option("--mapping", f.mapping, "Column-mapping sidecar (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--synthetic-seed", f.synthetic_seed,
                  "Seed of the synthetic benchmark instance");
  cmd->add_option("--noise-std", f.noise_std,
                  "Noise std of the synthetic benchmark");
}

struct RunFlags {
  std::string config;
  OracleFlags oracle;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> acquisition;
  std::optional<std::string> surrogate;
  std::optional<std::string> filter;
  std::optional<double> beta;
  std::optional<int> max_iterations;
  std::optional<double> cost_cap;
  std::optional<double> threshold;
  std::vector<double> init_fidelities;
  int jobs = 0;
  std::string out;
};

int DoRun(const RunFlags& f, std::ostream& out) {
  nlohmann::json doc = f.config.empty() ? nlohmann::json::object()
                                        : LoadJsonFile(f.config);
  const std::string base_dir =
      f.config.empty() ? "" : fs::path(f.config).parent_path().string();
  OracleSettings oracle_settings;
  std::string space_ref = f.oracle.space;
  if (doc.contains("oracle")) {
    oracle_settings = ParseOracleSettings(doc["oracle"]);
    if (!oracle_settings.trace_path.empty() &&
        fs::path(oracle_settings.trace_path).is_relative() &&
        !base_dir.empty()) {
      oracle_settings.trace_path =
          (fs::path(base_dir) / oracle_settings.trace_path).string();
    }
    doc.erase("oracle");
  }
  if (doc.contains("space")) {
    if (f.oracle.space == "table1") {
      space_ref = doc["space"].get<std::string>();
      if (space_ref != "table1" && fs::path(space_ref).is_relative() &&
          !base_dir.empty()) {
        space_ref = (fs::path(base_dir) / space_ref).string();
      }
    }
    doc.erase("space");
  }
  if (!f.oracle.trace.empty()) {
    oracle_settings.kind = "trace";
    oracle_settings.trace_path = f.oracle.trace;
  }
  if (!f.oracle.mapping.empty()) oracle_settings.mapping_path = f.oracle.mapping;
  if (f.oracle.synthetic_seed) {
    oracle_settings.synthetic.seed = *f.oracle.synthetic_seed;
  }
  if (f.oracle.noise_std) oracle_settings.synthetic.noise_std = *f.oracle.noise_std;

  OptimizerConfig config = ApplyRunSettings(doc, OptimizerConfig{});
  nlohmann::json overrides = nlohmann::json::object();
  if (f.seed) overrides["seed"] = *f.seed;
  if (f.acquisition) overrides["acquisition"] = *f.acquisition;
  if (f.surrogate) overrides["surrogate"] = *f.surrogate;
  if (f.filter) overrides["filter"] = *f.filter;
  if (f.beta) overrides["beta"] = *f.beta;
  if (f.max_iterations) overrides["max_iterations"] = *f.max_iterations;
  if (f.cost_cap) overrides["cost_cap"] = *f.cost_cap;
  if (f.threshold) overrides["incumbent_threshold"] = *f.threshold;
  if (!f.init_fidelities.empty()) overrides["init_fidelities"] = f.init_fidelities;
  config = ApplyRunSettings(overrides, config);
  config.jobs = f.jobs > 0 ? f.jobs : DefaultJobs();

  const SearchSpace space = ResolveSpace(space_ref);
  const auto oracle = MakeOracle(oracle_settings, space);
  if (config.constraints.constraints.empty()) {
    if (const auto cap = DefaultCostCap(*oracle)) {
      config.constraints.constraints = {
          {"cost", ConstraintDirection::kAtMost, *cap}};
    }
  }
  const std::string dir = PrepareOutput(f.out);

  Optimizer optimizer(config, *oracle);
  const RunTrace trace = optimizer.Run();
  std::vector<ResultRow> rows;
  for (const RunRecord& r : trace.records) {
    rows.push_back({AcquisitionName(config.acquisition), config.seed, r});
  }
  const std::string path = (fs::path(dir) / "run.csv").string();
  WriteResultsFile(path, rows);
  const RunRecord& last = trace.records.back();
  out << "wrote " << path << " (" << rows.size() << " records)\n"
      << "incumbent: " << space.Describe(space.ConfigAt(last.incumbent.config))
      << "\n"
      << "constrained accuracy: " << FormatDouble(last.constrained_accuracy)
      << ", exploration cost: " << FormatDouble(last.cumulative_cost)
      << " USD\n";
  return 0;
}

struct ExperimentFlags {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  int jobs = 0;
  std::string out;
};

int DoExperiment(const ExperimentFlags& f, std::ostream& out) {
  ExperimentSettings settings = ParseExperimentSettings(
      LoadJsonFile(f.spec), fs::path(f.spec).parent_path().string());
  if (f.seed) settings.seed = *f.seed;
  if (f.seeds) {
    if (*f.seeds < 1) throw UsageError("--seeds must be >= 1");
    settings.num_seeds = *f.seeds;
  }
  const SearchSpace space = ResolveSpace(settings.space);
  const auto oracle = MakeOracle(settings.oracle, space);
  const ExperimentPlan plan = BuildPlan(settings, *oracle);
  const std::string dir = PrepareOutput(f.out);
  const std::vector<ResultRow> rows =
      RunExperiment(plan, *oracle, f.jobs > 0 ? f.jobs : DefaultJobs());
  const std::string path = (fs::path(dir) / "results.csv").string();
  WriteResultsFile(path, rows);
  out << "wrote " << path << " (" << rows.size() << " rows)\n";
  for (const NamedOptimizer& opt : plan.optimizers) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed : plan.seeds) {
      const ResultRow* last = nullptr;
      for (const ResultRow& row : rows) {
        if (row.optimizer == opt.name && row.seed == seed) last = &row;
      }
      if (last != nullptr) {
        sum += last->record.constrained_accuracy;
        ++count;
      }
    }
    out << opt.name << ": final mean constrained accuracy "
        << FormatDouble(count ? sum / static_cast<double>(count) : 0.0)
        << "\n";
  }
  return 0;
}

struct InspectFlags {
  std::string trace;
  std::string space = "table1";
  std::string mapping;
  double cmax = 0.0;
};

int DoInspect(const InspectFlags& f, std::ostream& out) {
  const SearchSpace space = ResolveSpace(f.space);
  const ColumnMapping mapping =
      f.mapping.empty() ? ColumnMapping{} : ColumnMapping::LoadFile(f.mapping);
  const TraceTable table = TraceTable::Load(f.trace, space, mapping);
  out << FormatFeasibilityReport(ComputeFeasibilityReport(table, f.cmax));
  return 0;
}

struct GenerateFlags {
  OracleFlags oracle;
  std::uint64_t seed = 0;
  int replicates = 3;
  std::string out;
};

int DoGenerate(const GenerateFlags& f, std::ostream& out) {
  if (f.replicates < 1) throw UsageError("--replicates must be >= 1");
  SyntheticOptions options;
  options.seed = f.oracle.synthetic_seed.value_or(f.seed);
  if (f.oracle.noise_std) options.noise_std = *f.oracle.noise_std;
  const SyntheticBenchmark bench =
      SyntheticBenchmark::Generate(ResolveSpace(f.oracle.space), options);
  const std::string dir = PrepareOutput(f.out);
  const std::string path = (fs::path(dir) / "synthetic_trace.csv").string();
  bench.ToTraceTable(f.replicates, f.seed).WriteFile(path);
  out << "wrote " << path << "\n"
      << "default cost cap: " << FormatDouble(bench.default_cost_cap()) << "\n"
      << FormatFeasibilityReport(
             ComputeFeasibilityReport(bench, bench.default_cost_cap()));
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Constrained multi-fidelity configuration tuner", "subtune"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one optimization");
  run_cmd->add_option("--config", run.config, "Run settings (JSON)")
      ->check(CLI::ExistingFile);
  AddOracleFlags(run_cmd, run.oracle);
  run_cmd->add_option("--seed", run.seed, "Run seed");
  run_cmd->add_option("--acquisition", run.acquisition,
                      "ei, eic, eic-usd, fabolas, trimtuner or random");
  run_cmd->add_option("--surrogate", run.surrogate, "gp or trees");
  run_cmd->add_option("--filter", run.filter, "cea, random or none");
  run_cmd->add_option("--beta", run.beta, "Filtering rate in (0, 1]");
  run_cmd->add_option("--max-iterations", run.max_iterations,
                      "Iterations after initialization");
  run_cmd->add_option("--cost-cap", run.cost_cap, "Cost cap in USD");
  run_cmd->add_option("--threshold", run.threshold,
                      "Incumbent feasibility threshold");
  run_cmd->add_option("--init-fidelities", run.init_fidelities,
                      "Sub-sampling rates of the initial design");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads (default: cores)");
  run_cmd->add_option("--out", run.out, "Output directory");

  ExperimentFlags exp;
  CLI::App* exp_cmd =
      app.add_subcommand("experiment", "Compare optimizers over seeds");
  exp_cmd->add_option("--spec", exp.spec, "Experiment settings (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  exp_cmd->add_option("--seed", exp.seed, "First seed");
  exp_cmd->add_option("--seeds", exp.seeds, "Number of seeds");
  exp_cmd->add_option("--jobs", exp.jobs, "Concurrent runs (default: cores)");
  exp_cmd->add_option("--out", exp.out, "Output directory");

  InspectFlags inspect;
  CLI::App* inspect_cmd = app.add_subcommand(
      "inspect-trace", "Feasibility statistics of a trace");
  inspect_cmd->add_option("--trace", inspect.trace, "Trace CSV")
      ->required()
      ->check(CLI::ExistingFile);
  inspect_cmd->add_option("--space", inspect.space,
                          "Space file, or 'table1'");
  inspect_cmd->add_option("--mapping", inspect.mapping,
                          "Column-mapping sidecar (JSON)")
      ->check(CLI::ExistingFile);
  inspect_cmd->add_option("--cmax", inspect.cmax, "Cost cap in USD")
      ->required();

  GenerateFlags gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen-synthetic", "Write a synthetic benchmark as a trace CSV");
  AddOracleFlags(gen_cmd, gen.oracle);
  gen_cmd->add_option("--seed", gen.seed, "Seed of benchmark and noise");
  gen_cmd->add_option("--replicates", gen.replicates, "Replicates per point");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (run_cmd->parsed()) return DoRun(run, out);
    if (exp_cmd->parsed()) return DoExperiment(exp, out);
    if (inspect_cmd->parsed()) return DoInspect(inspect, out);
    if (gen_cmd->parsed()) return DoGenerate(gen, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace subtune
