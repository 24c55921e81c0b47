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

#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "temp_dir.h"

namespace subtune {
namespace {

using testing::ReadAll;
using testing::TempDir;
using testing::WriteAll;

struct Outcome {
  int status = 0;
  std::string out;
  std::string err;
};

Outcome Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.status = RunCli(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

int CountLines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

constexpr char kSmallSpace[] = R"({
  "parameters": [
    {"name": "vm", "kind": "categorical", "values": ["a", "b", "c"]},
    {"name": "workers", "kind": "ordinal", "values": [1, 2, 4, 8, 16]},
    {"name": "mode", "kind": "categorical", "values": ["sync", "async"]}
  ],
  "fidelity_grid": [0.25, 0.5, 1.0]
})";

constexpr char kSmallExperiment[] = R"({
  "space": "space.json",
  "oracle": {"kind": "synthetic", "seed": 4},
  "seed": 7,
  "seeds": 3,
  "base": {"surrogate": "trees", "max_iterations": 6},
  "optimizers": [
    {"name": "trimtuner", "acquisition": "trimtuner", "filter": "cea",
     "beta": 0.2},
    {"name": "eic", "acquisition": "eic", "filter": "none"}
  ]
})";

TEST(CliTest, ZeroIterationsWritesOnlyTheInitRecord) {
  TempDir dir("cli_run");
  const Outcome o = Invoke({"run", "--max-iterations", "0", "--seed", "3",
                            "--jobs", "1", "--out", dir.path()});
  ASSERT_EQ(o.status, 0) << o.err;
  const std::string csv = ReadAll(dir.file("run.csv"));
  EXPECT_EQ(CountLines(csv), 2);
  EXPECT_NE(o.out.find("(1 records)"), std::string::npos);
  EXPECT_NE(o.out.find("incumbent: "), std::string::npos);
}

TEST(CliTest, RunHonorsConfigFile) {
  TempDir dir("cli_config");
  WriteAll(dir.file("space.json"), kSmallSpace);
  WriteAll(dir.file("run.json"),
           R"({"space": "space.json", "acquisition": "eic",
               "max_iterations": 3, "seed": 1})");
  const Outcome o = Invoke({"run", "--config", dir.file("run.json"),
                            "--synthetic-seed", "2", "--jobs", "1", "--out",
                            dir.file("out")});
  ASSERT_EQ(o.status, 0) << o.err;
  const std::string csv = ReadAll(dir.file("out/run.csv"));
  EXPECT_EQ(CountLines(csv), 1 + 4);
  EXPECT_NE(csv.find("\neic,"), std::string::npos);
}

TEST(CliTest, ExperimentIsByteReproducible) {
  TempDir dir("cli_experiment");
  WriteAll(dir.file("space.json"), kSmallSpace);
  WriteAll(dir.file("exp.json"), kSmallExperiment);
  const Outcome a = Invoke({"experiment", "--spec", dir.file("exp.json"),
                            "--jobs", "1", "--out", dir.file("a")});
  const Outcome b = Invoke({"experiment", "--spec", dir.file("exp.json"),
                            "--jobs", "3", "--out", dir.file("b")});
  ASSERT_EQ(a.status, 0) << a.err;
  ASSERT_EQ(b.status, 0) << b.err;
  const std::string csv_a = ReadAll(dir.file("a/results.csv"));
  EXPECT_EQ(csv_a, ReadAll(dir.file("b/results.csv")));
  // 2 optimizers x 3 seeds x (init + 6 iterations), plus the header.
  EXPECT_EQ(CountLines(csv_a), 1 + 2 * 3 * 7);
  EXPECT_NE(a.out.find("trimtuner: final mean constrained accuracy"),
            std::string::npos);
  EXPECT_NE(a.out.find("eic: final mean constrained accuracy"),
            std::string::npos);
}

TEST(CliTest, ExperimentSeedFlagsOverrideTheSpec) {
  TempDir dir("cli_seeds");
  WriteAll(dir.file("space.json"), kSmallSpace);
  WriteAll(dir.file("exp.json"), kSmallExperiment);
  const Outcome o =
      Invoke({"experiment", "--spec", dir.file("exp.json"), "--seed", "100",
              "--seeds", "1", "--jobs", "1", "--out", dir.path()});
  ASSERT_EQ(o.status, 0) << o.err;
  const std::string csv = ReadAll(dir.file("results.csv"));
  EXPECT_EQ(CountLines(csv), 1 + 2 * 7);
  EXPECT_NE(csv.find("\ntrimtuner,100,"), std::string::npos);
}

TEST(CliTest, GeneratedTraceInspectsLikeTheBenchmark) {
  TempDir dir("cli_trace");
  const Outcome gen = Invoke({"gen-synthetic", "--seed", "0", "--replicates",
                              "2", "--noise-std", "0", "--out", dir.path()});
  ASSERT_EQ(gen.status, 0) << gen.err;
  const std::string trace = dir.file("synthetic_trace.csv");
  // 288 configurations x 5 levels x 2 replicates, plus the header.
  EXPECT_EQ(CountLines(ReadAll(trace)), 1 + 288 * 5 * 2);

  const std::string marker = "default cost cap: ";
  const std::size_t at = gen.out.find(marker);
  ASSERT_NE(at, std::string::npos);
  const std::size_t end = gen.out.find('\n', at);
  const std::string cap =
      gen.out.substr(at + marker.size(), end - at - marker.size());
  const std::string report = gen.out.substr(end + 1);

  const Outcome inspect =
      Invoke({"inspect-trace", "--trace", trace, "--cmax", cap});
  ASSERT_EQ(inspect.status, 0) << inspect.err;
  EXPECT_EQ(inspect.out, report);
  EXPECT_NE(inspect.out.find("feasible: 173 (60.1%)"), std::string::npos);
}

TEST(CliTest, ErrorsExitNonzero) {
  TempDir dir("cli_errors");
  Outcome o = Invoke({"run", "--acquisition", "nope", "--out", dir.path()});
  EXPECT_NE(o.status, 0);
  EXPECT_NE(o.err.find("error: "), std::string::npos);
  EXPECT_NE(o.err.find("nope"), std::string::npos);

  o = Invoke({"run", "--beta", "2", "--out", dir.path()});
  EXPECT_NE(o.status, 0);
  EXPECT_NE(o.err.find("error: "), std::string::npos);

  WriteAll(dir.file("bad.json"), "{\"seeds\": 0, \"optimizers\": []}");
  o = Invoke({"experiment", "--spec", dir.file("bad.json")});
  EXPECT_NE(o.status, 0);
  EXPECT_NE(o.err.find("error: "), std::string::npos);

  WriteAll(dir.file("broken.csv"), "not,a,trace\n");
  o = Invoke({"inspect-trace", "--trace", dir.file("broken.csv"), "--cmax",
              "0.02"});
  EXPECT_NE(o.status, 0);
  EXPECT_NE(o.err.find("error: "), std::string::npos);

  EXPECT_NE(Invoke({}).status, 0);
  EXPECT_NE(Invoke({"inspect-trace", "--cmax", "0.1"}).status, 0);
  EXPECT_NE(Invoke({"frobnicate"}).status, 0);
}

}  // namespace
}  // namespace subtune
