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

#ifndef SUBTUNE_ORACLE_H_
#define SUBTUNE_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subtune/config_space.h"

namespace subtune {

struct Measurement {
  double accuracy = 0.0;
  double training_time_s = 0.0;
  double cost_usd = 0.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

// Answers evaluations of points (enumeration indices) of its space.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual const SearchSpace& space() const = 0;

  // One noisy measurement; a pure function of (seed, point, call_index).
  // Throws EvaluationError for points outside the space.
  virtual Measurement Evaluate(std::size_t point, std::uint64_t seed,
                               std::uint64_t call_index) const = 0;

  // Noise-free ground truth used for scoring.
  virtual Measurement Truth(std::size_t point) const = 0;
};

// Accuracy of a recommendation, scaled by cap / cost when its true cost
// exceeds the cap.
double ConstrainedAccuracy(double true_accuracy, double true_cost,
                           double cost_cap);

// Column names of a trace file, keyed by canonical name. Canonical names
// are the space's parameter names plus dataset_frac, replicate, accuracy,
// training_time_s and cost_usd.
struct ColumnMapping {
  std::map<std::string, std::string> columns;

  std::string Resolve(const std::string& canonical) const;
  // Sidecar document: {"columns": {"<canonical>": "<file column>", ...}}.
  static ColumnMapping LoadFile(const std::string& path);
};

std::vector<std::string> TraceHeader(const SearchSpace& space);

// Lookup table of replicate measurements for every point of a space.
class TraceTable final : public Oracle {
 public:
  struct Replicate {
    int id = 0;
    Measurement value;
  };

  // Throws SpecError when a point has no replicate.
  TraceTable(SearchSpace space, std::vector<std::vector<Replicate>> rows);

  // Throws LoadError for malformed rows, unknown values, non-physical
  // measurements, duplicate keys and coverage gaps.
  static TraceTable Load(const std::string& path, const SearchSpace& space,
                         const ColumnMapping& mapping = {});
  static TraceTable Parse(std::istream& in, const SearchSpace& space,
                          const ColumnMapping& mapping = {},
                          const std::string& source = "<stream>");

  // Rows in enumeration order, replicates ascending by id.
  void Write(std::ostream& out) const;
  void WriteFile(const std::string& path) const;

  const SearchSpace& space() const override { return space_; }
  Measurement Evaluate(std::size_t point, std::uint64_t seed,
                       std::uint64_t call_index) const override;
  // Replicate means.
  Measurement Truth(std::size_t point) const override;

  const std::vector<Replicate>& replicates(std::size_t point) const {
    return rows_.at(point);
  }

 private:
  SearchSpace space_;
  std::vector<std::vector<Replicate>> rows_;
};

struct SyntheticOptions {
  std::uint64_t seed = 0;
  double noise_std = 0.01;
  // Share of the full-fidelity slice that should be feasible and within
  // 5% of the best feasible accuracy at the default cost cap.
  double near_optimal_target = 0.125;
  // Quantile of full-fidelity costs used as the default cost cap.
  double feasible_quantile = 0.6;
};

// Closed-form benchmark: accuracy(x, s) = a_inf * s / (s + kappa) and
// cost(x, s) = rho * s, perturbed by seeded noise.
class SyntheticBenchmark final : public Oracle {
 public:
  struct Latent {
    double a_inf = 0.9;
    double kappa = 0.02;
    double rho = 0.01;
  };

  // Seconds of training bought by one USD.
  static constexpr double kSecondsPerUsd = 36000.0;

  SyntheticBenchmark(SearchSpace space, std::vector<Latent> latents,
                     double noise_std, double cost_cap);

  // Draws per-configuration latents and calibrates the accuracy spread.
  static SyntheticBenchmark Generate(SearchSpace space,
                                     const SyntheticOptions& options);

  const SearchSpace& space() const override { return space_; }
  Measurement Evaluate(std::size_t point, std::uint64_t seed,
                       std::uint64_t call_index) const override;
  Measurement Truth(std::size_t point) const override;

  const std::vector<Latent>& latents() const { return latents_; }
  double noise_std() const { return noise_std_; }
  double default_cost_cap() const { return cost_cap_; }

  // Materializes `replicates` noisy draws per point.
  TraceTable ToTraceTable(int replicates, std::uint64_t seed) const;

 private:
  SearchSpace space_;
  std::vector<Latent> latents_;  // per configuration
  double noise_std_;
  double cost_cap_;
};

}  // namespace subtune

#endif  // SUBTUNE_ORACLE_H_
