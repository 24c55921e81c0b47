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

#ifndef SUBTUNE_CONFIG_SPACE_H_
#define SUBTUNE_CONFIG_SPACE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "subtune/linalg.h"

namespace subtune {

enum class ParameterKind { kCategorical, kOrdinal };

// One coordinate of the discrete search space.
//
// Ordinal parameters carry strictly increasing numeric values. An ordinal
// parameter may be relabeled per value of an earlier categorical parameter
// (`labels_by`): the level index is what the optimizer sees, the relabeled
// number is what trace files carry. This is how "#VMs" depends on the VM
// type without making the space hierarchical.
struct ParameterDef {
  struct LabelsBy {
    std::size_t parent = 0;
    // numeric[parent_value][level]
    std::vector<std::vector<double>> numeric;
    std::vector<std::vector<std::string>> labels;
  };

  std::string name;
  ParameterKind kind = ParameterKind::kCategorical;
  std::vector<std::string> labels;
  std::vector<double> numeric;  // ordinal only
  std::optional<LabelsBy> labels_by;

  std::size_t size() const { return labels.size(); }

  static ParameterDef Categorical(std::string name,
                                  std::vector<std::string> labels);
  static ParameterDef Ordinal(std::string name, std::vector<double> values);
};

// A full parameter assignment, stored as value indices in params order.
struct Configuration {
  std::vector<std::uint32_t> values;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// A configuration paired with a sub-sampling rate from the fidelity grid.
struct FidelityConfig {
  Configuration config;
  std::size_t level = 0;  // index into the fidelity grid
  double s = 1.0;

  friend bool operator==(const FidelityConfig&, const FidelityConfig&) =
      default;
};

class SearchSpace {
 public:
  // Validates and builds a space. Throws SpecError on any violated
  // invariant (empty or duplicate values, non-increasing ordinals, bad
  // fidelity grid).
  static SearchSpace Create(std::vector<ParameterDef> params,
                            std::vector<double> fidelity_grid);

  static SearchSpace FromJson(const nlohmann::json& doc);
  static SearchSpace LoadFile(const std::string& path);

  const std::vector<ParameterDef>& params() const { return params_; }
  const std::vector<double>& fidelity_grid() const { return fidelity_grid_; }

  std::size_t num_configs() const { return num_configs_; }
  std::size_t num_levels() const { return fidelity_grid_.size(); }
  std::size_t num_points() const { return num_configs_ * num_levels(); }
  std::size_t full_level() const { return fidelity_grid_.size() - 1; }
  std::size_t feature_dim() const { return feature_dim_; }

  // Enumeration is lexicographic in params order (first parameter most
  // significant), then over the fidelity grid.
  Configuration ConfigAt(std::size_t config_index) const;
  std::size_t ConfigIndex(const Configuration& config) const;
  FidelityConfig PointAt(std::size_t point_index) const;
  std::size_t PointIndex(const FidelityConfig& fc) const;
  std::size_t PointIndex(std::size_t config_index, std::size_t level) const {
    return config_index * num_levels() + level;
  }
  std::size_t ConfigOfPoint(std::size_t point_index) const {
    return point_index / num_levels();
  }
  std::size_t LevelOfPoint(std::size_t point_index) const {
    return point_index % num_levels();
  }

  // Level index of a sub-sampling rate, matched with a small tolerance.
  std::optional<std::size_t> LevelOf(double s) const;

  std::vector<double> Encode(const FidelityConfig& fc) const;
  void EncodeInto(const Configuration& config, double s,
                  std::span<double> out) const;

  // Feature rows for every point, in enumeration order.
  Matrix EncodeAll() const;

  // Text form of one coordinate, honoring labels_by.
  std::string ValueLabel(const Configuration& config,
                         std::size_t param) const;
  // Inverse of ValueLabel. `partial` must already hold the parent value
  // when the parameter is relabeled. Throws EncodingError naming the
  // parameter.
  std::uint32_t ParseValue(std::size_t param, std::string_view text,
                           const Configuration& partial) const;

  // Human-readable "name=value" list.
  std::string Describe(const Configuration& config) const;

  nlohmann::json ToJson() const;

 private:
  SearchSpace() = default;
  void CheckConfig(const Configuration& config) const;

  std::vector<ParameterDef> params_;
  std::vector<double> fidelity_grid_;
  std::size_t num_configs_ = 0;
  std::size_t feature_dim_ = 0;
};

std::vector<FidelityConfig> Enumerate(const SearchSpace& space);
std::vector<FidelityConfig> FullFidelitySlice(const SearchSpace& space);
std::vector<double> Encode(const SearchSpace& space, const FidelityConfig& fc);

// The cloud / hyper-parameter space with four VM types, six cluster sizes
// per type, three learning rates, two batch sizes, two training modes and
// five data-set fractions.
SearchSpace CloudTrainingSpace();

// Formats a double with the shortest round-trip representation.
std::string FormatDouble(double v);

}  // namespace subtune

#endif  // SUBTUNE_CONFIG_SPACE_H_
