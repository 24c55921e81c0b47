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

#include "subtune/config_space.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "subtune/errors.h"

namespace subtune {
namespace {

constexpr double kLevelTolerance = 1e-9;

bool NumbersMatch(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b));
}

std::optional<double> ParseNumber(std::string_view text) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  // from_chars rejects a leading '+'.
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::size_t EncodedWidth(const ParameterDef& p) {
  if (p.kind == ParameterKind::kOrdinal) return 1;
  return p.size() <= 2 ? 1 : p.size();
}

ParameterDef ParamFromJson(const nlohmann::json& j,
                           const std::vector<ParameterDef>& earlier) {
  if (!j.contains("name") || !j.contains("kind") || !j.contains("values")) {
    throw SpecError("parameter entries need 'name', 'kind' and 'values'");
  }
  const std::string name = j.at("name").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  const auto& values = j.at("values");
  if (!values.is_array()) {
    throw SpecError("parameter '" + name + "': 'values' must be a list");
  }
  ParameterDef def;
  if (kind == "categorical") {
    std::vector<std::string> labels;
    for (const auto& v : values) {
      labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    def = ParameterDef::Categorical(name, std::move(labels));
  } else if (kind == "ordinal" || kind == "ordinal-numeric") {
    std::vector<double> numbers;
    for (const auto& v : values) {
      if (!v.is_number()) {
        throw SpecError("parameter '" + name +
                        "': ordinal values must be numbers");
      }
      numbers.push_back(v.get<double>());
    }
    def = ParameterDef::Ordinal(name, std::move(numbers));
  } else {
    throw SpecError("parameter '" + name + "': unknown kind '" + kind + "'");
  }

  if (j.contains("labels_by")) {
    if (def.kind != ParameterKind::kOrdinal) {
      throw SpecError("parameter '" + name +
                      "': labels_by is only allowed on ordinal parameters");
    }
    const auto& lb = j.at("labels_by");
    const std::string parent_name = lb.at("parameter").get<std::string>();
    std::optional<std::size_t> parent;
    for (std::size_t i = 0; i < earlier.size(); ++i) {
      if (earlier[i].name == parent_name) parent = i;
    }
    if (!parent || earlier[*parent].kind != ParameterKind::kCategorical) {
      throw SpecError("parameter '" + name + "': labels_by parent '" +
                      parent_name +
                      "' must be an earlier categorical parameter");
    }
    ParameterDef::LabelsBy relabel;
    relabel.parent = *parent;
    const auto& table = lb.at("values");
    for (const std::string& parent_label : earlier[*parent].labels) {
      if (!table.contains(parent_label)) {
        throw SpecError("parameter '" + name + "': labels_by has no entry for '" +
                        parent_label + "'");
      }
      std::vector<double> row;
      std::vector<std::string> row_labels;
      for (const auto& v : table.at(parent_label)) {
        row.push_back(v.get<double>());
        row_labels.push_back(FormatDouble(v.get<double>()));
      }
      if (row.size() != def.size()) {
        throw SpecError("parameter '" + name + "': labels_by row for '" +
                        parent_label + "' has the wrong length");
      }
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (!(row[k] > row[k - 1])) {
          throw SpecError("parameter '" + name + "': labels_by row for '" +
                          parent_label + "' must be strictly increasing");
        }
      }
      relabel.numeric.push_back(std::move(row));
      relabel.labels.push_back(std::move(row_labels));
    }
    def.labels_by = std::move(relabel);
  }
  return def;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ParameterDef ParameterDef::Categorical(std::string name,
                                       std::vector<std::string> labels) {
  ParameterDef def;
  def.name = std::move(name);
  def.kind = ParameterKind::kCategorical;
  def.labels = std::move(labels);
  return def;
}

ParameterDef ParameterDef::Ordinal(std::string name,
                                   std::vector<double> values) {
  ParameterDef def;
  def.name = std::move(name);
  def.kind = ParameterKind::kOrdinal;
  for (double v : values) def.labels.push_back(FormatDouble(v));
  def.numeric = std::move(values);
  return def;
}

SearchSpace SearchSpace::Create(std::vector<ParameterDef> params,
                                std::vector<double> fidelity_grid) {
  if (params.empty()) throw SpecError("search space has no parameters");
  std::set<std::string> names;
  std::size_t configs = 1;
  std::size_t dim = 0;
  for (const auto& p : params) {
    if (!names.insert(p.name).second) {
      throw SpecError("duplicate parameter name '" + p.name + "'");
    }
    if (p.labels.empty()) {
      throw SpecError("parameter '" + p.name + "' has no values");
    }
    std::set<std::string> seen(p.labels.begin(), p.labels.end());
    if (seen.size() != p.labels.size()) {
      throw SpecError("parameter '" + p.name + "' has duplicate values");
    }
    if (p.kind == ParameterKind::kOrdinal) {
      if (p.numeric.size() != p.labels.size()) {
        throw SpecError("parameter '" + p.name + "' is missing numeric values");
      }
      for (std::size_t k = 1; k < p.numeric.size(); ++k) {
        if (!(p.numeric[k] > p.numeric[k - 1])) {
          throw SpecError("ordinal parameter '" + p.name +
                          "' must be strictly increasing");
        }
      }
    }
    configs *= p.size();
    dim += EncodedWidth(p);
  }
  if (fidelity_grid.empty()) throw SpecError("fidelity grid is empty");
  for (std::size_t k = 0; k < fidelity_grid.size(); ++k) {
    const double s = fidelity_grid[k];
    if (!(s > 0.0 && s <= 1.0)) {
      throw SpecError("fidelity grid values must lie in (0, 1]");
    }
    if (k > 0 && !(s > fidelity_grid[k - 1])) {
      throw SpecError("fidelity grid must be strictly increasing");
    }
  }
  if (fidelity_grid.back() != 1.0) {
    throw SpecError("fidelity grid must end with 1.0");
  }

  SearchSpace space;
  space.params_ = std::move(params);
  space.fidelity_grid_ = std::move(fidelity_grid);
  space.num_configs_ = configs;
  space.feature_dim_ = dim + 1;
  return space;
}

SearchSpace SearchSpace::FromJson(const nlohmann::json& doc) {
  try {
    std::vector<ParameterDef> params;
    for (const auto& p : doc.at("parameters")) {
      params.push_back(ParamFromJson(p, params));
    }
    std::vector<double> grid = doc.at("fidelity_grid").get<std::vector<double>>();
    return Create(std::move(params), std::move(grid));
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed space definition: ") + e.what());
  }
}

SearchSpace SearchSpace::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open space definition '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("space definition '" + path + "' is not valid JSON: " +
                    e.what());
  }
  return FromJson(doc);
}

nlohmann::json SearchSpace::ToJson() const {
  nlohmann::json doc;
  doc["parameters"] = nlohmann::json::array();
  for (const auto& p : params_) {
    nlohmann::json j;
    j["name"] = p.name;
    if (p.kind == ParameterKind::kCategorical) {
      j["kind"] = "categorical";
      j["values"] = p.labels;
    } else {
      j["kind"] = "ordinal";
      j["values"] = p.numeric;
      if (p.labels_by) {
        const auto& parent = params_[p.labels_by->parent];
        nlohmann::json table;
        for (std::size_t v = 0; v < parent.size(); ++v) {
          table[parent.labels[v]] = p.labels_by->numeric[v];
        }
        j["labels_by"] = {{"parameter", parent.name}, {"values", table}};
      }
    }
    doc["parameters"].push_back(j);
  }
  doc["fidelity_grid"] = fidelity_grid_;
  return doc;
}

void SearchSpace::CheckConfig(const Configuration& config) const {
  if (config.values.size() != params_.size()) {
    throw EncodingError("configuration has " +
                        std::to_string(config.values.size()) +
                        " values, space has " +
                        std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (config.values[i] >= params_[i].size()) {
      throw EncodingError("value index " + std::to_string(config.values[i]) +
                          " is not admissible for parameter '" +
                          params_[i].name + "'");
    }
  }
}

Configuration SearchSpace::ConfigAt(std::size_t config_index) const {
  if (config_index >= num_configs_) {
    throw UsageError("configuration index out of range");
  }
  Configuration c;
  c.values.resize(params_.size());
  for (std::size_t i = params_.size(); i-- > 0;) {
    const std::size_t n = params_[i].size();
    c.values[i] = static_cast<std::uint32_t>(config_index % n);
    config_index /= n;
  }
  return c;
}

std::size_t SearchSpace::ConfigIndex(const Configuration& config) const {
  CheckConfig(config);
  std::size_t index = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    index = index * params_[i].size() + config.values[i];
  }
  return index;
}

FidelityConfig SearchSpace::PointAt(std::size_t point_index) const {
  if (point_index >= num_points()) {
    throw UsageError("point index out of range");
  }
  FidelityConfig fc;
  fc.config = ConfigAt(ConfigOfPoint(point_index));
  fc.level = LevelOfPoint(point_index);
  fc.s = fidelity_grid_[fc.level];
  return fc;
}

std::size_t SearchSpace::PointIndex(const FidelityConfig& fc) const {
  if (fc.level >= num_levels() ||
      std::fabs(fidelity_grid_[fc.level] - fc.s) > kLevelTolerance) {
    throw EncodingError("sub-sampling rate " + FormatDouble(fc.s) +
                        " is not on the fidelity grid");
  }
  return PointIndex(ConfigIndex(fc.config), fc.level);
}

std::optional<std::size_t> SearchSpace::LevelOf(double s) const {
  for (std::size_t k = 0; k < fidelity_grid_.size(); ++k) {
    if (std::fabs(fidelity_grid_[k] - s) <=
        1e-6 * std::max(1e-3, fidelity_grid_[k])) {
      return k;
    }
  }
  return std::nullopt;
}

void SearchSpace::EncodeInto(const Configuration& config, double s,
                             std::span<double> out) const {
  CheckConfig(config);
  if (out.size() != feature_dim_) {
    throw UsageError("feature buffer has the wrong width");
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ParameterDef& p = params_[i];
    const std::uint32_t v = config.values[i];
    const std::size_t n = p.size();
    if (p.kind == ParameterKind::kOrdinal) {
      out[pos++] = n == 1 ? 0.0 : static_cast<double>(v) / (n - 1);
    } else if (n <= 2) {
      out[pos++] = static_cast<double>(v);
    } else {
      for (std::size_t k = 0; k < n; ++k) out[pos + k] = (k == v) ? 1.0 : 0.0;
      pos += n;
    }
  }
  out[pos] = s;
}

std::vector<double> SearchSpace::Encode(const FidelityConfig& fc) const {
  if (!LevelOf(fc.s)) {
    throw EncodingError("sub-sampling rate " + FormatDouble(fc.s) +
                        " is not on the fidelity grid");
  }
  std::vector<double> out(feature_dim_);
  EncodeInto(fc.config, fc.s, out);
  return out;
}

Matrix SearchSpace::EncodeAll() const {
  Matrix features(num_points(), feature_dim_);
  for (std::size_t c = 0; c < num_configs_; ++c) {
    const Configuration config = ConfigAt(c);
    for (std::size_t l = 0; l < num_levels(); ++l) {
      EncodeInto(config, fidelity_grid_[l], features.row(PointIndex(c, l)));
    }
  }
  return features;
}

std::string SearchSpace::ValueLabel(const Configuration& config,
                                    std::size_t param) const {
  CheckConfig(config);
  const ParameterDef& p = params_[param];
  const std::uint32_t v = config.values[param];
  if (p.labels_by) {
    return p.labels_by->labels[config.values[p.labels_by->parent]][v];
  }
  return p.labels[v];
}

std::uint32_t SearchSpace::ParseValue(std::size_t param, std::string_view text,
                                      const Configuration& partial) const {
  const ParameterDef& p = params_.at(param);
  auto fail = [&]() -> EncodingError {
    return EncodingError("value '" + std::string(text) +
                         "' is not admissible for parameter '" + p.name + "'");
  };
  if (p.kind == ParameterKind::kCategorical) {
    for (std::size_t k = 0; k < p.labels.size(); ++k) {
      if (p.labels[k] == text) return static_cast<std::uint32_t>(k);
    }
    throw fail();
  }
  const std::optional<double> number = ParseNumber(text);
  if (!number) throw fail();
  const std::vector<double>* row = &p.numeric;
  if (p.labels_by) {
    if (partial.values.size() <= p.labels_by->parent) {
      throw UsageError("parent of '" + p.name + "' must be parsed first");
    }
    row = &p.labels_by->numeric[partial.values[p.labels_by->parent]];
  }
  for (std::size_t k = 0; k < row->size(); ++k) {
    if (NumbersMatch(*number, (*row)[k])) return static_cast<std::uint32_t>(k);
  }
  throw fail();
}

std::string SearchSpace::Describe(const Configuration& config) const {
  std::ostringstream out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i > 0) out << ' ';
    out << params_[i].name << '=' << ValueLabel(config, i);
  }
  return out.str();
}

std::vector<FidelityConfig> Enumerate(const SearchSpace& space) {
  std::vector<FidelityConfig> out;
  out.reserve(space.num_points());
  for (std::size_t i = 0; i < space.num_points(); ++i) {
    out.push_back(space.PointAt(i));
  }
  return out;
}

std::vector<FidelityConfig> FullFidelitySlice(const SearchSpace& space) {
  std::vector<FidelityConfig> out;
  out.reserve(space.num_configs());
  for (std::size_t c = 0; c < space.num_configs(); ++c) {
    out.push_back(space.PointAt(space.PointIndex(c, space.full_level())));
  }
  return out;
}

std::vector<double> Encode(const SearchSpace& space, const FidelityConfig& fc) {
  return space.Encode(fc);
}

SearchSpace CloudTrainingSpace() {
  std::vector<ParameterDef> params;
  params.push_back(ParameterDef::Categorical(
      "vm_type", {"t2.small", "t2.medium", "t2.xlarge", "t2.2xlarge"}));
  ParameterDef n_vms = ParameterDef::Ordinal("n_vms", {1, 2, 3, 4, 5, 6});
  ParameterDef::LabelsBy relabel;
  relabel.parent = 0;
  relabel.numeric = {{8, 16, 32, 48, 64, 80},
                     {4, 8, 16, 24, 32, 40},
                     {2, 4, 8, 12, 16, 20},
                     {1, 2, 4, 6, 8, 10}};
  for (const auto& row : relabel.numeric) {
    std::vector<std::string> labels;
    for (double v : row) labels.push_back(FormatDouble(v));
    relabel.labels.push_back(std::move(labels));
  }
  n_vms.labels_by = std::move(relabel);
  params.push_back(std::move(n_vms));
  params.push_back(ParameterDef::Ordinal("learning_rate", {1e-5, 1e-4, 1e-3}));
  params.push_back(ParameterDef::Ordinal("batch_size", {16, 256}));
  params.push_back(ParameterDef::Categorical("sync_mode", {"sync", "async"}));
  return SearchSpace::Create(std::move(params), {0.0167, 0.1, 0.25, 0.5, 1.0});
}

}  // namespace subtune
