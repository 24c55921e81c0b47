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

#include "subtune/oracle.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "subtune/errors.h"
#include "subtune/linalg.h"
#include "subtune/random.h"

namespace subtune {
namespace {

constexpr const char* kMeasurementColumns[] = {
    "dataset_frac", "replicate", "accuracy", "training_time_s", "cost_usd"};

std::string Trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  text = text.substr(b, e - b);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    text = text.substr(1, text.size() - 2);
  }
  return std::string(text);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(Trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos
                                          : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool ParseNumber(const std::string& text, double& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string FormatFraction(double s) {
  std::string text = FormatDouble(s);
  if (text.find_first_of(".eE") == std::string::npos) text += ".0";
  return text;
}

}  // namespace

double ConstrainedAccuracy(double true_accuracy, double true_cost,
                           double cost_cap) {
  if (true_cost <= cost_cap) return true_accuracy;
  // Exact when true_cost is a power-of-two multiple of cost_cap.
  return true_accuracy * (cost_cap / true_cost);
}

std::string ColumnMapping::Resolve(const std::string& canonical) const {
  auto it = columns.find(canonical);
  return it == columns.end() ? canonical : it->second;
}

ColumnMapping ColumnMapping::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open column mapping '" + path + "'");
  ColumnMapping mapping;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    for (const auto& [key, value] : doc.at("columns").items()) {
      mapping.columns[key] = value.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("column mapping '" + path + "': " + e.what());
  }
  return mapping;
}

std::vector<std::string> TraceHeader(const SearchSpace& space) {
  std::vector<std::string> header;
  for (const auto& p : space.params()) header.push_back(p.name);
  for (const char* c : kMeasurementColumns) header.emplace_back(c);
  return header;
}

TraceTable::TraceTable(SearchSpace space,
                       std::vector<std::vector<Replicate>> rows)
    : space_(std::move(space)), rows_(std::move(rows)) {
  if (rows_.size() != space_.num_points()) {
    throw SpecError("trace table does not have one entry per point");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].empty()) {
      throw SpecError("point " + std::to_string(i) + " has no replicate");
    }
    std::sort(rows_[i].begin(), rows_[i].end(),
              [](const Replicate& a, const Replicate& b) { return a.id < b.id; });
  }
}

TraceTable TraceTable::Load(const std::string& path, const SearchSpace& space,
                            const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open trace file '" + path + "'");
  return Parse(in, space, mapping, path);
}

TraceTable TraceTable::Parse(std::istream& in, const SearchSpace& space,
                             const ColumnMapping& mapping,
                             const std::string& source) {
  auto fail = [&](std::size_t line, const std::string& what) {
    throw LoadError(source + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    header = SplitCsv(line);
    break;
  }
  if (header.empty()) throw LoadError(source + ": empty trace file");

  const std::vector<std::string> canonical = TraceHeader(space);
  std::vector<std::size_t> column_of(canonical.size());
  for (std::size_t c = 0; c < canonical.size(); ++c) {
    const std::string name = mapping.Resolve(canonical[c]);
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw LoadError(source + ": missing column '" + name + "'");
    }
    column_of[c] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t num_params = space.params().size();

  std::vector<std::vector<Replicate>> rows(space.num_points());
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(cells.size()));
    }
    Configuration config;
    config.values.assign(num_params, 0);
    for (std::size_t p = 0; p < num_params; ++p) {
      try {
        config.values[p] = space.ParseValue(p, cells[column_of[p]], config);
      } catch (const EncodingError& e) {
        fail(line_no, e.what());
      }
    }
    double numbers[5];
    for (std::size_t k = 0; k < 5; ++k) {
      const std::string& cell = cells[column_of[num_params + k]];
      if (!ParseNumber(cell, numbers[k]) || !std::isfinite(numbers[k])) {
        fail(line_no, std::string("bad number '") + cell + "' in column " +
                          kMeasurementColumns[k]);
      }
    }
    const auto level = space.LevelOf(numbers[0]);
    if (!level) {
      fail(line_no, "dataset_frac " + cells[column_of[num_params]] +
                        " is not on the fidelity grid");
    }
    if (numbers[1] != std::floor(numbers[1])) {
      fail(line_no, "replicate must be an integer");
    }
    const Measurement m{numbers[2], numbers[3], numbers[4]};
    if (m.accuracy < 0.0 || m.accuracy > 1.0) {
      fail(line_no, "accuracy outside [0, 1]");
    }
    if (!(m.training_time_s > 0.0)) fail(line_no, "training_time_s must be > 0");
    if (!(m.cost_usd > 0.0)) fail(line_no, "cost_usd must be > 0");
    const std::size_t point =
        space.PointIndex(space.ConfigIndex(config), *level);
    const int id = static_cast<int>(numbers[1]);
    for (const Replicate& r : rows[point]) {
      if (r.id == id) fail(line_no, "duplicate replicate " + std::to_string(id));
    }
    rows[point].push_back({id, m});
  }

  std::vector<std::size_t> missing;
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p].empty()) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << source << ": " << missing.size() << " configuration(s) missing:";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 5); ++i) {
      const FidelityConfig fc = space.PointAt(missing[i]);
      msg << " [" << space.Describe(fc.config)
          << ", dataset_frac=" << FormatFraction(fc.s) << "]";
    }
    if (missing.size() > 5) msg << " ...";
    throw LoadError(msg.str());
  }
  return TraceTable(space, std::move(rows));
}

void TraceTable::Write(std::ostream& out) const {
  const std::vector<std::string> header = TraceHeader(space_);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << "\n";
  for (std::size_t point = 0; point < rows_.size(); ++point) {
    const FidelityConfig fc = space_.PointAt(point);
    std::string key;
    for (std::size_t p = 0; p < space_.params().size(); ++p) {
      key += space_.ValueLabel(fc.config, p);
      key += ",";
    }
    key += FormatFraction(fc.s);
    for (const Replicate& r : rows_[point]) {
      out << key << "," << r.id << "," << FormatDouble(r.value.accuracy) << ","
          << FormatDouble(r.value.training_time_s) << ","
          << FormatDouble(r.value.cost_usd) << "\n";
    }
  }
}

void TraceTable::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write trace file '" + path + "'");
  Write(out);
}

Measurement TraceTable::Evaluate(std::size_t point, std::uint64_t seed,
                                 std::uint64_t call_index) const {
  if (point >= rows_.size()) {
    throw EvaluationError("point " + std::to_string(point) +
                          " is not covered by the trace");
  }
  Rng rng(DeriveSeed({seed, point, call_index}));
  const auto& reps = rows_[point];
  return reps[UniformIndex(rng, reps.size())].value;
}

Measurement TraceTable::Truth(std::size_t point) const {
  if (point >= rows_.size()) {
    throw EvaluationError("point " + std::to_string(point) +
                          " is not covered by the trace");
  }
  const auto& reps = rows_[point];
  std::vector<double> acc, time, cost;
  for (const Replicate& r : reps) {
    acc.push_back(r.value.accuracy);
    time.push_back(r.value.training_time_s);
    cost.push_back(r.value.cost_usd);
  }
  return {StableMean(acc), StableMean(time), StableMean(cost)};
}

SyntheticBenchmark::SyntheticBenchmark(SearchSpace space,
                                       std::vector<Latent> latents,
                                       double noise_std, double cost_cap)
    : space_(std::move(space)),
      latents_(std::move(latents)),
      noise_std_(noise_std),
      cost_cap_(cost_cap) {
  if (latents_.size() != space_.num_configs()) {
    throw SpecError("synthetic benchmark needs one latent per configuration");
  }
  if (!(noise_std_ >= 0.0)) throw SpecError("noise_std must be >= 0");
  for (const Latent& l : latents_) {
    if (!(l.a_inf >= 0.0 && l.a_inf <= 1.0) || !(l.kappa > 0.0) ||
        !(l.rho > 0.0)) {
      throw SpecError("synthetic latent out of range");
    }
  }
}

namespace {

// Share of configurations that are feasible at `cap` and within 5% of the
// best feasible full-fidelity accuracy.
double NearOptimalShare(const std::vector<SyntheticBenchmark::Latent>& latents,
                        double cap) {
  double best = -1.0;
  for (const auto& l : latents) {
    if (l.rho <= cap) best = std::max(best, l.a_inf / (1.0 + l.kappa));
  }
  if (best < 0.0) return 0.0;
  std::size_t count = 0;
  for (const auto& l : latents) {
    if (l.rho <= cap && l.a_inf / (1.0 + l.kappa) >= 0.95 * best) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(latents.size());
}

}  // namespace

SyntheticBenchmark SyntheticBenchmark::Generate(
    SearchSpace space, const SyntheticOptions& options) {
  Rng rng(DeriveSeed({options.seed, 0x73796e7468ULL}));
  const auto& params = space.params();
  std::vector<std::vector<double>> acc_effect(params.size());
  std::vector<std::vector<double>> cost_effect(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t v = 0; v < params[p].size(); ++v) {
      acc_effect[p].push_back(StandardNormal(rng));
      cost_effect[p].push_back(0.5 * StandardNormal(rng));
    }
  }

  const std::size_t n = space.num_configs();
  std::vector<double> score(n);
  std::vector<double> log_rho(n);
  std::vector<double> kappa(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Configuration config = space.ConfigAt(c);
    double a = 0.5 * StandardNormal(rng);
    double r = std::log(0.02) + 0.3 * StandardNormal(rng);
    for (std::size_t p = 0; p < params.size(); ++p) {
      a += acc_effect[p][config.values[p]];
      r += cost_effect[p][config.values[p]];
    }
    score[c] = a;
    log_rho[c] = r;
    kappa[c] = 0.02 * std::exp(0.3 * StandardNormal(rng));
  }
  // Better configurations tend to cost more.
  const double mean = StableMean(score);
  double var = 0.0;
  for (double a : score) var += (a - mean) * (a - mean);
  const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
  std::vector<double> rho(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double standardized = sd > 0.0 ? (score[c] - mean) / sd : 0.0;
    rho[c] = std::exp(log_rho[c] + 0.3 * standardized);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  std::vector<double> percentile(n, 1.0);
  for (std::size_t k = 0; k < n && n > 1; ++k) {
    percentile[order[k]] = static_cast<double>(k) / static_cast<double>(n - 1);
  }

  std::vector<double> sorted_rho = rho;
  std::sort(sorted_rho.begin(), sorted_rho.end());
  const double q = std::clamp(options.feasible_quantile, 0.0, 1.0);
  const double cap = sorted_rho[static_cast<std::size_t>(
      std::floor(q * static_cast<double>(n - 1)))];

  auto build = [&](double gamma) {
    std::vector<Latent> latents(n);
    for (std::size_t c = 0; c < n; ++c) {
      latents[c] = {0.5 + 0.48 * std::pow(percentile[c], gamma), kappa[c],
                    rho[c]};
    }
    return latents;
  };
  // The near-optimal share shrinks as gamma grows.
  double lo = std::log(0.05);
  double hi = std::log(50.0);
  double best_gamma = 1.0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double share = NearOptimalShare(build(std::exp(mid)), cap);
    const double gap = std::abs(share - options.near_optimal_target);
    if (gap < best_gap) {
      best_gap = gap;
      best_gamma = std::exp(mid);
    }
    if (share > options.near_optimal_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return SyntheticBenchmark(std::move(space), build(best_gamma),
                            options.noise_std, cap);
}

Measurement SyntheticBenchmark::Truth(std::size_t point) const {
  if (point >= space_.num_points()) {
    throw EvaluationError("point " + std::to_string(point) +
                          " is outside the synthetic space");
  }
  const Latent& l = latents_[space_.ConfigOfPoint(point)];
  const double s = space_.fidelity_grid()[space_.LevelOfPoint(point)];
  const double cost = l.rho * s;
  return {l.a_inf * s / (s + l.kappa), cost * kSecondsPerUsd, cost};
}

Measurement SyntheticBenchmark::Evaluate(std::size_t point, std::uint64_t seed,
                                         std::uint64_t call_index) const {
  Measurement m = Truth(point);
  if (noise_std_ == 0.0) return m;
  Rng rng(DeriveSeed({seed, point, call_index}));
  m.accuracy = std::clamp(m.accuracy + noise_std_ * StandardNormal(rng), 0.0,
                          1.0);
  const double factor = std::max(1.0 + noise_std_ * StandardNormal(rng), 0.1);
  m.cost_usd *= factor;
  m.training_time_s *= factor;
  return m;
}

TraceTable SyntheticBenchmark::ToTraceTable(int replicates,
                                            std::uint64_t seed) const {
  if (replicates < 1) throw UsageError("replicates must be positive");
  std::vector<std::vector<TraceTable::Replicate>> rows(space_.num_points());
  for (std::size_t point = 0; point < rows.size(); ++point) {
    for (int r = 0; r < replicates; ++r) {
      rows[point].push_back(
          {r, Evaluate(point, seed, static_cast<std::uint64_t>(r))});
    }
  }
  return TraceTable(space_, std::move(rows));
}

}  // namespace subtune
