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
#include <chrono>
#include <cmath>
#include <limits>

#include "subtune/errors.h"
#include "subtune/parallel.h"
#include "subtune/random.h"

namespace subtune {
namespace {

// Stream tags for DeriveSeed.
enum : std::uint64_t {
  kInitTag = 1,
  kOracleTag = 2,
  kRepresenterTag = 3,
  kNormalsTag = 4,
  kFilterTag = 5,
  kPickTag = 6,
  kFitTag = 7,
};

double Quantity(const Measurement& m, const std::string& role) {
  return role == "time" ? m.training_time_s : m.cost_usd;
}

bool Satisfies(const Measurement& m, const Constraint& c) {
  const double q = Quantity(m, c.role);
  return c.direction == ConstraintDirection::kAtMost ? q <= c.threshold
                                                     : q >= c.threshold;
}

void ValidateConstraints(const ConstraintSpec& spec) {
  for (const Constraint& c : spec.constraints) {
    if (c.role != "cost" && c.role != "time") {
      throw SpecError("unknown constraint role '" + c.role +
                      "' (expected cost or time)");
    }
    if (std::isnan(c.threshold) || !(c.threshold > 0.0)) {
      throw SpecError("constraint threshold on '" + c.role + "' must be > 0");
    }
  }
}

}  // namespace

double CostCap(const ConstraintSpec& spec) {
  double cap = std::numeric_limits<double>::infinity();
  for (const Constraint& c : spec.constraints) {
    if (c.role == "cost" && c.direction == ConstraintDirection::kAtMost) {
      cap = std::min(cap, c.threshold);
    }
  }
  return cap;
}

std::vector<std::size_t> LatinHypercubeConfigs(const SearchSpace& space,
                                               std::size_t n,
                                               std::uint64_t seed) {
  n = std::min(n, space.num_configs());
  Rng rng(seed);
  const auto& params = space.params();
  std::vector<std::vector<std::size_t>> perms(params.size());
  for (auto& perm : perms) {
    perm.resize(n);
    for (std::size_t j = 0; j < n; ++j) perm[j] = j;
    for (std::size_t j = n; j > 1; --j) {
      std::swap(perm[j - 1], perm[UniformIndex(rng, j)]);
    }
  }
  std::vector<bool> used(space.num_configs(), false);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t id = 0;
    bool fresh = false;
    for (int attempt = 0; attempt < 10 && !fresh; ++attempt) {
      Configuration config;
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double u = (static_cast<double>(perms[p][j]) + UniformUnit(rng)) /
                         static_cast<double>(n);
        const std::size_t size = params[p].size();
        config.values.push_back(static_cast<std::uint32_t>(std::min(
            static_cast<std::size_t>(u * static_cast<double>(size)), size - 1)));
      }
      id = space.ConfigIndex(config);
      fresh = !used[id];
    }
    while (used[id]) id = (id + 1) % space.num_configs();
    used[id] = true;
    out.push_back(id);
  }
  return out;
}

std::vector<std::size_t> InitLevels(const SearchSpace& space,
                                    const std::vector<double>& requested) {
  std::vector<std::size_t> levels;
  if (requested.empty()) {
    for (std::size_t l = 0; l < space.num_levels(); ++l) {
      if (space.fidelity_grid()[l] <= 0.5) levels.push_back(l);
    }
    if (levels.empty()) levels.push_back(0);
    return levels;
  }
  for (double s : requested) {
    const auto level = space.LevelOf(s);
    if (!level) {
      throw SpecError("init fidelity " + FormatDouble(s) +
                      " is not on the fidelity grid");
    }
    if (*level == space.full_level() && space.num_levels() > 1) {
      throw SpecError("init fidelities must be below 1.0");
    }
    if (std::find(levels.begin(), levels.end(), *level) == levels.end()) {
      levels.push_back(*level);
    }
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

Optimizer::Optimizer(OptimizerConfig config, const Oracle& oracle)
    : config_(std::move(config)), oracle_(oracle), space_(oracle.space()) {
  ValidateConstraints(config_.constraints);
  ValidateFilterPolicy(config_.filter);
  if (config_.max_iterations < 0) {
    throw SpecError("max_iterations must be >= 0");
  }
  if (config_.num_samples < 1) throw SpecError("num_samples must be >= 1");
  if (!(config_.incumbent_feasibility_threshold >= 0.0 &&
        config_.incumbent_feasibility_threshold <= 1.0)) {
    throw SpecError("incumbent feasibility threshold must lie in [0, 1]");
  }
  subsampling_ = UsesSubsampling(config_.acquisition);
  point_features_ = space_.EncodeAll();
  full_features_ = Matrix(space_.num_configs(), space_.feature_dim());
  for (std::size_t c = 0; c < space_.num_configs(); ++c) {
    const auto row = point_features_.row(space_.PointIndex(c, space_.full_level()));
    std::copy(row.begin(), row.end(), full_features_.row(c).begin());
  }
  representer_ids_ = SelectRepresenters(space_, Stream(kRepresenterTag));
  tested_.assign(space_.num_points(), false);
  accuracy_data_.role = TargetRole::kAccuracy;
  cost_data_.role = TargetRole::kCost;
  time_data_.role = TargetRole::kQos;
}

std::uint64_t Optimizer::Stream(std::uint64_t tag) const {
  return DeriveSeed({config_.seed, tag});
}

bool Optimizer::Searchable(std::size_t point) const {
  return subsampling_ || space_.LevelOfPoint(point) == space_.full_level();
}

std::vector<std::size_t> Optimizer::Untested() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < tested_.size(); ++p) {
    if (!tested_[p] && Searchable(p)) out.push_back(p);
  }
  return out;
}

void Optimizer::Record(std::size_t point, const Measurement& m) {
  if (tested_[point]) {
    throw UsageError("point " + std::to_string(point) + " evaluated twice");
  }
  tested_[point] = true;
  observations_.push_back({point, m});
  const auto z = point_features_.row(point);
  accuracy_data_.Add(z, m.accuracy);
  cost_data_.Add(z, m.cost_usd);
  time_data_.Add(z, m.training_time_s);
}

void Optimizer::Refit() {
  const std::uint64_t n = observations_.size();
  accuracy_model_ = FitSurrogate(config_.surrogate, accuracy_data_,
                                 DeriveSeed({config_.seed, kFitTag, 0, n}));
  cost_model_ = FitSurrogate(config_.surrogate, cost_data_,
                             DeriveSeed({config_.seed, kFitTag, 1, n}));
  time_model_.reset();
  for (const Constraint& c : config_.constraints.constraints) {
    if (c.role == "time") {
      time_model_ = FitSurrogate(config_.surrogate, time_data_,
                                 DeriveSeed({config_.seed, kFitTag, 2, n}));
      break;
    }
  }

  // Incumbent over the full-fidelity slice.
  const std::size_t m = space_.num_configs();
  std::vector<double> accuracy(m);
  std::vector<double> feasibility(m, 1.0);
  const std::vector<Prediction> acc = accuracy_model_->PredictLatentBatch(
      full_features_);
  for (std::size_t c = 0; c < m; ++c) accuracy[c] = acc[c].mean;
  for (const Constraint& c : config_.constraints.constraints) {
    const ModelPtr& model = c.role == "time" ? time_model_ : cost_model_;
    const std::vector<Prediction> q = model->PredictLatentBatch(full_features_);
    for (std::size_t k = 0; k < m; ++k) {
      feasibility[k] *= FeasibilityProbFromLatent(q[k], model->log_target(), c);
    }
  }
  const IncumbentChoice choice = ChooseIncumbent(
      accuracy, feasibility, config_.incumbent_feasibility_threshold);
  incumbent_ = {choice.index, choice.accuracy, choice.feasibility,
                choice.fallback};
}

RunRecord Optimizer::MakeRecord(double wall_seconds) const {
  RunRecord r;
  r.iteration = iteration_;
  r.cumulative_cost = cumulative_cost_;
  r.incumbent = incumbent_;
  const Measurement truth =
      oracle_.Truth(space_.PointIndex(incumbent_.config, space_.full_level()));
  r.true_accuracy = truth.accuracy;
  r.true_cost = truth.cost_usd;
  r.constrained_accuracy = ConstrainedAccuracy(
      truth.accuracy, truth.cost_usd, CostCap(config_.constraints));
  r.selected_point = last_selected_;
  r.num_candidates = last_candidates_.size();
  r.wall_seconds = wall_seconds;
  return r;
}

RunRecord Optimizer::Initialize() {
  if (initialized_) throw UsageError("optimizer already initialized");
  const auto start = std::chrono::steady_clock::now();
  const InitMode mode =
      config_.init != InitMode::kAuto
          ? config_.init
          : (subsampling_ ? InitMode::kSubsampled : InitMode::kLatinHypercube);
  const std::uint64_t oracle_seed = Stream(kOracleTag);
  if (mode == InitMode::kSubsampled) {
    Rng rng(Stream(kInitTag));
    const std::size_t config = UniformIndex(rng, space_.num_configs());
    double charged = 0.0;
    for (std::size_t level : InitLevels(space_, config_.init_fidelities)) {
      const std::size_t point = space_.PointIndex(config, level);
      const Measurement m =
          oracle_.Evaluate(point, oracle_seed, observations_.size());
      Record(point, m);
      charged = m.cost_usd;  // levels ascend: the largest fidelity wins
    }
    cumulative_cost_ = charged;
  } else {
    const auto configs =
        LatinHypercubeConfigs(space_, static_cast<std::size_t>(
                                          std::max(1, config_.lhs_samples)),
                              Stream(kInitTag));
    for (std::size_t config : configs) {
      const std::size_t point = space_.PointIndex(config, space_.full_level());
      const Measurement m =
          oracle_.Evaluate(point, oracle_seed, observations_.size());
      Record(point, m);
      cumulative_cost_ += m.cost_usd;
    }
  }
  Refit();
  initialized_ = true;
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  return MakeRecord(elapsed.count());
}

double Optimizer::ObservedIncumbentValue() const {
  double eta = 0.0;
  bool any = false;
  for (const Observation& o : observations_) {
    bool ok = true;
    for (const Constraint& c : config_.constraints.constraints) {
      ok = ok && Satisfies(o.value, c);
    }
    if (ok && (!any || o.value.accuracy > eta)) {
      eta = o.value.accuracy;
      any = true;
    }
  }
  return eta;
}

AcquisitionContext Optimizer::BuildContext() const {
  if (!initialized_) throw UsageError("optimizer used before Initialize()");
  AcquisitionContext ctx;
  ctx.accuracy = accuracy_model_;
  ctx.cost = cost_model_;
  ctx.constraints = config_.constraints;
  for (const Constraint& c : config_.constraints.constraints) {
    ctx.constraint_models.push_back(c.role == "time" ? time_model_
                                                     : cost_model_);
  }
  ctx.eta = ObservedIncumbentValue();
  ctx.feasibility_threshold = config_.incumbent_feasibility_threshold;
  ctx.representer_ids = representer_ids_;
  ctx.representers = Matrix(representer_ids_.size(), space_.feature_dim());
  for (std::size_t r = 0; r < representer_ids_.size(); ++r) {
    const auto row = full_features_.row(representer_ids_[r]);
    std::copy(row.begin(), row.end(), ctx.representers.row(r).begin());
  }
  if (config_.surrogate.kind == SurrogateKind::kGp &&
      UsesSubsampling(config_.acquisition)) {
    ctx.normals = StandardNormals(
        static_cast<std::size_t>(config_.num_samples), representer_ids_.size(),
        DeriveSeed({config_.seed, kNormalsTag,
                    static_cast<std::uint64_t>(iteration_ + 1)}));
  }
  return ctx;
}

std::optional<RunRecord> Optimizer::Step() {
  if (!initialized_) throw UsageError("optimizer used before Initialize()");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::size_t> untested = Untested();
  if (untested.empty()) return std::nullopt;
  const std::uint64_t round = static_cast<std::uint64_t>(iteration_ + 1);

  std::size_t chosen;
  const bool random_pick =
      config_.acquisition == AcquisitionKind::kRandom ||
      observations_.size() < 2;
  if (random_pick) {
    const FilterPolicy policy =
        config_.acquisition == AcquisitionKind::kRandom
            ? FilterPolicy{FilterKind::kNone, 1.0}
            : config_.filter;
    const AcquisitionContext ctx = BuildContext();
    last_candidates_ = SelectCandidates(policy, untested, point_features_, ctx,
                                        DeriveSeed({config_.seed, kFilterTag,
                                                    round}),
                                        config_.jobs);
    Rng rng(DeriveSeed({config_.seed, kPickTag, round}));
    std::vector<std::size_t> pool = last_candidates_;
    std::sort(pool.begin(), pool.end());
    chosen = pool[UniformIndex(rng, pool.size())];
    if (config_.acquisition == AcquisitionKind::kRandom) {
      last_candidates_.clear();
    }
  } else {
    const AcquisitionContext ctx = BuildContext();
    last_candidates_ = SelectCandidates(
        config_.filter, untested, point_features_, ctx,
        DeriveSeed({config_.seed, kFilterTag, round}), config_.jobs);
    std::vector<double> scores(last_candidates_.size());
    ParallelFor(last_candidates_.size(), config_.jobs, [&](std::size_t i) {
      scores[i] = Score(config_.acquisition, ctx,
                        point_features_.row(last_candidates_[i]));
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[best] ||
          (scores[i] == scores[best] &&
           last_candidates_[i] < last_candidates_[best])) {
        best = i;
      }
    }
    chosen = last_candidates_[best];
  }

  const Measurement m =
      oracle_.Evaluate(chosen, Stream(kOracleTag), observations_.size());
  Record(chosen, m);
  cumulative_cost_ += m.cost_usd;
  last_selected_ = chosen;
  ++iteration_;
  Refit();
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  return MakeRecord(elapsed.count());
}

RunTrace Optimizer::Run() {
  RunTrace trace;
  trace.records.push_back(Initialize());
  for (int i = 0; i < config_.max_iterations; ++i) {
    auto record = Step();
    if (!record) break;
    trace.records.push_back(*record);
  }
  return trace;
}

}  // namespace subtune
