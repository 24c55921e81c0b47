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

#include "subtune/gp_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "subtune/errors.h"
#include "subtune/random.h"
#include "subtune/simd/kernels.h"

namespace subtune {
namespace {

constexpr double kMinLengthScale = 1e-3;
constexpr double kMaxLengthScale = 1e3;
constexpr double kSqrt5 = 2.23606797749978969640917366873128;

double Matern52(double r2) {
  const double r = std::sqrt(r2);
  const double sr = kSqrt5 * r;
  return (1.0 + sr + (5.0 / 3.0) * r2) * std::exp(-sr);
}

double BasisCoordinate(FidelityBasis basis, double s) {
  if (basis == FidelityBasis::kSaturating) {
    const double t = 1.0 - s;
    return t * t;
  }
  return s;
}

// Box constraints of the packed search vector.
struct SearchBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Packed layout: [log l_1..l_k, log signal, offdiag, log diag, (log noise)].
class Packing {
 public:
  Packing(std::size_t num_scales, bool fit_noise, double prior_mean,
          double fixed_noise)
      : num_scales_(num_scales),
        fit_noise_(fit_noise),
        prior_mean_(prior_mean),
        fixed_noise_(fixed_noise) {}

  std::size_t size() const { return num_scales_ + 3 + (fit_noise_ ? 1 : 0); }

  std::vector<double> Pack(const GpHyperparameters& hp) const {
    std::vector<double> t;
    for (double l : hp.length_scales) t.push_back(std::log(l));
    t.push_back(std::log(hp.signal_variance));
    t.push_back(hp.fidelity_offdiag);
    t.push_back(std::log(hp.fidelity_diag));
    if (fit_noise_) t.push_back(std::log(hp.noise_variance));
    return t;
  }

  GpHyperparameters Unpack(const std::vector<double>& t) const {
    GpHyperparameters hp;
    hp.length_scales.resize(num_scales_);
    for (std::size_t i = 0; i < num_scales_; ++i) {
      hp.length_scales[i] = std::exp(t[i]);
    }
    hp.signal_variance = std::exp(t[num_scales_]);
    hp.fidelity_offdiag = t[num_scales_ + 1];
    hp.fidelity_diag = std::exp(t[num_scales_ + 2]);
    hp.noise_variance = fit_noise_ ? std::exp(t[num_scales_ + 3]) : fixed_noise_;
    hp.prior_mean = prior_mean_;
    return hp;
  }

 private:
  std::size_t num_scales_;
  bool fit_noise_;
  double prior_mean_;
  double fixed_noise_;
};

}  // namespace

GpModel::GpModel(GpOptions options)
    : options_(options),
      basis_(options.role == TargetRole::kAccuracy
                 ? FidelityBasis::kSaturating
                 : FidelityBasis::kGrowing) {}

void GpModel::AttachData(const ObservationDataset& data) {
  features_ = data.features;
  targets_.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    targets_[i] = log_target() ? std::log(data.targets[i]) : data.targets[i];
  }
}

double GpModel::Kernel(std::span<const double> a,
                       std::span<const double> b) const {
  const std::size_t k = a.size() - 1;
  const double r2 =
      simd::Kernels().weighted_sq_dist(a.data(), b.data(), inv_ls2_.data(), k);
  const double pa = BasisCoordinate(basis_, a[k]);
  const double pb = BasisCoordinate(basis_, b[k]);
  const double c = hp_.fidelity_offdiag;
  const double d = hp_.fidelity_diag;
  const double fid = (1.0 + c * pa) * (1.0 + c * pb) + d * d * pa * pb;
  return hp_.signal_variance * Matern52(r2) * fid;
}

double GpModel::LogMarginalLikelihood(const GpHyperparameters& hp) const {
  // Evaluate on a scratch copy so the fitted state stays untouched.
  GpModel scratch(options_);
  scratch.basis_ = basis_;
  scratch.hp_ = hp;
  scratch.inv_ls2_.resize(hp.length_scales.size());
  for (std::size_t i = 0; i < hp.length_scales.size(); ++i) {
    scratch.inv_ls2_[i] = 1.0 / (hp.length_scales[i] * hp.length_scales[i]);
  }
  const std::size_t n = targets_.size();
  Matrix cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cov(i, j) = cov(j, i) =
          scratch.Kernel(features_.row(i), features_.row(j));
    }
    cov(i, i) += hp.noise_variance;
  }
  const CholeskyFactor factor = CholeskyWithJitter(cov);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = targets_[i] - hp.prior_mean;
  const std::vector<double> alpha = CholeskySolve(factor.lower, centered);
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += centered[i] * alpha[i];
  return -0.5 * quad - 0.5 * LogDetFromCholesky(factor.lower) -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

void GpModel::Fit(const ObservationDataset& data, std::uint64_t seed) {
  ValidateDataset(data);
  if (data.size() == 0) throw FitError("cannot fit a GP on an empty data-set");
  AttachData(data);

  const std::size_t n = targets_.size();
  const std::size_t num_scales = features_.cols() - 1;
  double mean = 0.0;
  for (double y : targets_) mean += y;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double y : targets_) var += (y - mean) * (y - mean);
  var /= static_cast<double>(n);
  const double floor = log_target() ? 1e-2 : 1e-4;
  const double scale = std::max(var, floor);

  const bool fit_noise = !options_.fixed_noise.has_value();
  const Packing packing(num_scales, fit_noise, mean,
                        options_.fixed_noise.value_or(0.0));
  SearchBox box;
  for (std::size_t i = 0; i < num_scales; ++i) {
    box.lo.push_back(std::log(kMinLengthScale));
    box.hi.push_back(std::log(kMaxLengthScale));
  }
  box.lo.push_back(std::log(scale / 100.0));
  box.hi.push_back(std::log(scale * 100.0));
  box.lo.push_back(-5.0);
  box.hi.push_back(5.0);
  box.lo.push_back(std::log(1e-2));
  box.hi.push_back(std::log(10.0));
  if (fit_noise) {
    box.lo.push_back(std::log(scale * 1e-6));
    box.hi.push_back(std::log(scale * 0.5));
  }

  auto objective = [&](const std::vector<double>& t) {
    try {
      const double v = LogMarginalLikelihood(packing.Unpack(t));
      return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  GpHyperparameters defaults;
  defaults.length_scales.assign(num_scales, 1.0);
  defaults.signal_variance = scale;
  defaults.fidelity_offdiag = 0.0;
  defaults.fidelity_diag = 1.0;
  defaults.noise_variance =
      fit_noise ? scale * 1e-2 : options_.fixed_noise.value();
  defaults.prior_mean = mean;

  Rng rng(seed);
  start_points_.clear();
  std::vector<double> best_theta;
  double best_value = -std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, options_.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> theta(packing.size());
    if (r == 0) {
      theta = packing.Pack(defaults);
    } else {
      for (std::size_t j = 0; j < theta.size(); ++j) {
        theta[j] = box.lo[j] + UniformUnit(rng) * (box.hi[j] - box.lo[j]);
      }
    }
    start_points_.push_back(packing.Unpack(theta));

    double value = objective(theta);
    int evaluations = 1;
    double step = 0.25;
    while (step > 1e-3 && evaluations < options_.max_evaluations) {
      bool improved = false;
      for (std::size_t j = 0;
           j < theta.size() && evaluations < options_.max_evaluations; ++j) {
        for (double direction : {1.0, -1.0}) {
          std::vector<double> trial = theta;
          trial[j] = std::clamp(
              theta[j] + direction * step * (box.hi[j] - box.lo[j]), box.lo[j],
              box.hi[j]);
          if (trial[j] == theta[j]) continue;
          const double v = objective(trial);
          ++evaluations;
          if (v > value) {
            theta = std::move(trial);
            value = v;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (best_theta.empty() || value > best_value) {
      best_theta = theta;
      best_value = value;
    }
  }
  if (!std::isfinite(best_value)) {
    throw FitError("GP marginal likelihood is not finite at any restart");
  }
  hp_ = packing.Unpack(best_theta);
  ComputePosterior();
}

GpModel GpModel::WithHyperparameters(GpOptions options, GpHyperparameters hp,
                                     const ObservationDataset& data) {
  GpModel model(options);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.targets[i])) {
      throw UsageError("non-finite target at row " + std::to_string(i));
    }
  }
  model.AttachData(data);
  model.hp_ = std::move(hp);
  model.ComputePosterior();
  return model;
}

void GpModel::ComputePosterior() {
  inv_ls2_.resize(hp_.length_scales.size());
  for (std::size_t i = 0; i < hp_.length_scales.size(); ++i) {
    inv_ls2_[i] = 1.0 / (hp_.length_scales[i] * hp_.length_scales[i]);
  }
  const std::size_t n = targets_.size();
  if (n > 0 && hp_.length_scales.size() != features_.cols() - 1) {
    throw UsageError("hyperparameters do not match the feature width");
  }
  Matrix cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cov(i, j) = cov(j, i) = Kernel(features_.row(i), features_.row(j));
    }
    cov(i, i) += hp_.noise_variance;
  }
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = targets_[i] - hp_.prior_mean;
  if (n > 0) {
    chol_ = CholeskyWithJitter(cov).lower;
    alpha_ = CholeskySolve(chol_, centered);
  } else {
    chol_ = Matrix();
    alpha_.clear();
  }
  fitted_ = true;
}

void GpModel::RequireFitted() const {
  if (!fitted_) throw UsageError("GP model used before fit()");
}

Prediction GpModel::PredictLatent(std::span<const double> z) const {
  RequireFitted();
  const std::size_t n = targets_.size();
  const double prior_var = Kernel(z, z);
  if (n == 0) return {hp_.prior_mean, std::sqrt(std::max(prior_var, 0.0))};
  std::vector<double> kstar(n);
  for (std::size_t i = 0; i < n; ++i) kstar[i] = Kernel(features_.row(i), z);
  const auto& k = simd::Kernels();
  const double mean = hp_.prior_mean + k.dot(kstar.data(), alpha_.data(), n);
  const std::vector<double> v = ForwardSubstitute(chol_, kstar);
  const double var = prior_var - k.dot(v.data(), v.data(), n);
  return {mean, std::sqrt(std::max(var, 0.0))};
}

std::vector<Prediction> GpModel::PredictLatentBatch(
    const Matrix& points) const {
  RequireFitted();
  const std::size_t n = targets_.size();
  const std::size_t m = points.rows();
  std::vector<Prediction> out(m);
  if (n == 0) {
    for (std::size_t j = 0; j < m; ++j) {
      out[j] = {hp_.prior_mean,
                std::sqrt(std::max(Kernel(points.row(j), points.row(j)), 0.0))};
    }
    return out;
  }
  Matrix kstar(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      kstar(i, j) = Kernel(features_.row(i), points.row(j));
    }
  }
  const Matrix vt = ForwardSubstitute(chol_, kstar).Transposed();
  const Matrix kt = kstar.Transposed();
  const auto& k = simd::Kernels();
  for (std::size_t j = 0; j < m; ++j) {
    const double mean = hp_.prior_mean + k.dot(kt.row(j).data(), alpha_.data(), n);
    const double var = Kernel(points.row(j), points.row(j)) -
                       k.dot(vt.row(j).data(), vt.row(j).data(), n);
    out[j] = {mean, std::sqrt(std::max(var, 0.0))};
  }
  return out;
}

JointPosterior GpModel::PredictJoint(const Matrix& points) const {
  RequireFitted();
  if (points.rows() == 0) throw UsageError("joint prediction over no points");
  const std::size_t n = targets_.size();
  const std::size_t m = points.rows();
  JointPosterior joint;
  joint.mean.assign(m, hp_.prior_mean);
  joint.covariance = Matrix(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      joint.covariance(a, b) = Kernel(points.row(a), points.row(b));
    }
  }
  if (n > 0) {
    Matrix kstar(n, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        kstar(i, j) = Kernel(features_.row(i), points.row(j));
      }
    }
    const Matrix vt = ForwardSubstitute(chol_, kstar).Transposed();
    const Matrix kt = kstar.Transposed();
    const auto& k = simd::Kernels();
    for (std::size_t a = 0; a < m; ++a) {
      joint.mean[a] += k.dot(kt.row(a).data(), alpha_.data(), n);
      for (std::size_t b = 0; b <= a; ++b) {
        joint.covariance(a, b) -= k.dot(vt.row(a).data(), vt.row(b).data(), n);
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      joint.covariance(b, a) = joint.covariance(a, b);
    }
  }
  return joint;
}

ModelPtr GpModel::Condition(std::span<const double> z, double y) const {
  RequireFitted();
  if (!std::isfinite(y)) throw UsageError("fantasy observation is not finite");
  if (log_target() && !(y > 0.0)) {
    throw UsageError("fantasy observation for a log-space model must be > 0");
  }
  auto next = std::make_shared<GpModel>(options_);
  next->hp_ = hp_;
  next->features_ = features_;
  next->features_.AppendRow(z);
  next->targets_ = targets_;
  next->targets_.push_back(log_target() ? std::log(y) : y);
  next->ComputePosterior();
  return next;
}

}  // namespace subtune
