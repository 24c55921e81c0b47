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

#ifndef SUBTUNE_TESTS_FIXED_MODEL_H_
#define SUBTUNE_TESTS_FIXED_MODEL_H_

#include <functional>
#include <memory>
#include <span>

#include "subtune/errors.h"
#include "subtune/surrogate.h"

namespace subtune::testing {

// Model double with a prescribed latent posterior. Joint prediction and
// conditioning are unsupported.
class FixedModel final : public SurrogateModel {
 public:
  using Fn = std::function<Prediction(std::span<const double>)>;
  FixedModel(bool log_target, Fn fn)
      : log_target_(log_target), fn_(std::move(fn)) {}

  bool fitted() const override { return true; }
  bool log_target() const override { return log_target_; }
  std::size_t num_observations() const override { return 0; }
  Prediction PredictLatent(std::span<const double> z) const override {
    return fn_(z);
  }
  JointPosterior PredictJoint(const Matrix&) const override {
    throw UsageError("not supported by the test double");
  }
  ModelPtr Condition(std::span<const double>, double) const override {
    throw UsageError("not supported by the test double");
  }

 private:
  bool log_target_;
  Fn fn_;
};

inline ModelPtr Fixed(double mean, double std, bool log_target = false) {
  return std::make_shared<FixedModel>(
      log_target,
      [=](std::span<const double>) -> Prediction { return {mean, std}; });
}

}  // namespace subtune::testing

#endif  // SUBTUNE_TESTS_FIXED_MODEL_H_
