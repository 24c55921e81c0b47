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

#ifndef SUBTUNE_RANDOM_H_
#define SUBTUNE_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace subtune {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Order-sensitive combination of seed material into a single stream seed.
std::uint64_t DeriveSeed(std::initializer_list<std::uint64_t> parts);

// Hash of a feature vector (bit patterns of the doubles).
std::uint64_t HashFeatures(std::span<const double> values);

// Uniform double in [0, 1) with 53 random bits.
double UniformUnit(Rng& rng);

// Uniform index in [0, n).
std::size_t UniformIndex(Rng& rng, std::size_t n);

// Standard normal deviate.
double StandardNormal(Rng& rng);

}  // namespace subtune

#endif  // SUBTUNE_RANDOM_H_
