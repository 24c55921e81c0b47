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

#ifndef SUBTUNE_ERRORS_H_
#define SUBTUNE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace subtune {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value that is not admissible for a search-space parameter.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or calling sequence (e.g. predicting with an unfitted
// model, zero samples requested).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Surrogate fitting failed on the supplied data.
class FitError : public Error {
 public:
  using Error::Error;
};

// A factorization did not succeed even after jitter escalation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed constraint / space / run specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Oracle could not answer for a configuration.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Trace or definition file could not be loaded.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace subtune

#endif  // SUBTUNE_ERRORS_H_
