/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEMSTEER_ERROR_H_
#define SEMSTEER_ERROR_H_

#include <stdexcept>
#include <string>

namespace semsteer {

// Base class of every error raised by the library. Callers that do not care
// about the category can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point cloud (or a query that must produce one) ended up with no points.
class EmptyCloudError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters: bad intrinsics, unknown preset, out-of-range ratios.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shapes or widths that do not chain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed input files (binary containers, oxts lines, manifests).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Numerical blow-up: non-finite time constants, losses or gradients.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Low-speed frames where the bicycle-model steering is not defined.
class LowSpeedError : public Error {
 public:
  using Error::Error;
};

}  // namespace semsteer

#endif  // SEMSTEER_ERROR_H_
