/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LST_COMMON_HPP_
#define LST_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace lst {

// Large negative log-probability used instead of -inf wherever a score may
// later be multiplied by a zero weight or subtracted from another score.
inline constexpr double kLogSentinel = -1e30;

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the primitive.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input files.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN / divergence / degenerate numeric state.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lst

#endif  // LST_COMMON_HPP_
