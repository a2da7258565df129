/*
 * Copyright 2026 The randalloc Authors.
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

#ifndef RANDALLOC_CORE_ERRORS_HPP_
#define RANDALLOC_CORE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace randalloc {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration (bounds, parameters, mechanism names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Inconsistent shapes between related inputs.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The requested metric needs ground truth that was not supplied.
class UnsupportedMetricError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Raised while reading tabular input. `row()` is the 1-based data row
// (header excluded), or 0 when the problem is not tied to a row.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::size_t row)
      : Error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"),
        row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace randalloc

#endif  // RANDALLOC_CORE_ERRORS_HPP_
