// Copyright 2026 The qstab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSTAB_ERRORS_H_
#define QSTAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace qstab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands of incompatible shape (non-square data, mismatched dimensions,
// wrong observation length).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// An iterative numerical routine hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The integrated state left the physical region beyond repair, or training
// produced non-finite parameters.
class TrajectoryDiverged : public Error {
 public:
  using Error::Error;
};

// API misuse at run time, e.g. stepping a finished episode.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A checkpoint cannot be used with the requested system.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace qstab

#endif  // QSTAB_ERRORS_H_
