//
// Copyright 2026 The dprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPREP_ERROR_HPP_
#define DPREP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dprep {

// Numeric values are shared with the C API and with the CLI exit codes.
enum class ErrorCode : int {
  kOk = 0,
  kInternal = 1,
  kInvalidArgument = 2,
  kBudgetExceeded = 3,
  kSingularFit = 4,
  kData = 5,
  kIo = 6,
  kDegenerateInterval = 7,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& m)
      : Error(ErrorCode::kInvalidArgument, m) {}
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& m)
      : Error(ErrorCode::kBudgetExceeded, m) {}
};

// Raised when a fit is rank deficient or has too few rows. `subset` is -1 for
// a fit on the full data set.
class SingularFit : public Error {
 public:
  explicit SingularFit(const std::string& m, int subset = -1)
      : Error(ErrorCode::kSingularFit, m), subset_(subset) {}
  int subset() const noexcept { return subset_; }

 private:
  int subset_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error(ErrorCode::kData, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCode::kIo, m) {}
};

class DegenerateInterval : public Error {
 public:
  explicit DegenerateInterval(const std::string& m)
      : Error(ErrorCode::kDegenerateInterval, m) {}
};

}  // namespace dprep

#endif  // DPREP_ERROR_HPP_
