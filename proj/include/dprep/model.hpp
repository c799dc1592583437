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

#ifndef DPREP_MODEL_HPP_
#define DPREP_MODEL_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dprep/dataset.hpp"

namespace dprep {

enum class Transform { kIdentity, kLog, kSquare };

struct Factor {
  std::string column;
  Transform transform = Transform::kIdentity;

  std::string Label() const;
  bool operator==(const Factor&) const = default;
};

// A product of one or more transformed columns. One factor is a main effect;
// two or more form an interaction.
struct Term {
  std::vector<Factor> factors;

  std::string Label() const;
  bool IsPlainColumn() const {
    return factors.size() == 1 && factors[0].transform == Transform::kIdentity;
  }
  bool operator==(const Term&) const = default;
};

struct ModelSpec {
  std::string response;
  std::vector<Term> terms;
  bool intercept = true;

  // Checks the ModelSpec invariants against `d`: response exists and is not a
  // term, every factor column exists, no term is repeated.
  void Validate(const Dataset& d) const;
  std::vector<std::string> CoefficientLabels() const;
};

inline constexpr std::string_view kInterceptLabel = "(Intercept)";

// Parses `response ~ term + term ...` where a term is `col`, `log(col)`,
// `sq(col)` or a `:`-joined product of those. `- 1` or `+ 0` drops the
// intercept; `y ~ 1` is the intercept-only model. A bare categorical column
// name expands to its indicator columns (so `age:race` becomes one
// interaction per non-reference race level).
ModelSpec ParseFormula(std::string_view formula, const Dataset& d);

// n x (p+1) with a leading column of ones when the intercept is on, then the
// term columns in ModelSpec order. Throws DataError for log of a
// non-positive value.
Eigen::MatrixXd DesignMatrix(const Dataset& d, const ModelSpec& m);

struct FitResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd stderrs;
  int residual_df = 0;
  double sigma2_hat = 0.0;
  std::vector<std::string> labels;

  // Position of a coefficient label; throws InvalidArgument if absent.
  std::size_t IndexOf(std::string_view label) const;
};

// Ordinary least squares via column-pivoted Householder QR on an
// equilibrated design. sigma2_hat = RSS / (n - p - 1) and
// stderr_j = sqrt(sigma2_hat * [(X'X)^-1]_jj). Throws SingularFit if
// n <= p + 1 or the design is rank deficient (pivot below 1e-10 of the
// largest).
FitResult FitOls(const Dataset& d, const ModelSpec& m);
FitResult FitOls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 std::vector<std::string> labels);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  double length() const { return upper - lower; }
  bool operator==(const ConfidenceInterval&) const = default;
};

// Equal-tailed Student-t interval around a coefficient. A zero standard
// error raises DegenerateInterval unless `allow_degenerate`, in which case a
// point interval is returned.
ConfidenceInterval MakeConfidenceInterval(const FitResult& f, std::size_t which,
                                          double level, bool allow_degenerate = false);

}  // namespace dprep

#endif  // DPREP_MODEL_HPP_
