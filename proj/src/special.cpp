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

#include "dprep/special.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "dprep/error.hpp"

namespace dprep {
namespace {

void CheckProbability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "probability must lie in (0, 1), got " << p;
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double NormalQuantile(double p) {
  CheckProbability(p);
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double TQuantile(double df, double p) {
  CheckProbability(p);
  if (!(df > 0.0)) throw InvalidArgument("t quantile needs df > 0");
  if (p == 0.5) return 0.0;
  if (std::isinf(df)) return NormalQuantile(p);
  return boost::math::quantile(boost::math::students_t_distribution<double>(df),
                               p);
}

}  // namespace dprep
