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

#ifndef DPREP_STATS_HPP_
#define DPREP_STATS_HPP_

#include <span>
#include <vector>

namespace dprep {

// Sample quantile with linear interpolation between order statistics
// (Hyndman & Fan type 7). `values` need not be sorted.
double EmpiricalQuantile(std::span<const double> values, double p);
std::vector<double> EmpiricalQuantiles(std::span<const double> values,
                                       std::span<const double> probs);
double Mean(std::span<const double> values);
// Sample standard deviation (n - 1 divisor); 0 for fewer than two values.
double StdDev(std::span<const double> values);

}  // namespace dprep

#endif  // DPREP_STATS_HPP_
