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

#ifndef DPREP_SPECIAL_HPP_
#define DPREP_SPECIAL_HPP_

namespace dprep {

double NormalCdf(double x);

// Standard normal quantile. Throws InvalidArgument unless 0 < p < 1.
double NormalQuantile(double p);

// Student-t quantile with `df` degrees of freedom; df = +infinity gives the
// normal quantile. Strictly increasing in p, and TQuantile(df, 0.5) == 0.
double TQuantile(double df, double p);

}  // namespace dprep

#endif  // DPREP_SPECIAL_HPP_
