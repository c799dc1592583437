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

#ifndef DPREP_PIPELINE_HPP_
#define DPREP_PIPELINE_HPP_

// Command orchestration driven by JSON configuration objects. These are the
// operations behind the C API and the command-line tool; keys are
// documented in README.md.

#include <optional>
#include <string>

#include "dprep/dataset.hpp"
#include "dprep/dp_mechanism.hpp"
#include "dprep/report.hpp"

namespace dprep::pipeline {

using report::Json;

struct RunResult {
  Json report;
  std::optional<Json> debug;  // only when requested
};

// Each verify call appends exactly one ledger entry, before the report is
// built, or throws without touching the ledger.
RunResult AdVerify(const Dataset& d, const Json& config, BudgetLedger& ledger,
                   bool unsafe_debug);
RunResult AmVerify(const Dataset& d, const Json& config, BudgetLedger& ledger,
                   bool unsafe_debug);

// Budget-free simulations; return CSV text.
std::string AdMselect(const Json& config);
std::string AmContour(const Json& config);

Json Invert(const Json& config);
Json Fit(const Dataset& d, const Json& config);

}  // namespace dprep::pipeline

#endif  // DPREP_PIPELINE_HPP_
