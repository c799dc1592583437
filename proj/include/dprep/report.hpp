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

#ifndef DPREP_REPORT_HPP_
#define DPREP_REPORT_HPP_

// Release reports and their custodian-only companions. A release report
// carries only noised scalars, their posterior and echoed configuration;
// per-subset statistics live in the debug document and nowhere else.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dprep/ad_framework.hpp"
#include "dprep/am_framework.hpp"
#include "dprep/model.hpp"

namespace dprep::report {

using Json = nlohmann::ordered_json;

std::string EngineVersion();

struct Provenance {
  std::string timestamp;
  std::string engine_version;
  // "explicit", "env" or "entropy". The seed value itself regenerates the
  // noise, so it is never written to a release report.
  std::string seed_source;
};

Provenance MakeProvenance(std::string seed_source);

// Key names that must never appear in a release report.
const std::vector<std::string>& CustodianOnlyKeys();

// Every custodian-only key found anywhere in `doc`, depth first.
std::vector<std::string> FindCustodianKeys(const Json& doc);

// Throws Error(kInternal) if `doc` holds a custodian-only key.
void AuditRelease(const Json& doc);

// Infinite bounds are written as null.
Json Bound(double x);
double ParseBound(const Json& j, double if_null);

Json AdReport(const ad::Verification& v, const ad::AdConfig& config, const std::string& coef,
              const Provenance& provenance);
Json AdDebug(const ad::Verification& v, const ad::AdConfig& config, const std::string& coef);

struct InversionEcho {
  am::InversionAssumption assumption;
  std::string source;  // "null" or "explicit"
};

inline constexpr double kReportedMasses[] = {0.90, 0.95};

Json AmReport(const am::Verification& v, const am::AmConfig& config, const std::string& coef,
              const std::optional<InversionEcho>& inversion, const Provenance& provenance);
Json AmDebug(const am::Verification& v, const am::AmConfig& config, const std::string& coef);

// Recomputes the "summary" block of a release report from what the report
// itself stores (samples, released value, configuration).
Json SummarizeReport(const Json& report);

// Custodian-only local fit.
Json FitSummary(const FitResult& fit, const ModelSpec& m, double level);

}  // namespace dprep::report

#endif  // DPREP_REPORT_HPP_
