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

#ifndef DPREP_DP_MECHANISM_HPP_
#define DPREP_DP_MECHANISM_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dprep/rng.hpp"

namespace dprep {

struct PrivacyParams {
  double epsilon;

  // Throws InvalidArgument unless epsilon > 0 and finite.
  explicit PrivacyParams(double eps);
};

// The only kind of value allowed to leave the custodian.
struct NoisyRelease {
  double value = 0.0;
  double epsilon_spent = 0.0;
  double sensitivity = 0.0;
  std::string mechanism = "laplace";
  std::string timestamp;
  std::string label;
};

// Draw from Laplace(0, scale) by inversion of one 64-bit uniform.
double LaplaceSample(RngStream& rng, double scale);

// Append-only record of every release, optionally capped. When opened on a
// path the ledger is mirrored to a newline-delimited JSON file; each append
// takes an exclusive advisory lock, re-reads the file so that concurrent
// processes see each other's spend, checks the cap and writes the record
// before the released value is handed back.
class BudgetLedger {
 public:
  explicit BudgetLedger(std::optional<double> cap = std::nullopt);
  static BudgetLedger Open(const std::string& path, std::optional<double> cap = std::nullopt);

  BudgetLedger(BudgetLedger&&) noexcept;
  BudgetLedger& operator=(BudgetLedger&&) noexcept;
  ~BudgetLedger();

  std::optional<double> cap() const { return cap_; }
  const std::string& path() const { return path_; }
  // Re-reads the backing file, if any.
  void Refresh();
  double Spent() const;
  std::optional<double> Remaining() const;
  std::vector<NoisyRelease> entries() const;

 private:
  friend NoisyRelease ReleaseScalar(double, double, const PrivacyParams&, BudgetLedger&,
                                    RngStream&, std::string_view);
  NoisyRelease Commit(double sensitivity, double epsilon, std::string_view label,
                      const std::function<double()>& draw);

  std::optional<double> cap_;
  std::string path_;
  std::vector<NoisyRelease> entries_;
  double spent_ = 0.0;
  std::unique_ptr<std::mutex> mu_;
};

// Laplace mechanism: true_value + Laplace(sensitivity / epsilon). The value
// is returned unclamped. Throws BudgetExceeded, before any noise is drawn, if
// the ledger's cap would be exceeded.
NoisyRelease ReleaseScalar(double true_value, double sensitivity, const PrivacyParams& params,
                           BudgetLedger& ledger, RngStream& rng, std::string_view label = "");

struct BudgetStatus {
  double spent = 0.0;
  std::optional<double> remaining;
  std::size_t releases = 0;
};

BudgetStatus GetBudgetStatus(const BudgetLedger& ledger);

// Sink for operational warnings (uncapped releases). Defaults to stderr.
void SetWarningSink(std::function<void(std::string_view)> sink);
void Warn(std::string_view message);

std::string UtcTimestamp();

}  // namespace dprep

#endif  // DPREP_DP_MECHANISM_HPP_
