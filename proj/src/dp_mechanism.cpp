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

#include "dprep/dp_mechanism.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <sstream>

#include "dprep/error.hpp"
#include "json.hpp"

namespace dprep {
namespace {

std::mutex& SinkMutex() {
  static std::mutex mu;
  return mu;
}

std::function<void(std::string_view)>& Sink() {
  static std::function<void(std::string_view)> sink = [](std::string_view m) {
    std::cerr << "dprep: warning: " << m << std::endl;
  };
  return sink;
}

std::string Serialize(const NoisyRelease& r) {
  nlohmann::json j = {{"timestamp", r.timestamp},     {"mechanism", r.mechanism},
                      {"sensitivity", r.sensitivity}, {"epsilon", r.epsilon_spent},
                      {"value", r.value},             {"label", r.label}};
  return j.dump();
}

std::vector<NoisyRelease> ParseLedger(const std::string& text, const std::string& path) {
  std::vector<NoisyRelease> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      NoisyRelease r;
      r.timestamp = j.at("timestamp").get<std::string>();
      r.mechanism = j.at("mechanism").get<std::string>();
      r.sensitivity = j.at("sensitivity").get<double>();
      r.epsilon_spent = j.at("epsilon").get<double>();
      r.value = j.at("value").get<double>();
      r.label = j.value("label", "");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("ledger " + path + " line " + std::to_string(line_no) +
                    " is corrupt: " + e.what());
    }
  }
  return out;
}

// Holds an exclusive flock on the ledger file for its lifetime.
class LockedFile {
 public:
  explicit LockedFile(const std::string& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0600);
    if (fd_ < 0) throw IoError("cannot open ledger '" + path + "'");
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError("cannot lock ledger '" + path + "'");
    }
  }
  ~LockedFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  LockedFile(const LockedFile&) = delete;
  LockedFile& operator=(const LockedFile&) = delete;

  std::string ReadAll() const {
    std::string text;
    char buf[4096];
    off_t offset = 0;
    for (;;) {
      const ssize_t got = ::pread(fd_, buf, sizeof buf, offset);
      if (got < 0) throw IoError("cannot read ledger '" + path_ + "'");
      if (got == 0) break;
      text.append(buf, static_cast<std::size_t>(got));
      offset += got;
    }
    return text;
  }

  void AppendLine(const std::string& line) const {
    const std::string data = line + "\n";
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t put = ::write(fd_, data.data() + done, data.size() - done);
      if (put < 0) throw IoError("cannot append to ledger '" + path_ + "'");
      done += static_cast<std::size_t>(put);
    }
    if (::fsync(fd_) != 0) throw IoError("cannot sync ledger '" + path_ + "'");
  }

 private:
  std::string path_;
  int fd_ = -1;
};

double Sum(const std::vector<NoisyRelease>& entries) {
  double total = 0.0;
  for (const auto& e : entries) total += e.epsilon_spent;
  return total;
}

}  // namespace

PrivacyParams::PrivacyParams(double eps) : epsilon(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("epsilon must be a positive finite number");
  }
}

double LaplaceSample(RngStream& rng, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgument("Laplace scale must be positive and finite");
  }
  const double u = rng.Uniform() - 0.5;
  return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::fabs(u));
}

BudgetLedger::BudgetLedger(std::optional<double> cap)
    : cap_(cap), mu_(std::make_unique<std::mutex>()) {
  if (cap_ && !(*cap_ > 0.0)) throw InvalidArgument("budget cap must be positive");
}

BudgetLedger BudgetLedger::Open(const std::string& path, std::optional<double> cap) {
  BudgetLedger ledger(cap);
  ledger.path_ = path;
  ledger.Refresh();
  return ledger;
}

BudgetLedger::BudgetLedger(BudgetLedger&&) noexcept = default;
BudgetLedger& BudgetLedger::operator=(BudgetLedger&&) noexcept = default;
BudgetLedger::~BudgetLedger() = default;

void BudgetLedger::Refresh() {
  if (path_.empty()) return;
  std::lock_guard<std::mutex> lock(*mu_);
  LockedFile file(path_);
  entries_ = ParseLedger(file.ReadAll(), path_);
  spent_ = Sum(entries_);
}

double BudgetLedger::Spent() const {
  std::lock_guard<std::mutex> lock(*mu_);
  return spent_;
}

std::optional<double> BudgetLedger::Remaining() const {
  if (!cap_) return std::nullopt;
  return *cap_ - Spent();
}

std::vector<NoisyRelease> BudgetLedger::entries() const {
  std::lock_guard<std::mutex> lock(*mu_);
  return entries_;
}

NoisyRelease BudgetLedger::Commit(double sensitivity, double epsilon, std::string_view label,
                                  const std::function<double()>& draw) {
  std::lock_guard<std::mutex> lock(*mu_);
  std::optional<LockedFile> file;
  if (!path_.empty()) {
    file.emplace(path_);
    entries_ = ParseLedger(file->ReadAll(), path_);
    spent_ = Sum(entries_);
  }
  const double spent = spent_;
  if (cap_) {
    // Relative slack so that e.g. 0.1 * 10 releases fit a cap of 1.0.
    if (spent + epsilon > *cap_ * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "privacy budget exceeded: release needs epsilon " << epsilon << " but " << spent
          << " of the cap " << *cap_ << " is already spent";
      throw BudgetExceeded(msg.str());
    }
  } else {
    std::ostringstream msg;
    msg << "no privacy budget cap is set; releasing with epsilon " << epsilon
        << " (total spent will be " << spent + epsilon << ")";
    Warn(msg.str());
  }

  NoisyRelease r;
  r.value = draw();
  r.epsilon_spent = epsilon;
  r.sensitivity = sensitivity;
  r.timestamp = UtcTimestamp();
  r.label = std::string(label);
  if (file) file->AppendLine(Serialize(r));
  entries_.push_back(r);
  spent_ += epsilon;
  return r;
}

NoisyRelease ReleaseScalar(double true_value, double sensitivity, const PrivacyParams& params,
                           BudgetLedger& ledger, RngStream& rng, std::string_view label) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw InvalidArgument("sensitivity must be positive and finite");
  }
  if (!std::isfinite(true_value)) throw InvalidArgument("released statistic is not finite");
  const double scale = sensitivity / params.epsilon;
  return ledger.Commit(sensitivity, params.epsilon, label,
                       [&] { return true_value + LaplaceSample(rng, scale); });
}

BudgetStatus GetBudgetStatus(const BudgetLedger& ledger) {
  BudgetStatus s;
  s.spent = ledger.Spent();
  s.remaining = ledger.Remaining();
  s.releases = ledger.entries().size();
  return s;
}

void SetWarningSink(std::function<void(std::string_view)> sink) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  Sink() = std::move(sink);
}

void Warn(std::string_view message) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  if (Sink()) Sink()(message);
}

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() %
      1000000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[80];
  std::snprintf(out, sizeof out, "%s.%06lldZ", buf, static_cast<long long>(micros));
  return out;
}

}  // namespace dprep
