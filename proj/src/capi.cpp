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

#include "dprep/dprep.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <utility>

#include "dprep/ad_framework.hpp"
#include "dprep/am_framework.hpp"
#include "dprep/dataset.hpp"
#include "dprep/dp_mechanism.hpp"
#include "dprep/error.hpp"
#include "dprep/pipeline.hpp"
#include "dprep/report.hpp"

struct dprep_dataset {
  dprep::Dataset data;
};

struct dprep_ledger {
  dprep::BudgetLedger ledger;
};

namespace {

thread_local std::string g_last_error;

dprep_status Fail(dprep_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
dprep_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return DPREP_OK;
  } catch (const dprep::Error& e) {
    return Fail(static_cast<dprep_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return Fail(DPREP_ERR_INVALID_ARGUMENT, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return Fail(DPREP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(DPREP_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(DPREP_ERR_INTERNAL, "unknown error");
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

dprep::report::Json ParseConfig(const char* text) {
  if (text == nullptr) throw dprep::InvalidArgument("configuration JSON is NULL");
  return dprep::report::Json::parse(text);
}

std::string Dump(const dprep::report::Json& j) { return j.dump(2) + "\n"; }

void Require(const void* p, const char* what) {
  if (p == nullptr) throw dprep::InvalidArgument(std::string(what) + " is NULL");
}

dprep_status Verify(const dprep_dataset* d, dprep_ledger* ledger, const char* config_json,
                    int unsafe_debug, char** report_json, char** debug_json, bool am) {
  return Guard([&] {
    Require(d, "dataset");
    Require(ledger, "ledger");
    Require(report_json, "report_json");
    *report_json = nullptr;
    if (debug_json != nullptr) *debug_json = nullptr;
    const auto config = ParseConfig(config_json);
    const dprep::pipeline::RunResult r =
        am ? dprep::pipeline::AmVerify(d->data, config, ledger->ledger, unsafe_debug != 0)
           : dprep::pipeline::AdVerify(d->data, config, ledger->ledger, unsafe_debug != 0);
    *report_json = Dup(Dump(r.report));
    if (debug_json != nullptr && r.debug) *debug_json = Dup(Dump(*r.debug));
  });
}

}  // namespace

extern "C" {

const char* dprep_version(void) { return DPREP_VERSION_STRING; }

const char* dprep_status_name(dprep_status status) {
  return dprep::ErrorCodeName(static_cast<dprep::ErrorCode>(status));
}

const char* dprep_last_error(void) { return g_last_error.c_str(); }

void dprep_string_free(char* s) { std::free(s); }

void dprep_set_warning_callback(dprep_warning_fn fn, void* user) {
  if (fn == nullptr) {
    dprep::SetWarningSink([](std::string_view m) {
      std::cerr << "dprep: warning: " << m << std::endl;
    });
    return;
  }
  dprep::SetWarningSink([fn, user](std::string_view m) { fn(std::string(m).c_str(), user); });
}

dprep_status dprep_dataset_load(const char* path, const char* schema_path, char delimiter,
                                dprep_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    const dprep::Schema schema =
        schema_path != nullptr ? dprep::Schema::Load(schema_path) : dprep::Schema{};
    *out = new dprep_dataset{dprep::ReadTable(path, schema, delimiter)};
  });
}

dprep_status dprep_dataset_from_text(const char* text, const char* schema_text, char delimiter,
                                     dprep_dataset** out) {
  return Guard([&] {
    Require(text, "text");
    Require(out, "out");
    *out = nullptr;
    const dprep::Schema schema =
        schema_text != nullptr ? dprep::Schema::Parse(schema_text) : dprep::Schema{};
    *out = new dprep_dataset{dprep::EncodeCategoricals(text, schema, delimiter)};
  });
}

void dprep_dataset_free(dprep_dataset* d) { delete d; }

size_t dprep_dataset_rows(const dprep_dataset* d) { return d != nullptr ? d->data.rows() : 0; }

size_t dprep_dataset_cols(const dprep_dataset* d) { return d != nullptr ? d->data.cols() : 0; }

dprep_status dprep_ledger_open(const char* path, double cap, dprep_ledger** out) {
  return Guard([&] {
    Require(out, "out");
    *out = nullptr;
    if (std::isnan(cap)) throw dprep::InvalidArgument("budget cap is NaN");
    const std::optional<double> c = cap > 0.0 ? std::optional<double>(cap) : std::nullopt;
    *out = new dprep_ledger{path != nullptr ? dprep::BudgetLedger::Open(path, c)
                                            : dprep::BudgetLedger(c)};
  });
}

void dprep_ledger_free(dprep_ledger* l) { delete l; }

dprep_status dprep_ledger_status(dprep_ledger* l, double* spent, double* remaining,
                                 size_t* releases) {
  return Guard([&] {
    Require(l, "ledger");
    l->ledger.Refresh();
    const dprep::BudgetStatus s = dprep::GetBudgetStatus(l->ledger);
    if (spent != nullptr) *spent = s.spent;
    if (remaining != nullptr) *remaining = s.remaining.value_or(-1.0);
    if (releases != nullptr) *releases = s.releases;
  });
}

dprep_status dprep_fit(const dprep_dataset* d, const char* config_json, char** summary_json) {
  return Guard([&] {
    Require(d, "dataset");
    Require(summary_json, "summary_json");
    *summary_json = nullptr;
    *summary_json = Dup(Dump(dprep::pipeline::Fit(d->data, ParseConfig(config_json))));
  });
}

dprep_status dprep_ad_verify(const dprep_dataset* d, dprep_ledger* ledger,
                             const char* config_json, int unsafe_debug, char** report_json,
                             char** debug_json) {
  return Verify(d, ledger, config_json, unsafe_debug, report_json, debug_json, false);
}

dprep_status dprep_am_verify(const dprep_dataset* d, dprep_ledger* ledger,
                             const char* config_json, int unsafe_debug, char** report_json,
                             char** debug_json) {
  return Verify(d, ledger, config_json, unsafe_debug, report_json, debug_json, true);
}

dprep_status dprep_ad_mselect(const char* config_json, char** csv) {
  return Guard([&] {
    Require(csv, "csv");
    *csv = nullptr;
    *csv = Dup(dprep::pipeline::AdMselect(ParseConfig(config_json)));
  });
}

dprep_status dprep_am_contour(const char* config_json, char** csv) {
  return Guard([&] {
    Require(csv, "csv");
    *csv = nullptr;
    *csv = Dup(dprep::pipeline::AmContour(ParseConfig(config_json)));
  });
}

dprep_status dprep_invert(const char* config_json, char** result_json) {
  return Guard([&] {
    Require(result_json, "result_json");
    *result_json = nullptr;
    *result_json = Dup(Dump(dprep::pipeline::Invert(ParseConfig(config_json))));
  });
}

dprep_status dprep_report_summarize(const char* report_json, char** summary_json,
                                    int* matches) {
  return Guard([&] {
    Require(summary_json, "summary_json");
    *summary_json = nullptr;
    const auto report = ParseConfig(report_json);
    const auto summary = dprep::report::SummarizeReport(report);
    if (matches != nullptr) {
      *matches = report.contains("summary") && report.at("summary") == summary ? 1 : 0;
    }
    *summary_json = Dup(Dump(summary));
  });
}

dprep_status dprep_overlap_measure(double lower1, double upper1, double lower2, double upper2,
                                   int allow_degenerate, double* out) {
  return Guard([&] {
    Require(out, "out");
    *out = dprep::am::OverlapMeasure({lower1, upper1, 0.95}, {lower2, upper2, 0.95},
                                     allow_degenerate != 0);
  });
}

dprep_status dprep_invert_overlap(double nu, double l1, double l2, double* out) {
  return Guard([&] {
    Require(out, "out");
    *out = dprep::am::InvertOverlap(nu, {l1, l2});
  });
}

dprep_status dprep_delta_star(double sigma_hat_o, double alpha, double n0, double n,
                              double* out) {
  return Guard([&] {
    Require(out, "out");
    *out = dprep::ad::DeltaStar(0.0, sigma_hat_o, alpha, n0, n);
  });
}

dprep_status dprep_error_bound(int M, double epsilon, double omega, double variance_cap,
                               double* out) {
  return Guard([&] {
    Require(out, "out");
    *out = dprep::am::ErrorBound(M, epsilon, omega, variance_cap);
  });
}

}  // extern "C"
