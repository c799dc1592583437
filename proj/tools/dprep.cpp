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

// Command-line front end. Everything goes through the C interface in
// libdprep; this file only parses flags, builds JSON configuration and
// writes outputs.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dprep/dprep.h"

namespace {

using Json = nlohmann::ordered_json;

// Flag problems detected after CLI11 has accepted the syntax.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Carries a library status out of a subcommand.
struct StatusError : std::runtime_error {
  dprep_status status;
  StatusError(dprep_status s, const std::string& m) : std::runtime_error(m), status(s) {}
};

int ExitCode(dprep_status s) {
  switch (s) {
    case DPREP_OK: return 0;
    case DPREP_ERR_BUDGET_EXCEEDED: return 3;
    case DPREP_ERR_SINGULAR_FIT: return 4;
    case DPREP_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

void Check(dprep_status s) {
  if (s != DPREP_OK) throw StatusError(s, dprep_last_error());
}

// Owns a string returned by the library.
class OwnedString {
 public:
  OwnedString() = default;
  ~OwnedString() { dprep_string_free(p_); }
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;
  char** out() { return &p_; }
  bool empty() const { return p_ == nullptr; }
  std::string str() const { return p_ != nullptr ? std::string(p_) : std::string(); }

 private:
  char* p_ = nullptr;
};

struct DatasetHandle {
  dprep_dataset* p = nullptr;
  ~DatasetHandle() { dprep_dataset_free(p); }
};

struct LedgerHandle {
  dprep_ledger* p = nullptr;
  ~LedgerHandle() { dprep_ledger_free(p); }
};

double ParseNumber(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "+inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw UsageError("cannot read '" + text + "' as a number for " + what);
  }
  return v;
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

Json BoundJson(double x) { return std::isfinite(x) ? Json(x) : Json(x > 0 ? "inf" : "-inf"); }

// "lo:hi" (either side may be empty or +/-inf) or "inflate:alpha".
Json RegionJson(const std::string& spec, std::optional<double> gamma_o,
                std::optional<double> sigma_o, std::optional<double> n0) {
  const auto parts = Split(spec, ':');
  if (parts.size() != 2) throw UsageError("--region must be lo:hi or inflate:alpha");
  if (parts[0] == "inflate") {
    if (!gamma_o || !sigma_o || !n0) {
      throw UsageError("--region inflate:alpha needs --gamma-o, --sigma-o and --n0");
    }
    return {{"kind", "inflate"},
            {"alpha", ParseNumber(parts[1], "--region alpha")},
            {"gamma_hat_o", *gamma_o},
            {"sigma_hat_o", *sigma_o},
            {"n0", *n0}};
  }
  const double lo = parts[0].empty() ? -INFINITY : ParseNumber(parts[0], "--region lower");
  const double hi = parts[1].empty() ? INFINITY : ParseNumber(parts[1], "--region upper");
  return {{"kind", "fixed"}, {"lower", BoundJson(lo)}, {"upper", BoundJson(hi)}};
}

// "a,b,c" or "from:to:count".
Json GridJson(const std::string& spec, const std::string& what) {
  if (spec.find(':') != std::string::npos) {
    const auto parts = Split(spec, ':');
    if (parts.size() != 3) throw UsageError(what + " range must be from:to:count");
    return {{"from", ParseNumber(parts[0], what)},
            {"to", ParseNumber(parts[1], what)},
            {"count", static_cast<int>(ParseNumber(parts[2], what))}};
  }
  Json values = Json::array();
  for (const auto& p : Split(spec, ',')) values.push_back(ParseNumber(p, what));
  return values;
}

std::pair<double, double> Pair(const std::string& spec, const std::string& what) {
  const auto parts = Split(spec, ',');
  if (parts.size() != 2) throw UsageError(what + " must be two comma-separated numbers");
  return {ParseNumber(parts[0], what), ParseNumber(parts[1], what)};
}

struct Seed {
  uint64_t value;
  std::string source;
};

Seed ResolveSeed(const std::optional<uint64_t>& flag) {
  if (flag) return {*flag, "explicit"};
  if (const char* env = std::getenv("DPREP_SEED"); env != nullptr && *env != '\0') {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0') {
      throw UsageError("DPREP_SEED must be a non-negative integer");
    }
    return {static_cast<uint64_t>(v), "env"};
  }
  std::random_device rd;
  return {(static_cast<uint64_t>(rd()) << 32) ^ rd(), "entropy"};
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StatusError(DPREP_ERR_IO, "cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) throw StatusError(DPREP_ERR_IO, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StatusError(DPREP_ERR_IO, "cannot move " + tmp + " to " + path + ": " + ec.message());
}

struct Options {
  std::string input;
  std::string schema;
  std::string model;
  std::string model_alt;
  std::string coef;
  std::string region;
  std::optional<double> gamma_o;
  std::optional<double> sigma_o;
  std::optional<double> n0;
  double epsilon = 1.0;
  int M = 0;
  std::optional<double> delta;
  std::string prior;
  std::string mcmc = "application";
  std::optional<uint64_t> seed;
  std::string ledger;
  double budget_cap = 0.0;
  std::string out;
  bool unsafe_debug = false;
  std::string debug_out;
  double level = 0.95;
  int grid_points = 10001;
  int samples = 1000;
  bool allow_degenerate = false;
  std::string invert_null;
  std::string invert_lengths;
  std::string gamma_grid;
  std::string m_grid;
  std::optional<double> N;
  int K = 0;
  unsigned threads = 0;
  std::optional<double> gamma;
  std::optional<double> sigma_gamma;
  double corr = 0.95;
  std::string diff_grid;
  std::string ratio_grid;
  std::string nu_ci;
  std::optional<double> n;
  std::string report;
  char delimiter = ',';
};

DatasetHandle LoadDataset(const Options& o) {
  DatasetHandle d;
  Check(dprep_dataset_load(o.input.c_str(), o.schema.empty() ? nullptr : o.schema.c_str(),
                           o.delimiter, &d.p));
  return d;
}

LedgerHandle OpenLedger(const Options& o) {
  LedgerHandle l;
  if (o.ledger.empty()) {
    std::cerr << "dprep: warning: no --ledger given; this release is not recorded across runs\n";
  }
  Check(dprep_ledger_open(o.ledger.empty() ? nullptr : o.ledger.c_str(), o.budget_cap, &l.p));
  return l;
}

void CheckDebugFlags(const Options& o) {
  if (o.unsafe_debug && o.debug_out.empty()) {
    throw UsageError("--unsafe-debug needs --debug-out; custodian-only output never goes to "
                     "the release stream");
  }
  if (!o.unsafe_debug && !o.debug_out.empty()) {
    throw UsageError("--debug-out is only meaningful with --unsafe-debug");
  }
  if (o.unsafe_debug) {
    const bool same = o.out.empty() || o.out == "-"
                          ? (o.debug_out == "-")
                          : std::filesystem::weakly_canonical(o.out) ==
                                std::filesystem::weakly_canonical(o.debug_out);
    if (same) throw UsageError("--debug-out must differ from the release output");
  }
}

Json PriorJson(const std::string& spec) {
  if (spec.empty()) return {{"a", 1.0}, {"b", 1.0}};
  const auto [a, b] = Pair(spec, "--prior");
  return {{"a", a}, {"b", b}};
}

void EmitVerification(const Options& o, OwnedString& report, OwnedString& debug) {
  // The ledger already holds the entry; now the report may leave.
  WriteText(o.out, report.str());
  if (!debug.empty()) WriteText(o.debug_out, debug.str());
}

void RunFit(const Options& o) {
  auto d = LoadDataset(o);
  const Json cfg = {{"model", o.model}, {"level", o.level}};
  OwnedString out;
  Check(dprep_fit(d.p, cfg.dump().c_str(), out.out()));
  WriteText(o.out, out.str());
}

void RunAdVerify(const Options& o) {
  CheckDebugFlags(o);
  const Seed seed = ResolveSeed(o.seed);
  Json cfg = {{"model", o.model},
              {"coef", o.coef},
              {"region", RegionJson(o.region, o.gamma_o, o.sigma_o, o.n0)},
              {"M", o.M},
              {"epsilon", o.epsilon},
              {"prior", PriorJson(o.prior)},
              {"mcmc", o.mcmc},
              {"seed", seed.value},
              {"seed_source", seed.source}};
  if (o.delta) cfg["delta"] = *o.delta;
  auto d = LoadDataset(o);
  auto l = OpenLedger(o);
  OwnedString report, debug;
  Check(dprep_ad_verify(d.p, l.p, cfg.dump().c_str(), o.unsafe_debug ? 1 : 0, report.out(),
                        debug.out()));
  EmitVerification(o, report, debug);
}

void RunAmVerify(const Options& o) {
  CheckDebugFlags(o);
  const Seed seed = ResolveSeed(o.seed);
  Json cfg = {{"model", o.model},
              {"model_alt", o.model_alt},
              {"coef", o.coef},
              {"M", o.M},
              {"epsilon", o.epsilon},
              {"level", o.level},
              {"prior", PriorJson(o.prior)},
              {"grid_points", o.grid_points},
              {"samples", o.samples},
              {"seed", seed.value},
              {"seed_source", seed.source},
              {"allow_degenerate", o.allow_degenerate}};
  if (!o.invert_null.empty() && !o.invert_lengths.empty()) {
    throw UsageError("give at most one of --invert-null and --invert-lengths");
  }
  if (!o.invert_null.empty()) {
    const auto [sigma, n0] = Pair(o.invert_null, "--invert-null");
    cfg["inversion"] = {{"kind", "null"}, {"sigma_hat_o", sigma}, {"n0", n0}};
  } else if (!o.invert_lengths.empty()) {
    const auto [l1, l2] = Pair(o.invert_lengths, "--invert-lengths");
    cfg["inversion"] = {{"kind", "explicit"}, {"l1", l1}, {"l2", l2}};
  }
  auto d = LoadDataset(o);
  auto l = OpenLedger(o);
  OwnedString report, debug;
  Check(dprep_am_verify(d.p, l.p, cfg.dump().c_str(), o.unsafe_debug ? 1 : 0, report.out(),
                        debug.out()));
  EmitVerification(o, report, debug);
}

void RunAdMselect(const Options& o) {
  if (!o.sigma_o || !o.n0 || !o.N) throw UsageError("ad-mselect needs --sigma-o, --n0 and --N");
  const Seed seed = ResolveSeed(o.seed);
  const Json cfg = {{"gamma_grid", GridJson(o.gamma_grid, "--gamma-grid")},
                    {"m_grid", GridJson(o.m_grid, "--m-grid")},
                    {"sigma_hat_o", *o.sigma_o},
                    {"n0", *o.n0},
                    {"N", static_cast<uint64_t>(*o.N)},
                    {"epsilon", o.epsilon},
                    {"region", RegionJson(o.region, o.gamma_o, o.sigma_o, o.n0)},
                    {"K", o.K > 0 ? o.K : 750},
                    {"seed", seed.value},
                    {"threads", o.threads}};
  OwnedString csv;
  Check(dprep_ad_mselect(cfg.dump().c_str(), csv.out()));
  WriteText(o.out, csv.str());
}

void RunAmContour(const Options& o) {
  if (!o.gamma || !o.sigma_gamma) throw UsageError("am-contour needs --gamma and --sigma-gamma");
  const Seed seed = ResolveSeed(o.seed);
  const Json cfg = {{"gamma", *o.gamma},
                    {"sigma_gamma", *o.sigma_gamma},
                    {"corr", o.corr},
                    {"diff_grid", GridJson(o.diff_grid, "--diff-grid")},
                    {"ratio_grid", GridJson(o.ratio_grid, "--ratio-grid")},
                    {"K", o.K > 0 ? o.K : 500},
                    {"seed", seed.value},
                    {"threads", o.threads}};
  OwnedString csv;
  Check(dprep_am_contour(cfg.dump().c_str(), csv.out()));
  WriteText(o.out, csv.str());
}

void RunInvert(const Options& o) {
  const auto [lo, hi] = Pair(o.nu_ci, "--nu-ci");
  Json cfg = {{"nu_lower", lo}, {"nu_upper", hi}, {"level", o.level}};
  if (!o.invert_lengths.empty()) {
    const auto [l1, l2] = Pair(o.invert_lengths, "--lengths");
    cfg["l1"] = l1;
    cfg["l2"] = l2;
  } else {
    if (!o.sigma_o || !o.n0) throw UsageError("invert needs --lengths or --sigma-o and --n0");
    cfg["sigma_hat_o"] = *o.sigma_o;
    cfg["n0"] = *o.n0;
    if (o.n) {
      cfg["n"] = *o.n;
    } else if (o.N && o.M > 0) {
      cfg["N"] = *o.N;
      cfg["M"] = o.M;
    } else {
      throw UsageError("invert needs --n, or --N with --M, for the subset size");
    }
  }
  OwnedString out;
  Check(dprep_invert(cfg.dump().c_str(), out.out()));
  WriteText(o.out, out.str());
}

void RunBudgetStatus(const Options& o) {
  if (o.ledger.empty()) throw UsageError("budget-status needs --ledger");
  if (!std::filesystem::exists(o.ledger)) {
    throw StatusError(DPREP_ERR_IO, "ledger " + o.ledger + " does not exist");
  }
  LedgerHandle l;
  Check(dprep_ledger_open(o.ledger.c_str(), o.budget_cap, &l.p));
  double spent = 0.0, remaining = 0.0;
  size_t releases = 0;
  Check(dprep_ledger_status(l.p, &spent, &remaining, &releases));
  Json j = {{"ledger", o.ledger}, {"releases", releases}, {"epsilon_spent", spent}};
  if (o.budget_cap > 0.0) {
    j["cap"] = o.budget_cap;
    j["epsilon_remaining"] = remaining;
  }
  WriteText(o.out, j.dump(2) + "\n");
}

void RunSummarize(const Options& o) {
  std::ifstream in(o.report, std::ios::binary);
  if (!in) throw StatusError(DPREP_ERR_IO, "cannot read " + o.report);
  std::ostringstream text;
  text << in.rdbuf();
  OwnedString out;
  int matches = 0;
  Check(dprep_report_summarize(text.str().c_str(), out.out(), &matches));
  Json j = {{"summary", Json::parse(out.str())}, {"matches_report", matches == 1}};
  WriteText(o.out, j.dump(2) + "\n");
  if (matches != 1) {
    throw StatusError(DPREP_ERR_DATA, "recomputed summary differs from the report's summary");
  }
}

void AddDataFlags(CLI::App* c, Options& o) {
  c->add_option("--input", o.input, "Delimited data file with a header row")->required();
  c->add_option("--schema", o.schema, "Column kinds: one 'column,kind' per line");
}

void AddSeedFlag(CLI::App* c, Options& o) {
  c->add_option("--seed", o.seed, "Root seed (falls back to DPREP_SEED, then entropy)");
}

void AddReleaseFlags(CLI::App* c, Options& o) {
  c->add_option("--epsilon", o.epsilon, "Privacy budget for this release")->required();
  c->add_option("--M", o.M, "Number of disjoint subsets")->required();
  c->add_option("--prior", o.prior, "Beta prior a,b (default 1,1)");
  c->add_option("--ledger", o.ledger, "Budget ledger file (newline-delimited JSON)");
  c->add_option("--budget-cap", o.budget_cap, "Total epsilon allowed by the ledger");
  c->add_flag("--unsafe-debug", o.unsafe_debug, "Also write custodian-only subset statistics");
  c->add_option("--debug-out", o.debug_out, "Destination of the custodian-only document");
  AddSeedFlag(c, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private verification of published regression results"};
  app.set_version_flag("--version", std::string(dprep_version()));
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Custodian-only local OLS fit summary");
  AddDataFlags(fit, o);
  fit->add_option("--model", o.model, "Formula, e.g. 'y ~ x1 + log(x2) + x1:x3'")->required();
  fit->add_option("--level", o.level, "Confidence level");

  auto* adv = app.add_subcommand("ad-verify", "Verify a coefficient against a tolerance region");
  AddDataFlags(adv, o);
  adv->add_option("--model", o.model, "Formula")->required();
  adv->add_option("--coef", o.coef, "Coefficient label")->required();
  adv->add_option("--region", o.region, "lo:hi or inflate:alpha")->required();
  adv->add_option("--gamma-o", o.gamma_o, "Published estimate (inflated regions)");
  adv->add_option("--sigma-o", o.sigma_o, "Published standard error (inflated regions)");
  adv->add_option("--n0", o.n0, "Published sample size (inflated regions)");
  adv->add_option("--delta", o.delta, "Degree of certainty (default depends on the region)");
  adv->add_option("--mcmc", o.mcmc, "MCMC preset")
      ->check(CLI::IsMember({"application", "simulation"}));
  AddReleaseFlags(adv, o);

  auto* ams = app.add_subcommand("ad-mselect", "Robustness contour for choosing M (no budget)");
  ams->add_option("--region", o.region, "lo:hi")->required();
  ams->add_option("--gamma-grid", o.gamma_grid, "a,b,c or from:to:count")->required();
  ams->add_option("--m-grid", o.m_grid, "a,b,c or from:to:count")->required();
  ams->add_option("--sigma-o", o.sigma_o, "Published standard error");
  ams->add_option("--n0", o.n0, "Published sample size");
  ams->add_option("--N", o.N, "Rows in the confidential data");
  ams->add_option("--epsilon", o.epsilon, "Planned epsilon");
  ams->add_option("--K", o.K, "Replications per cell (default 750)");
  ams->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  AddSeedFlag(ams, o);

  auto* amv = app.add_subcommand("am-verify", "Compare a coefficient across two models");
  AddDataFlags(amv, o);
  amv->add_option("--model", o.model, "Base formula")->required();
  amv->add_option("--model-alt", o.model_alt, "Alternative formula")->required();
  amv->add_option("--coef", o.coef, "Coefficient label present in both")->required();
  amv->add_option("--level", o.level, "Per-subset confidence level");
  amv->add_option("--grid-points", o.grid_points, "Posterior grid size");
  amv->add_option("--samples", o.samples, "Posterior draws stored in the report");
  amv->add_flag("--allow-degenerate", o.allow_degenerate, "Accept zero-length subset intervals");
  amv->add_option("--invert-null", o.invert_null, "sigma_hat_o,n0 for the null assumption");
  amv->add_option("--invert-lengths", o.invert_lengths, "l1,l2 interval lengths");
  AddReleaseFlags(amv, o);

  auto* amc = app.add_subcommand("am-contour", "Reference overlap contour (no budget)");
  amc->add_option("--gamma", o.gamma, "Reference coefficient");
  amc->add_option("--sigma-gamma", o.sigma_gamma, "Subset-scale standard error");
  amc->add_option("--corr", o.corr, "Assumed correlation of the two estimates");
  amc->add_option("--diff-grid", o.diff_grid, "|gamma-beta|/|gamma| axis")->required();
  amc->add_option("--ratio-grid", o.ratio_grid, "sd ratio axis")->required();
  amc->add_option("--K", o.K, "Replications per cell (default 500)");
  amc->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  AddSeedFlag(amc, o);

  auto* inv = app.add_subcommand("invert", "Map an overlap interval to |beta - gamma|");
  inv->add_option("--nu-ci", o.nu_ci, "lo,hi")->required();
  inv->add_option("--lengths", o.invert_lengths, "l1,l2");
  inv->add_option("--sigma-o", o.sigma_o, "Published standard error");
  inv->add_option("--n0", o.n0, "Published sample size");
  inv->add_option("--n", o.n, "Subset size");
  inv->add_option("--N", o.N, "Rows in the confidential data");
  inv->add_option("--M", o.M, "Number of subsets");
  inv->add_option("--level", o.level, "Interval level for the null assumption");

  auto* bst = app.add_subcommand("budget-status", "Spent and remaining epsilon");
  bst->add_option("--ledger", o.ledger, "Ledger file")->required();
  bst->add_option("--budget-cap", o.budget_cap, "Cap to report remaining budget against");

  auto* sum = app.add_subcommand("summarize", "Recompute summaries from a release report");
  sum->add_option("--report", o.report, "Release report JSON")->required();

  for (auto* c : app.get_subcommands({})) c->add_option("--out", o.out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) RunFit(o);
    if (adv->parsed()) RunAdVerify(o);
    if (ams->parsed()) RunAdMselect(o);
    if (amv->parsed()) RunAmVerify(o);
    if (amc->parsed()) RunAmContour(o);
    if (inv->parsed()) RunInvert(o);
    if (bst->parsed()) RunBudgetStatus(o);
    if (sum->parsed()) RunSummarize(o);
  } catch (const UsageError& e) {
    std::cerr << "dprep: " << e.what() << "\n";
    return 2;
  } catch (const StatusError& e) {
    std::cerr << "dprep: " << dprep_status_name(e.status) << ": " << e.what() << "\n";
    return ExitCode(e.status);
  } catch (const std::exception& e) {
    std::cerr << "dprep: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
