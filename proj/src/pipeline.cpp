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

#include "dprep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string_view>
#include <type_traits>
#include <vector>

#include "dprep/ad_framework.hpp"
#include "dprep/am_framework.hpp"
#include "dprep/error.hpp"
#include "dprep/model.hpp"

namespace dprep::pipeline {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void OnlyKeys(const Json& j, std::string_view what, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      throw InvalidArgument("unknown key '" + it.key() + "' in " + std::string(what));
    }
  }
}

template <typename T>
T Get(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing required key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("key '") + key + "' has the wrong type");
  }
}

template <typename T>
T GetOr(const Json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? Get<T>(j, key) : fallback;
}

ad::BetaPrior ParsePrior(const Json& j) {
  if (!j.contains("prior")) return {};
  const Json& p = j.at("prior");
  if (p.is_array() && p.size() == 2) return {p[0].get<double>(), p[1].get<double>()};
  if (p.is_object()) return {GetOr(p, "a", 1.0), GetOr(p, "b", 1.0)};
  throw InvalidArgument("prior must be [a, b] or {\"a\": .., \"b\": ..}");
}

ad::McmcSettings ParseMcmc(const Json& j) {
  if (!j.contains("mcmc")) return ad::kApplicationMcmc;
  const Json& m = j.at("mcmc");
  if (m.is_string()) {
    const auto name = m.get<std::string>();
    if (name == "application") return ad::kApplicationMcmc;
    if (name == "simulation") return ad::kSimulationMcmc;
    throw InvalidArgument("mcmc preset must be 'application' or 'simulation'");
  }
  OnlyKeys(m, "mcmc", {"burn_in", "keep"});
  return {GetOr(m, "burn_in", ad::kApplicationMcmc.burn_in),
          GetOr(m, "keep", ad::kApplicationMcmc.keep)};
}

ad::RegionSpec ParseRegion(const Json& j) {
  const Json& r = j.at("region");
  ad::RegionSpec spec;
  const auto kind = Get<std::string>(r, "kind");
  if (kind == "fixed") {
    OnlyKeys(r, "region", {"kind", "lower", "upper"});
    spec.kind = ad::RegionKind::kFixed;
    spec.lower = report::ParseBound(r.contains("lower") ? r.at("lower") : Json(), -kInf);
    spec.upper = report::ParseBound(r.contains("upper") ? r.at("upper") : Json(), kInf);
  } else if (kind == "inflate" || kind == "inflated") {
    OnlyKeys(r, "region", {"kind", "alpha", "gamma_hat_o", "sigma_hat_o", "n0"});
    spec.kind = ad::RegionKind::kInflated;
    spec.alpha = Get<double>(r, "alpha");
    spec.gamma_hat_o = Get<double>(r, "gamma_hat_o");
    spec.sigma_hat_o = Get<double>(r, "sigma_hat_o");
    spec.n0 = Get<double>(r, "n0");
  } else {
    throw InvalidArgument("region kind must be 'fixed' or 'inflate'");
  }
  return spec;
}

// [v, ...] or {"from": a, "to": b, "count": n}.
template <typename T>
std::vector<T> ParseGrid(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing required key '") + key + "'");
  const Json& g = j.at(key);
  if (g.is_array()) return g.get<std::vector<T>>();
  OnlyKeys(g, key, {"from", "to", "count"});
  const double from = Get<double>(g, "from");
  const double to = Get<double>(g, "to");
  const int count = Get<int>(g, "count");
  if (count < 1) throw InvalidArgument(std::string(key) + " count must be positive");
  std::vector<T> out;
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? from : from + (to - from) * i / (count - 1);
    if constexpr (std::is_integral_v<T>) {
      out.push_back(static_cast<T>(std::lround(x)));
    } else {
      out.push_back(x);
    }
  }
  if constexpr (std::is_integral_v<T>) out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

RunResult AdVerify(const Dataset& d, const Json& config, BudgetLedger& ledger,
                   bool unsafe_debug) {
  OnlyKeys(config, "ad-verify config",
           {"model", "coef", "region", "M", "epsilon", "delta", "prior", "mcmc", "seed",
            "seed_source"});
  const ModelSpec model = ParseFormula(Get<std::string>(config, "model"), d);
  const auto coef = Get<std::string>(config, "coef");
  ad::AdConfig cfg;
  cfg.M = Get<int>(config, "M");
  cfg.epsilon = Get<double>(config, "epsilon");
  if (config.contains("delta") && !config.at("delta").is_null()) {
    cfg.delta = Get<double>(config, "delta");
  }
  cfg.prior = ParsePrior(config);
  cfg.mcmc = ParseMcmc(config);
  cfg.seed = Get<uint64_t>(config, "seed");
  cfg.Validate();
  if (static_cast<std::size_t>(cfg.M) > d.rows()) {
    throw InvalidArgument("M = " + std::to_string(cfg.M) + " exceeds the number of rows N = " +
                          std::to_string(d.rows()) + "; need M <= N");
  }
  // Fail on the model before spending anything.
  model.Validate(d);
  const auto labels = model.CoefficientLabels();
  if (std::find(labels.begin(), labels.end(), coef) == labels.end()) {
    throw InvalidArgument("coefficient '" + coef + "' is not a term of the model");
  }
  const ad::RegionSpec region = ParseRegion(config);

  const ad::Verification v = ad::Verify(d, model, coef, region, cfg, ledger);
  RunResult out;
  out.report = report::AdReport(
      v, cfg, coef, report::MakeProvenance(GetOr<std::string>(config, "seed_source", "explicit")));
  if (unsafe_debug) out.debug = report::AdDebug(v, cfg, coef);
  return out;
}

RunResult AmVerify(const Dataset& d, const Json& config, BudgetLedger& ledger,
                   bool unsafe_debug) {
  OnlyKeys(config, "am-verify config",
           {"model", "model_alt", "coef", "M", "epsilon", "level", "prior", "grid_points",
            "samples", "seed", "seed_source", "allow_degenerate", "inversion"});
  const ModelSpec m0 = ParseFormula(Get<std::string>(config, "model"), d);
  const ModelSpec m1 = ParseFormula(Get<std::string>(config, "model_alt"), d);
  const auto coef = Get<std::string>(config, "coef");
  am::AmConfig cfg;
  cfg.M = Get<int>(config, "M");
  cfg.epsilon = Get<double>(config, "epsilon");
  cfg.level = GetOr(config, "level", cfg.level);
  cfg.prior = ParsePrior(config);
  cfg.grid_points = GetOr(config, "grid_points", cfg.grid_points);
  cfg.samples = GetOr(config, "samples", cfg.samples);
  cfg.seed = Get<uint64_t>(config, "seed");
  cfg.allow_degenerate = GetOr(config, "allow_degenerate", false);
  cfg.Validate();
  if (static_cast<std::size_t>(cfg.M) > d.rows()) {
    throw InvalidArgument("M = " + std::to_string(cfg.M) + " exceeds the number of rows N = " +
                          std::to_string(d.rows()) + "; need M <= N");
  }
  m0.Validate(d);
  m1.Validate(d);

  // Resolve the inversion up front so a bad assumption costs no budget.
  std::optional<report::InversionEcho> inversion;
  if (config.contains("inversion") && !config.at("inversion").is_null()) {
    const Json& inv = config.at("inversion");
    const auto kind = Get<std::string>(inv, "kind");
    if (kind == "null") {
      OnlyKeys(inv, "inversion", {"kind", "sigma_hat_o", "n0"});
      const double n = std::floor(static_cast<double>(d.rows()) / cfg.M);
      inversion = report::InversionEcho{
          am::NullAssumptionLengths(Get<double>(inv, "sigma_hat_o"), Get<double>(inv, "n0"), n,
                                    cfg.level),
          "null"};
    } else if (kind == "explicit") {
      OnlyKeys(inv, "inversion", {"kind", "l1", "l2"});
      inversion = report::InversionEcho{{Get<double>(inv, "l1"), Get<double>(inv, "l2")},
                                        "explicit"};
      inversion->assumption.Validate();
    } else {
      throw InvalidArgument("inversion kind must be 'null' or 'explicit'");
    }
  }

  const am::Verification v = am::Verify(d, m0, m1, coef, cfg, ledger);
  RunResult out;
  out.report = report::AmReport(
      v, cfg, coef, inversion,
      report::MakeProvenance(GetOr<std::string>(config, "seed_source", "explicit")));
  if (unsafe_debug) out.debug = report::AmDebug(v, cfg, coef);
  return out;
}

std::string AdMselect(const Json& config) {
  OnlyKeys(config, "ad-mselect config",
           {"gamma_grid", "m_grid", "sigma_hat_o", "n0", "N", "epsilon", "region", "K", "seed",
            "seed_source", "threads"});
  const ad::RegionSpec spec = ParseRegion(config);
  if (spec.kind != ad::RegionKind::kFixed) {
    throw InvalidArgument("ad-mselect needs a fixed region (lo:hi)");
  }
  const ad::ToleranceRegion region = ad::BuildFixedRegion(spec.lower, spec.upper);
  const auto gammas = ParseGrid<double>(config, "gamma_grid");
  const auto ms = ParseGrid<int>(config, "m_grid");
  const auto N = Get<std::size_t>(config, "N");
  const ad::RobustnessGrid grid = ad::RobustnessContour(
      gammas, ms, Get<double>(config, "sigma_hat_o"), Get<double>(config, "n0"), N,
      Get<double>(config, "epsilon"), region, GetOr(config, "K", ad::kDefaultContourReps),
      Get<uint64_t>(config, "seed"), GetOr(config, "threads", 0u));
  return grid.ToCsv();
}

std::string AmContour(const Json& config) {
  OnlyKeys(config, "am-contour config",
           {"gamma", "sigma_gamma", "corr", "diff_grid", "ratio_grid", "K", "seed",
            "seed_source", "threads"});
  const auto diffs = ParseGrid<double>(config, "diff_grid");
  const auto ratios = ParseGrid<double>(config, "ratio_grid");
  const am::ContourGrid grid = am::ReferenceContour(
      Get<double>(config, "gamma"), Get<double>(config, "sigma_gamma"),
      GetOr(config, "corr", am::kDefaultCorrelation), diffs, ratios,
      GetOr(config, "K", am::kDefaultContourReps), Get<uint64_t>(config, "seed"),
      GetOr(config, "threads", 0u));
  return grid.ToCsv();
}

Json Invert(const Json& config) {
  OnlyKeys(config, "invert config",
           {"nu_lower", "nu_upper", "l1", "l2", "sigma_hat_o", "n0", "n", "N", "M", "level"});
  am::InversionAssumption a;
  std::string source;
  const double level = GetOr(config, "level", 0.95);
  if (config.contains("l1") || config.contains("l2")) {
    a = {Get<double>(config, "l1"), Get<double>(config, "l2")};
    a.Validate();
    source = "explicit";
  } else {
    double n = 0.0;
    if (config.contains("n")) {
      n = Get<double>(config, "n");
    } else {
      const int M = Get<int>(config, "M");
      if (M < 1) throw InvalidArgument("M must be positive");
      n = std::floor(Get<double>(config, "N") / M);
    }
    a = am::NullAssumptionLengths(Get<double>(config, "sigma_hat_o"), Get<double>(config, "n0"),
                                  n, level);
    source = "null";
  }
  const ConfidenceInterval nu{Get<double>(config, "nu_lower"), Get<double>(config, "nu_upper"),
                              level};
  const ConfidenceInterval out = am::InvertCredibleInterval(nu, a);
  Json j;
  j["nu_interval"] = {nu.lower, nu.upper};
  j["abs_difference_interval"] = {out.lower, out.upper};
  j["assumption"] = {{"l1", a.l1}, {"l2", a.l2}, {"source", source}};
  j["nu_max"] = 0.5 * (1.0 + a.l2 / a.l1);
  return j;
}

Json Fit(const Dataset& d, const Json& config) {
  OnlyKeys(config, "fit config", {"model", "level"});
  const ModelSpec m = ParseFormula(Get<std::string>(config, "model"), d);
  const double level = GetOr(config, "level", 0.95);
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("CI level must lie in (0, 1)");
  return report::FitSummary(FitOls(d, m), m, level);
}

}  // namespace dprep::pipeline
