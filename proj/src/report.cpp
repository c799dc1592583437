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

#include "dprep/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dprep/error.hpp"
#include "dprep/stats.hpp"

namespace dprep::report {
namespace {

Json PriorJson(const ad::BetaPrior& p) { return Json{{"a", p.a}, {"b", p.b}}; }

Json AdSummary(const std::vector<double>& r, double delta) {
  const double probs[] = {0.05, 0.5, 0.95};
  const auto q = EmpiricalQuantiles(r, probs);
  Json s;
  s["theta_hat"] = ad::ThetaHat(r, delta);
  s["r_mean"] = Mean(r);
  s["r_q05"] = q[0];
  s["r_median"] = q[1];
  s["r_q95"] = q[2];
  return s;
}

Json AmSummary(const am::AmPosterior& p, const std::optional<InversionEcho>& inversion) {
  const double probs[] = {0.05, 0.5, 0.95};
  const auto q = EmpiricalQuantiles(p.samples, probs);
  Json s;
  s["posterior_mean"] = p.Mean();
  s["posterior_median"] = p.Quantile(0.5);
  s["sample_mean"] = Mean(p.samples);
  s["sample_q05"] = q[0];
  s["sample_median"] = q[1];
  s["sample_q95"] = q[2];
  Json cis = Json::array();
  Json inverted = Json::array();
  for (double mass : kReportedMasses) {
    const ConfidenceInterval ci = am::CredibleInterval(p, mass);
    cis.push_back({{"mass", mass}, {"lower", ci.lower}, {"upper", ci.upper}});
    if (inversion) {
      const ConfidenceInterval inv = am::InvertCredibleInterval(ci, inversion->assumption);
      inverted.push_back({{"mass", mass}, {"lower", inv.lower}, {"upper", inv.upper}});
    }
  }
  s["credible_intervals"] = cis;
  if (inversion) s["abs_difference_intervals"] = inverted;
  return s;
}

std::vector<double> Doubles(const Json& j) { return j.get<std::vector<double>>(); }

void Collect(const Json& doc, const std::vector<std::string>& keys,
             std::vector<std::string>& found) {
  if (doc.is_object()) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (std::find(keys.begin(), keys.end(), it.key()) != keys.end()) found.push_back(it.key());
      Collect(it.value(), keys, found);
    }
  } else if (doc.is_array()) {
    for (const auto& e : doc) Collect(e, keys, found);
  }
}

}  // namespace

std::string EngineVersion() { return DPREP_VERSION_STRING; }

Provenance MakeProvenance(std::string seed_source) {
  return {UtcTimestamp(), EngineVersion(), std::move(seed_source)};
}

const std::vector<std::string>& CustodianOnlyKeys() {
  static const std::vector<std::string> keys = {
      "S", "W", "nu_per_subset", "coefficients", "nu_bar", "stderrs", "estimates",
      "subset_intervals", "seed"};
  return keys;
}

std::vector<std::string> FindCustodianKeys(const Json& doc) {
  std::vector<std::string> found;
  Collect(doc, CustodianOnlyKeys(), found);
  return found;
}

void AuditRelease(const Json& doc) {
  const auto found = FindCustodianKeys(doc);
  if (!found.empty()) {
    throw Error(ErrorCode::kInternal,
                "release report would contain custodian-only field '" + found.front() + "'");
  }
}

Json Bound(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double ParseBound(const Json& j, double if_null) {
  if (j.is_null()) return if_null;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidArgument("bad interval bound '" + s + "'");
  }
  return j.get<double>();
}

Json AdReport(const ad::Verification& v, const ad::AdConfig& config, const std::string& coef,
              const Provenance& provenance) {
  Json r;
  r["framework"] = "ad";
  r["target_term"] = coef;
  r["released"] = {{"s_noisy", v.released.s_noisy},
                   {"sensitivity", v.released.entry.sensitivity},
                   {"epsilon", v.released.epsilon},
                   {"mechanism", v.released.entry.mechanism},
                   {"ledger_timestamp", v.released.entry.timestamp}};
  r["config"] = {{"M", config.M},
                 {"epsilon", config.epsilon},
                 {"delta", v.delta},
                 {"prior", PriorJson(config.prior)},
                 {"mcmc", {{"burn_in", config.mcmc.burn_in}, {"keep", config.mcmc.keep}}}};
  Json region = {{"kind", v.region.kind == ad::RegionKind::kFixed ? "fixed" : "inflated"},
                 {"lower", Bound(v.region.lower)},
                 {"upper", Bound(v.region.upper)}};
  if (v.region.provenance) {
    const auto& p = *v.region.provenance;
    region["alpha"] = p.alpha;
    region["gamma_hat_o"] = p.gamma_hat_o;
    region["sigma_hat_o"] = p.sigma_hat_o;
    region["n0"] = p.n0;
    region["n"] = p.n;
  }
  if (v.delta_star) region["delta_star"] = *v.delta_star;
  r["region"] = region;
  r["posterior"] = {{"r_samples", v.posterior.r_samples}};
  r["summary"] = AdSummary(v.posterior.r_samples, v.delta);
  r["provenance"] = {{"timestamp", provenance.timestamp},
                     {"engine_version", provenance.engine_version},
                     {"seed_source", provenance.seed_source}};
  AuditRelease(r);
  return r;
}

Json AdDebug(const ad::Verification& v, const ad::AdConfig& config, const std::string& coef) {
  Json d;
  d["framework"] = "ad";
  d["custodian_only"] = true;
  d["target_term"] = coef;
  d["seed"] = config.seed;
  d["S"] = v.counts.s;
  d["W"] = v.counts.w;
  d["estimates"] = v.counts.estimates;
  d["s_noisy"] = v.released.s_noisy;
  return d;
}

Json AmReport(const am::Verification& v, const am::AmConfig& config, const std::string& coef,
              const std::optional<InversionEcho>& inversion, const Provenance& provenance) {
  Json r;
  r["framework"] = "am";
  r["target_term"] = coef;
  r["released"] = {{"nu_bar_noisy", v.released.nu_bar_noisy},
                   {"sensitivity", v.released.entry.sensitivity},
                   {"epsilon", v.released.epsilon},
                   {"mechanism", v.released.entry.mechanism},
                   {"ledger_timestamp", v.released.entry.timestamp}};
  r["config"] = {{"M", config.M},
                 {"epsilon", config.epsilon},
                 {"level", config.level},
                 {"prior", PriorJson(config.prior)},
                 {"grid_points", config.grid_points},
                 {"samples", config.samples}};
  if (inversion) {
    r["inversion_assumption"] = {{"l1", inversion->assumption.l1},
                                 {"l2", inversion->assumption.l2},
                                 {"source", inversion->source}};
  }
  r["posterior"] = {{"samples", v.posterior.samples}};
  r["summary"] = AmSummary(v.posterior, inversion);
  r["provenance"] = {{"timestamp", provenance.timestamp},
                     {"engine_version", provenance.engine_version},
                     {"seed_source", provenance.seed_source}};
  AuditRelease(r);
  return r;
}

Json AmDebug(const am::Verification& v, const am::AmConfig& config, const std::string& coef) {
  Json d;
  d["framework"] = "am";
  d["custodian_only"] = true;
  d["target_term"] = coef;
  d["seed"] = config.seed;
  d["nu_bar"] = v.overlap.nu_bar;
  d["nu_per_subset"] = v.overlap.nus;
  Json cis = Json::array();
  for (std::size_t l = 0; l < v.overlap.ci_base.size(); ++l) {
    const auto& b = v.overlap.ci_base[l];
    const auto& a = v.overlap.ci_alt[l];
    cis.push_back({{"base", {b.lower, b.upper}}, {"alt", {a.lower, a.upper}}});
  }
  d["subset_intervals"] = cis;
  d["nu_bar_noisy"] = v.released.nu_bar_noisy;
  return d;
}

Json SummarizeReport(const Json& report) {
  try {
    const std::string framework = report.at("framework").get<std::string>();
    if (framework == "ad") {
      return AdSummary(Doubles(report.at("posterior").at("r_samples")),
                       report.at("config").at("delta").get<double>());
    }
    if (framework == "am") {
      const Json& c = report.at("config");
      ad::BetaPrior prior{c.at("prior").at("a").get<double>(), c.at("prior").at("b").get<double>()};
      am::AmPosterior p = am::PosteriorDensity(
          report.at("released").at("nu_bar_noisy").get<double>(), c.at("M").get<int>(),
          report.at("released").at("epsilon").get<double>(), prior,
          c.at("grid_points").get<int>());
      p.samples = Doubles(report.at("posterior").at("samples"));
      std::optional<InversionEcho> inversion;
      if (report.contains("inversion_assumption")) {
        const Json& a = report.at("inversion_assumption");
        inversion = InversionEcho{{a.at("l1").get<double>(), a.at("l2").get<double>()},
                                  a.at("source").get<std::string>()};
      }
      return AmSummary(p, inversion);
    }
    throw InvalidArgument("unknown framework '" + framework + "' in report");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed release report: ") + e.what());
  }
}

Json FitSummary(const FitResult& fit, const ModelSpec& m, double level) {
  Json j;
  j["custodian_only"] = true;
  j["response"] = m.response;
  j["residual_df"] = fit.residual_df;
  j["sigma2_hat"] = fit.sigma2_hat;
  Json rows = Json::array();
  for (std::size_t i = 0; i < fit.labels.size(); ++i) {
    Json row = {{"term", fit.labels[i]},
                {"estimate", fit.coefficients(static_cast<Eigen::Index>(i))},
                {"stderr", fit.stderrs(static_cast<Eigen::Index>(i))}};
    const ConfidenceInterval ci = MakeConfidenceInterval(fit, i, level, true);
    row["ci"] = {ci.lower, ci.upper};
    rows.push_back(row);
  }
  j["level"] = level;
  j["coefficients"] = rows;
  return j;
}

}  // namespace dprep::report
