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

#include "dprep/am_framework.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dprep/error.hpp"
#include "dprep/special.hpp"
#include "format.hpp"
#include "parallel.hpp"

namespace dprep::am {
namespace {

// Share of `self` covered by `other` when `self` has zero length.
double PointShare(const ConfidenceInterval& self, const ConfidenceInterval& other) {
  return (self.lower >= other.lower && self.lower <= other.upper) ? 1.0 : 0.0;
}

bool HasPlainTerm(const ModelSpec& m, std::string_view coef) {
  return std::any_of(m.terms.begin(), m.terms.end(), [&](const Term& t) {
    return t.IsPlainColumn() && t.Label() == coef;
  });
}

}  // namespace

double OverlapMeasure(const ConfidenceInterval& i1, const ConfidenceInterval& i2,
                      bool allow_degenerate) {
  for (const auto* ci : {&i1, &i2}) {
    if (std::isnan(ci->lower) || std::isnan(ci->upper) || ci->upper < ci->lower) {
      throw InvalidArgument("interval bounds must satisfy lower <= upper");
    }
  }
  const double len1 = i1.length();
  const double len2 = i2.length();
  if ((len1 <= 0.0 || len2 <= 0.0) && !allow_degenerate) {
    throw DegenerateInterval("overlap of a zero-length interval is undefined");
  }
  const double c = std::max(0.0, std::min(i1.upper, i2.upper) - std::max(i1.lower, i2.lower));
  const double share1 = len1 > 0.0 ? c / len1 : PointShare(i1, i2);
  const double share2 = len2 > 0.0 ? c / len2 : PointShare(i2, i1);
  return 0.5 * (share1 + share2);
}

void AmConfig::Validate() const {
  if (M < 2) throw InvalidArgument("AM needs M >= 2 subsets");
  (void)PrivacyParams{epsilon};
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("CI level must lie in (0, 1)");
  if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
    throw InvalidArgument("Beta prior parameters must be positive");
  }
  if (grid_points < 3) throw InvalidArgument("posterior grid needs at least 3 points");
  if (samples < 1) throw InvalidArgument("posterior needs at least one sample");
}

OverlapResult AverageOverlap(const Dataset& d, const ModelSpec& m0, const ModelSpec& m1,
                             std::string_view coef, const PartitionPlan& plan, double level,
                             bool allow_degenerate) {
  if (!HasPlainTerm(m0, coef) || !HasPlainTerm(m1, coef)) {
    throw InvalidArgument("coefficient '" + std::string(coef) +
                          "' must be an untransformed column term in both models");
  }
  OverlapResult out;
  const ModelSpec* models[] = {&m0, &m1};
  for (std::size_t l = 0; l < plan.subsets(); ++l) {
    const Dataset subset = SubsetView(d, plan, l);
    ConfidenceInterval ci[2];
    for (int k = 0; k < 2; ++k) {
      try {
        const FitResult fit = FitOls(subset, *models[k]);
        ci[k] = MakeConfidenceInterval(fit, fit.IndexOf(coef), level, allow_degenerate);
      } catch (const SingularFit& e) {
        throw SingularFit("subset " + std::to_string(l) + ", model " + std::to_string(k) + ": " +
                              e.what(),
                          static_cast<int>(l));
      } catch (const DataError& e) {
        throw DataError("subset " + std::to_string(l) + ", model " + std::to_string(k) + ": " +
                        e.what());
      }
    }
    out.ci_base.push_back(ci[0]);
    out.ci_alt.push_back(ci[1]);
    out.nus.push_back(OverlapMeasure(ci[0], ci[1], allow_degenerate));
  }
  double total = 0.0;
  for (double nu : out.nus) total += nu;
  out.nu_bar = total / static_cast<double>(out.nus.size());
  return out;
}

AmReleased ReleaseOverlap(const OverlapResult& o, const AmConfig& config, BudgetLedger& ledger,
                          RngStream& rng) {
  config.Validate();
  if (o.nus.size() != static_cast<std::size_t>(config.M)) {
    throw InvalidArgument("overlap result does not have M subsets");
  }
  const NoisyRelease entry = ReleaseScalar(o.nu_bar, 1.0 / config.M,
                                           PrivacyParams{config.epsilon}, ledger, rng,
                                           "am-overlap");
  return {entry.value, config.M, config.epsilon, entry};
}

double AmPosterior::Quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
  if (it == cdf.begin()) return grid.front();
  if (it == cdf.end()) return grid.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
  const double span = cdf[i] - cdf[i - 1];
  const double t = span > 0.0 ? (p - cdf[i - 1]) / span : 0.0;
  return grid[i - 1] + t * (grid[i] - grid[i - 1]);
}

double AmPosterior::Mean() const {
  double m = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    m += 0.5 * (grid[i] - grid[i - 1]) *
         (grid[i] * density[i] + grid[i - 1] * density[i - 1]);
  }
  return m;
}

AmPosterior PosteriorDensity(double nu_bar_noisy, int M, double epsilon, const BetaPrior& prior,
                             int grid_points) {
  if (!std::isfinite(nu_bar_noisy)) throw InvalidArgument("released overlap must be finite");
  if (M < 1 || grid_points < 3) throw InvalidArgument("posterior needs M >= 1 and 3 grid points");
  (void)PrivacyParams{epsilon};
  if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
    throw InvalidArgument("Beta prior parameters must be positive");
  }
  const bool open = prior.a < 1.0 || prior.b < 1.0;
  const std::size_t g = static_cast<std::size_t>(grid_points);
  AmPosterior p;
  p.grid.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    p.grid[i] = open ? (i + 0.5) / static_cast<double>(g)
                     : static_cast<double>(i) / static_cast<double>(g - 1);
  }

  const double rate = M * epsilon;
  std::vector<double> logd(g);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g; ++i) {
    const double x = p.grid[i];
    double ld = -rate * std::fabs(x - nu_bar_noisy);
    // Skip exponent-zero terms so 0 * log(0) stays 0.
    if (prior.a != 1.0) ld += (prior.a - 1.0) * std::log(x);
    if (prior.b != 1.0) ld += (prior.b - 1.0) * std::log1p(-x);
    logd[i] = ld;
    top = std::max(top, ld);
  }
  p.density.resize(g);
  for (std::size_t i = 0; i < g; ++i) p.density[i] = std::exp(logd[i] - top);

  p.cdf.assign(g, 0.0);
  for (std::size_t i = 1; i < g; ++i) {
    p.cdf[i] = p.cdf[i - 1] +
               0.5 * (p.grid[i] - p.grid[i - 1]) * (p.density[i] + p.density[i - 1]);
  }
  const double total = p.cdf.back();
  if (!(total > 0.0)) throw Error(ErrorCode::kInternal, "posterior density vanished on the grid");
  for (std::size_t i = 0; i < g; ++i) {
    p.density[i] /= total;
    p.cdf[i] /= total;
  }
  p.cdf.back() = 1.0;
  return p;
}

AmPosterior PosteriorNu(const AmReleased& released, const AmConfig& config, RngStream& rng) {
  config.Validate();
  AmPosterior p = PosteriorDensity(released.nu_bar_noisy, released.M, released.epsilon,
                                   config.prior, config.grid_points);
  p.samples.reserve(static_cast<std::size_t>(config.samples));
  for (int i = 0; i < config.samples; ++i) p.samples.push_back(p.Quantile(rng.Uniform()));
  return p;
}

ConfidenceInterval CredibleInterval(const AmPosterior& p, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw InvalidArgument("credible mass must lie in (0, 1)");
  return {p.Quantile(0.5 * (1.0 - mass)), p.Quantile(0.5 * (1.0 + mass)), mass};
}

double ErrorBound(int M, double epsilon, double omega, double variance_cap) {
  if (M < 1) throw InvalidArgument("M must be positive");
  (void)PrivacyParams{epsilon};
  if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
  if (!(variance_cap >= 0.0)) throw InvalidArgument("variance cap must be non-negative");
  const double m = static_cast<double>(M);
  return (variance_cap / m + 2.0 / (m * m * epsilon * epsilon)) / (omega * omega);
}

std::string ContourGrid::ToCsv() const {
  std::ostringstream out;
  out << "diff/ratio";
  for (double r : ratio_axis) out << "," << internal::FormatDouble(r);
  out << "\n";
  for (std::size_t i = 0; i < diff_axis.size(); ++i) {
    out << internal::FormatDouble(diff_axis[i]);
    for (double v : values[i]) out << "," << internal::FormatDouble(v);
    out << "\n";
  }
  return out.str();
}

ContourGrid ReferenceContour(double gamma, double sigma_gamma, double corr,
                             std::span<const double> diff_grid,
                             std::span<const double> ratio_grid, int K, uint64_t seed,
                             unsigned threads) {
  if (!std::isfinite(gamma) || gamma == 0.0) {
    throw InvalidArgument("reference contour needs a finite, nonzero gamma");
  }
  if (!(sigma_gamma > 0.0)) throw InvalidArgument("sigma_gamma must be positive");
  if (!(corr >= -1.0 && corr <= 1.0)) throw InvalidArgument("corr must lie in [-1, 1]");
  if (diff_grid.empty() || ratio_grid.empty()) throw InvalidArgument("contour grids are empty");
  if (K < 1) throw InvalidArgument("contour needs K >= 1");
  for (double r : ratio_grid) {
    if (!(r > 0.0)) throw InvalidArgument("sd ratios must be positive");
  }
  for (double v : diff_grid) {
    if (!std::isfinite(v)) throw InvalidArgument("relative differences must be finite");
  }

  ContourGrid grid;
  grid.diff_axis.assign(diff_grid.begin(), diff_grid.end());
  grid.ratio_axis.assign(ratio_grid.begin(), ratio_grid.end());
  grid.corr = corr;
  grid.K = K;
  grid.values.assign(diff_grid.size(), std::vector<double>(ratio_grid.size(), 0.0));

  const RngStream root(seed);
  const double tail = std::sqrt(std::max(0.0, 1.0 - corr * corr));
  internal::ParallelFor(diff_grid.size() * ratio_grid.size(), threads, [&](std::size_t cell) {
    const std::size_t i = cell / ratio_grid.size();
    const std::size_t j = cell % ratio_grid.size();
    const double beta = gamma + diff_grid[i] * std::fabs(gamma);
    const double sd_b = ratio_grid[j] * sigma_gamma;
    const double half_g = kNormal975 * sigma_gamma;
    const double half_b = kNormal975 * sd_b;
    RngStream rng = root.Child("am-contour", cell);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      const double z1 = rng.Normal();
      const double z2 = rng.Normal();
      const double g = gamma + sigma_gamma * z1;
      const double b = beta + sd_b * (corr * z1 + tail * z2);
      total += OverlapMeasure({g - half_g, g + half_g, 0.95}, {b - half_b, b + half_b, 0.95});
    }
    grid.values[i][j] = total / K;
  });
  return grid;
}

void InversionAssumption::Validate() const {
  if (!(l2 > 0.0) || !(l1 >= l2) || !std::isfinite(l1)) {
    throw InvalidArgument("inversion needs interval lengths l1 >= l2 > 0");
  }
}

InversionAssumption NullAssumptionLengths(double sigma_hat_o, double n0, double n, double level) {
  if (!(sigma_hat_o > 0.0)) throw InvalidArgument("published standard error must be positive");
  if (!(n0 > 0.0) || !(n > 0.0)) throw InvalidArgument("sample sizes must be positive");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("CI level must lie in (0, 1)");
  const double sd = sigma_hat_o * std::sqrt(n0 / n);
  const double l = 2.0 * NormalQuantile(0.5 * (1.0 + level)) * sd;
  return {l, l};
}

double InvertOverlap(double nu, const InversionAssumption& a) {
  a.Validate();
  if (!(nu >= 0.0 && nu <= 1.0)) throw InvalidArgument("overlap must lie in [0, 1]");
  const double nu_max = 0.5 * (1.0 + a.l2 / a.l1);
  if (nu <= 0.0) return 0.5 * (a.l1 + a.l2);
  if (nu >= nu_max) return 0.5 * (a.l1 - a.l2);
  return 0.5 * (a.l1 + a.l2) - 2.0 * nu / (1.0 / a.l1 + 1.0 / a.l2);
}

ConfidenceInterval InvertCredibleInterval(const ConfidenceInterval& nu_ci,
                                          const InversionAssumption& a) {
  if (!(nu_ci.lower <= nu_ci.upper)) throw InvalidArgument("credible interval is reversed");
  return {InvertOverlap(nu_ci.upper, a), InvertOverlap(nu_ci.lower, a), nu_ci.level};
}

Verification Verify(const Dataset& d, const ModelSpec& m0, const ModelSpec& m1,
                    std::string_view coef, const AmConfig& config, BudgetLedger& ledger) {
  config.Validate();
  const PartitionPlan plan = MakePartition(d.rows(), static_cast<std::size_t>(config.M),
                                           config.seed);
  Verification v;
  v.overlap = AverageOverlap(d, m0, m1, coef, plan, config.level, config.allow_degenerate);
  const RngStream root(config.seed);
  RngStream noise = root.Child("am-noise");
  v.released = ReleaseOverlap(v.overlap, config, ledger, noise);
  RngStream draws = root.Child("am-posterior");
  v.posterior = PosteriorNu(v.released, config, draws);
  return v;
}

}  // namespace dprep::am
