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

#include "dprep/ad_framework.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dprep/error.hpp"
#include "dprep/special.hpp"
#include "dprep/stats.hpp"
#include "format.hpp"
#include "parallel.hpp"

namespace dprep::ad {
namespace {

void CheckInflationInputs(double sigma_hat_o, double n0, double n) {
  if (!(sigma_hat_o > 0.0)) throw InvalidArgument("published standard error must be positive");
  if (!(n > 0.0) || !(n0 > 0.0)) throw InvalidArgument("sample sizes must be positive");
  if (n > n0) {
    std::ostringstream msg;
    msg << "subset size n = " << n << " exceeds the published sample size n0 = " << n0
        << "; the published standard error must not be deflated. Choose M so that "
        << "N / M is about n0 instead";
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

ToleranceRegion BuildFixedRegion(double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    std::ostringstream msg;
    msg << "tolerance region needs lower < upper, got [" << lower << ", " << upper << "]";
    throw InvalidArgument(msg.str());
  }
  return {lower, upper, RegionKind::kFixed, std::nullopt};
}

ToleranceRegion BuildInflatedRegion(double gamma_hat_o, double sigma_hat_o, double alpha,
                                    double n0, double n) {
  CheckInflationInputs(sigma_hat_o, n0, n);
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!std::isfinite(gamma_hat_o)) throw InvalidArgument("published estimate must be finite");
  const double half = alpha * std::sqrt(n0 / n) * sigma_hat_o;
  return {gamma_hat_o - half, gamma_hat_o + half, RegionKind::kInflated,
          InflationProvenance{gamma_hat_o, sigma_hat_o, alpha, n0, n}};
}

double DeltaStar(double /*gamma_hat_o*/, double sigma_hat_o, double alpha, double n0,
                 double n) {
  CheckInflationInputs(sigma_hat_o, n0, n);
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  const double s = std::sqrt(n0 / n);
  return NormalCdf(alpha * (1.0 + 1.0 / s)) - NormalCdf(alpha * (1.0 / s - 1.0));
}

void AdConfig::Validate() const {
  if (M < 2) throw InvalidArgument("AD needs M >= 2 subsets");
  (void)PrivacyParams{epsilon};
  if (delta && !(*delta > 0.0 && *delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
    throw InvalidArgument("Beta prior parameters must be positive");
  }
  if (mcmc.burn_in < 0 || mcmc.keep < 1) {
    throw InvalidArgument("MCMC needs burn_in >= 0 and keep >= 1");
  }
}

IndicatorCount ComputeIndicatorCount(const Dataset& d, const ModelSpec& m, std::string_view coef,
                                     const ToleranceRegion& region, const PartitionPlan& plan) {
  IndicatorCount out;
  out.w.reserve(plan.subsets());
  out.estimates.reserve(plan.subsets());
  for (std::size_t l = 0; l < plan.subsets(); ++l) {
    FitResult fit;
    try {
      fit = FitOls(SubsetView(d, plan, l), m);
    } catch (const SingularFit& e) {
      throw SingularFit("subset " + std::to_string(l) + ": " + e.what(), static_cast<int>(l));
    } catch (const DataError& e) {
      throw DataError("subset " + std::to_string(l) + ": " + e.what());
    }
    const double estimate = fit.coefficients(static_cast<Eigen::Index>(fit.IndexOf(coef)));
    const int inside = region.Contains(estimate) ? 1 : 0;
    out.estimates.push_back(estimate);
    out.w.push_back(inside);
    out.s += inside;
  }
  return out;
}

AdReleased ReleaseCount(int s, const AdConfig& config, BudgetLedger& ledger, RngStream& rng) {
  config.Validate();
  if (s < 0 || s > config.M) throw InvalidArgument("indicator count outside [0, M]");
  const NoisyRelease entry =
      ReleaseScalar(static_cast<double>(s), 1.0, PrivacyParams{config.epsilon}, ledger, rng,
                    "ad-count");
  return {entry.value, config.M, config.epsilon, entry};
}

double DrawRGivenS(RngStream& rng, int s, int M, const BetaPrior& prior) {
  return rng.Beta(s + prior.a, M - s + prior.b);
}

std::vector<double> SConditional(double r, double s_noisy, int M, double epsilon) {
  std::vector<double> logw(static_cast<std::size_t>(M) + 1);
  const double log_r = std::log(r);
  const double log_1mr = std::log1p(-r);
  const double lgm = std::lgamma(M + 1.0);
  double top = -std::numeric_limits<double>::infinity();
  for (int s = 0; s <= M; ++s) {
    double lw = -epsilon * std::fabs(s_noisy - s) + lgm - std::lgamma(s + 1.0) -
                std::lgamma(M - s + 1.0);
    // 0 * log(0) is taken as 0.
    if (s > 0) lw += s * log_r;
    if (s < M) lw += (M - s) * log_1mr;
    logw[static_cast<std::size_t>(s)] = lw;
    top = std::max(top, lw);
  }
  double total = 0.0;
  for (double& lw : logw) {
    lw = std::exp(lw - top);
    total += lw;
  }
  for (double& w : logw) w /= total;
  return logw;
}

int DrawSGivenR(RngStream& rng, double r, double s_noisy, int M, double epsilon) {
  const std::vector<double> p = SConditional(r, s_noisy, M, epsilon);
  const double u = rng.Uniform();
  double cumulative = 0.0;
  for (int s = 0; s < M; ++s) {
    cumulative += p[static_cast<std::size_t>(s)];
    if (u < cumulative) return s;
  }
  return M;
}

AdPosterior GibbsPosterior(const AdReleased& released, const AdConfig& config, RngStream& rng) {
  config.Validate();
  if (released.M != config.M || released.epsilon != config.epsilon) {
    throw InvalidArgument("posterior config does not match the release (M, epsilon)");
  }
  const int M = config.M;
  int s = static_cast<int>(
      std::lround(std::clamp(released.s_noisy, 0.0, static_cast<double>(M))));
  double r = (s + config.prior.a) / (M + config.prior.a + config.prior.b);
  (void)r;

  AdPosterior post;
  post.r_samples.reserve(static_cast<std::size_t>(config.mcmc.keep));
  post.s_samples.reserve(static_cast<std::size_t>(config.mcmc.keep));
  const int total = config.mcmc.burn_in + config.mcmc.keep;
  for (int it = 0; it < total; ++it) {
    r = DrawRGivenS(rng, s, M, config.prior);
    s = DrawSGivenR(rng, r, released.s_noisy, M, config.epsilon);
    if (it >= config.mcmc.burn_in) {
      post.r_samples.push_back(r);
      post.s_samples.push_back(s);
    }
  }
  post.theta_hat = ThetaHat(post.r_samples, config.delta.value_or(0.5));
  return post;
}

double ThetaHat(std::span<const double> r_samples, double delta) {
  if (r_samples.empty()) throw InvalidArgument("theta_hat of an empty sample");
  std::size_t above = 0;
  for (double r : r_samples) above += (r >= delta) ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(r_samples.size());
}

double RobustnessStatistic(std::span<const double> r_obs) {
  const double probs[] = {0.1, 0.9};
  const auto q = EmpiricalQuantiles(r_obs, probs);
  if (0.5 < q[0]) return q[0] - 0.5;
  if (0.5 > q[1]) return 0.5 - q[1];
  return 0.0;
}

std::string RobustnessGrid::ToCsv() const {
  std::ostringstream out;
  out << "gamma/M";
  for (int m : m_axis) out << "," << m;
  out << "\n";
  for (std::size_t g = 0; g < gamma_axis.size(); ++g) {
    out << internal::FormatDouble(gamma_axis[g]);
    for (double v : t[g]) out << "," << internal::FormatDouble(v);
    out << "\n";
  }
  return out.str();
}

RobustnessGrid RobustnessContour(std::span<const double> gamma_grid, std::span<const int> m_grid,
                                 double sigma_hat_o, double n0, std::size_t N, double epsilon,
                                 const ToleranceRegion& region, int K, uint64_t seed,
                                 unsigned threads) {
  if (gamma_grid.empty() || m_grid.empty()) throw InvalidArgument("contour grids are empty");
  if (K < 100) throw InvalidArgument("contour needs K >= 100 replications per cell");
  if (!(sigma_hat_o > 0.0) || !(n0 > 0.0)) {
    throw InvalidArgument("contour needs a positive standard error and n0");
  }
  (void)PrivacyParams{epsilon};
  for (int m : m_grid) {
    if (m < 1 || static_cast<std::size_t>(m) > N) {
      throw InvalidArgument("contour M values must lie in [1, N]");
    }
  }

  RobustnessGrid grid;
  grid.gamma_axis.assign(gamma_grid.begin(), gamma_grid.end());
  grid.m_axis.assign(m_grid.begin(), m_grid.end());
  grid.K = K;
  grid.t.assign(gamma_grid.size(), std::vector<double>(m_grid.size(), 0.0));

  const RngStream root(seed);
  const std::size_t cells = gamma_grid.size() * m_grid.size();
  internal::ParallelFor(cells, threads, [&](std::size_t cell) {
    const std::size_t g = cell / m_grid.size();
    const std::size_t j = cell % m_grid.size();
    const int M = m_grid[j];
    const double n = std::floor(static_cast<double>(N) / M);
    const double sd = sigma_hat_o * std::sqrt(n0 / n);
    const double gamma = gamma_grid[g];
    RngStream rng = root.Child("ad-contour", cell);
    std::vector<double> r_obs(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      int s = 0;
      for (int l = 0; l < M; ++l) s += region.Contains(gamma + sd * rng.Normal()) ? 1 : 0;
      r_obs[static_cast<std::size_t>(k)] = (s + LaplaceSample(rng, 1.0 / epsilon)) / M;
    }
    grid.t[g][j] = RobustnessStatistic(r_obs);
  });
  return grid;
}

ToleranceRegion ResolveRegion(const RegionSpec& spec, std::size_t N, int M) {
  if (spec.kind == RegionKind::kFixed) return BuildFixedRegion(spec.lower, spec.upper);
  if (M < 1) throw InvalidArgument("M must be positive");
  const double n = std::floor(static_cast<double>(N) / M);
  return BuildInflatedRegion(spec.gamma_hat_o, spec.sigma_hat_o, spec.alpha, spec.n0, n);
}

Verification Verify(const Dataset& d, const ModelSpec& m, std::string_view coef,
                    const RegionSpec& region_spec, AdConfig config, BudgetLedger& ledger) {
  config.Validate();
  Verification v;
  v.region = ResolveRegion(region_spec, d.rows(), config.M);
  if (v.region.kind == RegionKind::kInflated) {
    const auto& p = *v.region.provenance;
    v.delta_star = DeltaStar(p.gamma_hat_o, p.sigma_hat_o, p.alpha, p.n0, p.n);
  }
  if (!config.delta) {
    config.delta = v.delta_star ? kInflatedDeltaFactor * *v.delta_star : 0.5;
  }
  v.delta = *config.delta;

  const PartitionPlan plan = MakePartition(d.rows(), static_cast<std::size_t>(config.M),
                                           config.seed);
  v.counts = ComputeIndicatorCount(d, m, coef, v.region, plan);

  const RngStream root(config.seed);
  RngStream noise = root.Child("ad-noise");
  v.released = ReleaseCount(v.counts.s, config, ledger, noise);
  RngStream chain = root.Child("ad-gibbs");
  v.posterior = GibbsPosterior(v.released, config, chain);
  return v;
}

}  // namespace dprep::ad
