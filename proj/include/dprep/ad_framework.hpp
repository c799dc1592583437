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

#ifndef DPREP_AD_FRAMEWORK_HPP_
#define DPREP_AD_FRAMEWORK_HPP_

// Verification of a published coefficient against confidential data: each
// of M disjoint subsets votes on whether its estimate lands in a tolerance
// region, the vote count is released with Laplace noise, and a
// Beta-Binomial-Laplace posterior over the vote probability r is sampled.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dprep/dataset.hpp"
#include "dprep/dp_mechanism.hpp"
#include "dprep/model.hpp"
#include "dprep/partition.hpp"
#include "dprep/rng.hpp"

namespace dprep::ad {

enum class RegionKind { kFixed, kInflated };

struct InflationProvenance {
  double gamma_hat_o;
  double sigma_hat_o;
  double alpha;
  double n0;
  double n;
};

// Closed interval [lower, upper]; either bound may be infinite.
struct ToleranceRegion {
  double lower;
  double upper;
  RegionKind kind = RegionKind::kFixed;
  std::optional<InflationProvenance> provenance;

  bool Contains(double x) const { return x >= lower && x <= upper; }
};

ToleranceRegion BuildFixedRegion(double lower, double upper);

// gamma_hat_o +/- alpha * sqrt(n0 / n) * sigma_hat_o. Refuses n > n0, which
// would shrink the published uncertainty.
ToleranceRegion BuildInflatedRegion(double gamma_hat_o, double sigma_hat_o, double alpha,
                                    double n0, double n);

// Reference certainty for an inflated region: the probability that an
// N(gamma, (n0/n) sigma_hat_o^2) estimate lands in the inflated region when
// gamma sits on an edge of the uninflated one. Same refusal as inflation.
double DeltaStar(double gamma_hat_o, double sigma_hat_o, double alpha, double n0, double n);

inline constexpr double kInflatedDeltaFactor = 0.9;

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;
};

struct McmcSettings {
  int burn_in = 500;
  int keep = 1000;
};

inline constexpr McmcSettings kApplicationMcmc{500, 1000};
inline constexpr McmcSettings kSimulationMcmc{200, 1000};

struct AdConfig {
  int M = 20;
  double epsilon = 1.0;
  // Unset means the region's default: 0.5 for fixed, 0.9 delta* for inflated.
  std::optional<double> delta;
  BetaPrior prior;
  McmcSettings mcmc;
  uint64_t seed = 0;

  void Validate() const;
};

// Custodian-only. Never crosses the release boundary.
struct IndicatorCount {
  std::vector<int> w;
  int s = 0;
  std::vector<double> estimates;
};

// Fits the model on every subset of the plan and records whether the
// coefficient estimate lies in the region. A singular subset fit aborts
// with the subset index.
IndicatorCount ComputeIndicatorCount(const Dataset& d, const ModelSpec& m,
                                     std::string_view coef, const ToleranceRegion& region,
                                     const PartitionPlan& plan);

struct AdReleased {
  double s_noisy = 0.0;
  int M = 0;
  double epsilon = 0.0;
  NoisyRelease entry;
};

// S + Laplace(1/epsilon); one row changes S by at most one.
AdReleased ReleaseCount(int s, const AdConfig& config, BudgetLedger& ledger, RngStream& rng);

struct AdPosterior {
  std::vector<double> r_samples;
  std::vector<int> s_samples;
  double theta_hat = 0.0;
};

// r | S ~ Beta(S + a, M - S + b).
double DrawRGivenS(RngStream& rng, int s, int M, const BetaPrior& prior);

// P(S = s | r, S^R) for s = 0..M, proportional to
// exp(-epsilon |s_noisy - s|) C(M, s) r^s (1 - r)^(M - s).
std::vector<double> SConditional(double r, double s_noisy, int M, double epsilon);
int DrawSGivenR(RngStream& rng, double r, double s_noisy, int M, double epsilon);

// Two-block Gibbs sampler over (r, S) given the released S^R. Starts at
// S = round(clamp(S^R, 0, M)), r = (S + a) / (M + a + b); discards burn_in
// sweeps and keeps the next `keep`.
AdPosterior GibbsPosterior(const AdReleased& released, const AdConfig& config, RngStream& rng);

// Fraction of samples with r >= delta.
double ThetaHat(std::span<const double> r_samples, double delta);

// Distance from 1/2 to [q10, q90] of the r_obs sample; 0 when 1/2 is inside.
double RobustnessStatistic(std::span<const double> r_obs);

struct RobustnessGrid {
  std::vector<double> gamma_axis;
  std::vector<int> m_axis;
  std::vector<std::vector<double>> t;  // t[gamma index][M index]
  int K = 0;

  std::string ToCsv() const;
};

inline constexpr int kDefaultContourReps = 750;

// Budget-free simulation for choosing M. For each (gamma, M) cell with
// n = floor(N / M): K times draw M estimates from N(gamma, (n0/n) sigma^2),
// count those inside the region, add Laplace(1/epsilon) and divide by M; T
// summarizes the K values. Cell c uses stream (seed, "ad-contour", c), so
// the grid does not depend on `threads`.
RobustnessGrid RobustnessContour(std::span<const double> gamma_grid, std::span<const int> m_grid,
                                 double sigma_hat_o, double n0, std::size_t N, double epsilon,
                                 const ToleranceRegion& region, int K, uint64_t seed,
                                 unsigned threads = 0);

// Region as requested by a caller; inflation needs the subset size, which
// is only known once N and M are.
struct RegionSpec {
  RegionKind kind = RegionKind::kFixed;
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.0;
  double gamma_hat_o = 0.0;
  double sigma_hat_o = 0.0;
  double n0 = 0.0;
};

ToleranceRegion ResolveRegion(const RegionSpec& spec, std::size_t N, int M);

struct Verification {
  ToleranceRegion region;
  double delta = 0.5;
  std::optional<double> delta_star;
  IndicatorCount counts;  // custodian-only
  AdReleased released;
  AdPosterior posterior;
};

// partition -> indicators -> noisy count -> posterior -> theta_hat.
// Randomness comes from (seed, "partition"), (seed, "ad-noise") and
// (seed, "ad-gibbs").
Verification Verify(const Dataset& d, const ModelSpec& m, std::string_view coef,
                    const RegionSpec& region, AdConfig config, BudgetLedger& ledger);

}  // namespace dprep::ad

#endif  // DPREP_AD_FRAMEWORK_HPP_
