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

#ifndef DPREP_AM_FRAMEWORK_HPP_
#define DPREP_AM_FRAMEWORK_HPP_

// Alternative-model comparison: per subset, the coefficient's confidence
// intervals under two models are compared by their overlap, the average
// overlap is released with Laplace noise, and a grid posterior over the
// average overlap is formed. The overlap can be inverted into a statement
// about the distance between the two models' coefficients.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dprep/ad_framework.hpp"
#include "dprep/dataset.hpp"
#include "dprep/dp_mechanism.hpp"
#include "dprep/model.hpp"
#include "dprep/partition.hpp"
#include "dprep/rng.hpp"

namespace dprep::am {

using ad::BetaPrior;

// Length of the intersection averaged over both lengths: 1 for identical
// intervals, 0 for disjoint ones. Zero-length intervals raise
// DegenerateInterval unless `allow_degenerate`, in which case a point's
// share is 1 if it lies inside the other interval and 0 otherwise.
double OverlapMeasure(const ConfidenceInterval& i1, const ConfidenceInterval& i2,
                      bool allow_degenerate = false);

struct AmConfig {
  int M = 25;
  double epsilon = 1.0;
  double level = 0.95;
  BetaPrior prior;
  int grid_points = 10001;
  int samples = 1000;
  uint64_t seed = 0;
  bool allow_degenerate = false;

  void Validate() const;
};

// Custodian-only.
struct OverlapResult {
  std::vector<double> nus;
  double nu_bar = 0.0;
  std::vector<ConfidenceInterval> ci_base;
  std::vector<ConfidenceInterval> ci_alt;
};

// Fits both models on every subset and compares the t intervals of `coef`,
// which must be an untransformed column present in both. A singular fit
// aborts naming the subset and the model (0 = base, 1 = alternative).
OverlapResult AverageOverlap(const Dataset& d, const ModelSpec& m0, const ModelSpec& m1,
                             std::string_view coef, const PartitionPlan& plan, double level,
                             bool allow_degenerate = false);

struct AmReleased {
  double nu_bar_noisy = 0.0;  // never clamped
  int M = 0;
  double epsilon = 0.0;
  NoisyRelease entry;
};

// nu_bar + Laplace(1 / (M epsilon)); one row moves one subset's overlap by
// at most one.
AmReleased ReleaseOverlap(const OverlapResult& o, const AmConfig& config, BudgetLedger& ledger,
                          RngStream& rng);

struct AmPosterior {
  std::vector<double> grid;
  std::vector<double> density;  // trapezoid-normalized
  std::vector<double> cdf;
  std::vector<double> samples;

  // Inverse of the grid CDF with linear interpolation.
  double Quantile(double p) const;
  double Mean() const;
};

// Density proportional to exp(-M eps |x - nu_L|) x^(a-1) (1-x)^(b-1),
// evaluated in log space on a uniform grid over [0, 1]. When a < 1 or b < 1
// the endpoints are singular and the grid is shifted half a step inward.
AmPosterior PosteriorDensity(double nu_bar_noisy, int M, double epsilon, const BetaPrior& prior,
                             int grid_points);
AmPosterior PosteriorNu(const AmReleased& released, const AmConfig& config, RngStream& rng);

// Equal-tailed interval holding `mass` of the grid CDF.
ConfidenceInterval CredibleInterval(const AmPosterior& p, double mass);

// Chebyshev bound on P(|nu_L - E[nu]| >= omega):
// (variance_cap / M + 2 / (M eps)^2) / omega^2.
double ErrorBound(int M, double epsilon, double omega, double variance_cap = 0.25);

struct ContourGrid {
  std::vector<double> diff_axis;   // |gamma - beta| / |gamma|
  std::vector<double> ratio_axis;  // sd(beta_hat) / sd(gamma_hat)
  std::vector<std::vector<double>> values;  // values[diff index][ratio index]
  double corr = 0.95;
  int K = 0;

  std::string ToCsv() const;
};

inline constexpr double kDefaultCorrelation = 0.95;
inline constexpr int kDefaultContourReps = 500;
inline constexpr double kNormal975 = 1.959964;

// Mean overlap of normal 95% intervals for K draws of (gamma_hat, beta_hat)
// from a bivariate normal with means (gamma, gamma + diff |gamma|) and sds
// (sigma_gamma, ratio sigma_gamma). Cell c uses stream (seed, "am-contour",
// c). No budget is spent.
ContourGrid ReferenceContour(double gamma, double sigma_gamma, double corr,
                             std::span<const double> diff_grid,
                             std::span<const double> ratio_grid, int K, uint64_t seed,
                             unsigned threads = 0);

// Interval lengths, wider first.
struct InversionAssumption {
  double l1 = 0.0;
  double l2 = 0.0;

  void Validate() const;
};

// Both models share the published standard error, rescaled to subset size:
// sd = sigma_hat_o sqrt(n0 / n) and l1 = l2 = 2 z sd.
InversionAssumption NullAssumptionLengths(double sigma_hat_o, double n0, double n,
                                          double level = 0.95);

// |beta - gamma| implied by an overlap, from the overlap of intervals of
// lengths l1 and l2 whose centers are that far apart. Nonincreasing in nu.
double InvertOverlap(double nu, const InversionAssumption& a);

// Endpoints mapped through InvertOverlap and swapped.
ConfidenceInterval InvertCredibleInterval(const ConfidenceInterval& nu_ci,
                                          const InversionAssumption& a);

struct Verification {
  OverlapResult overlap;  // custodian-only
  AmReleased released;
  AmPosterior posterior;
};

// partition -> average overlap -> noisy release -> grid posterior. Streams
// (seed, "partition"), (seed, "am-noise"), (seed, "am-posterior").
Verification Verify(const Dataset& d, const ModelSpec& m0, const ModelSpec& m1,
                    std::string_view coef, const AmConfig& config, BudgetLedger& ledger);

}  // namespace dprep::am

#endif  // DPREP_AM_FRAMEWORK_HPP_
