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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dprep/am_framework.hpp"
#include "dprep/error.hpp"
#include "dprep/stats.hpp"
#include "test_support.hpp"

namespace dprep::am {
namespace {

ConfidenceInterval Ci(double lo, double hi) { return {lo, hi, 0.95}; }

// Intersection length by explicit case analysis on the endpoint order.
double GeometricOverlap(double a0, double a1, double b0, double b1) {
  double inter;
  if (a1 <= b0 || b1 <= a0) {
    inter = 0.0;
  } else if (a0 <= b0 && b1 <= a1) {
    inter = b1 - b0;
  } else if (b0 <= a0 && a1 <= b1) {
    inter = a1 - a0;
  } else if (a0 < b0) {
    inter = a1 - b0;
  } else {
    inter = b1 - a0;
  }
  return 0.5 * (inter / (a1 - a0) + inter / (b1 - b0));
}

TEST(OverlapMeasure, Examples) {
  EXPECT_EQ(OverlapMeasure(Ci(1, 3), Ci(1, 3)), 1.0);
  EXPECT_EQ(OverlapMeasure(Ci(0, 1), Ci(2, 3)), 0.0);
  EXPECT_EQ(OverlapMeasure(Ci(0, 1), Ci(1, 3)), 0.0);
  EXPECT_DOUBLE_EQ(OverlapMeasure(Ci(0, 2), Ci(1, 3)), 0.5);
  EXPECT_DOUBLE_EQ(OverlapMeasure(Ci(0, 4), Ci(1, 2)), 0.625);
}

TEST(OverlapMeasure, DegenerateIntervals) {
  EXPECT_THROW(OverlapMeasure(Ci(1, 1), Ci(0, 2)), DegenerateInterval);
  EXPECT_THROW(OverlapMeasure(Ci(0, 2), Ci(1, 1)), DegenerateInterval);
  EXPECT_THROW(OverlapMeasure(Ci(2, 1), Ci(0, 3)), InvalidArgument);
  // Point inside: its own share is 1, the other's is 0.
  EXPECT_DOUBLE_EQ(OverlapMeasure(Ci(1, 1), Ci(0, 2), true), 0.5);
  EXPECT_DOUBLE_EQ(OverlapMeasure(Ci(5, 5), Ci(0, 2), true), 0.0);
  EXPECT_DOUBLE_EQ(OverlapMeasure(Ci(1, 1), Ci(1, 1), true), 1.0);
}

TEST(OverlapMeasure, RandomPairsMatchGeometricOracle) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> w(0.01, 4.0);
  for (int i = 0; i < 10000; ++i) {
    const double a0 = u(gen), a1 = a0 + w(gen);
    // Every tenth pair reuses an endpoint to exercise ties.
    const double b0 = i % 10 == 0 ? a0 : u(gen);
    const double b1 = i % 20 == 0 ? a1 : b0 + w(gen);
    const double nu = OverlapMeasure(Ci(a0, a1), Ci(b0, b1));
    ASSERT_NEAR(nu, GeometricOverlap(a0, a1, b0, b1), 1e-12);
    ASSERT_EQ(nu, OverlapMeasure(Ci(b0, b1), Ci(a0, a1)));
    ASSERT_GE(nu, 0.0);
    ASSERT_LE(nu, 1.0);
    const bool identical = a0 == b0 && a1 == b1;
    ASSERT_EQ(nu == 1.0, identical) << a0 << " " << a1 << " " << b0 << " " << b1;
  }
}

TEST(OverlapMeasure, SeparationNeverIncreasesOverlap) {
  for (double w2 : {0.5, 1.0, 3.0}) {
    double prev = 2.0;
    for (int i = 0; i <= 400; ++i) {
      const double c = i * 0.01;
      const double nu = OverlapMeasure(Ci(-1.0, 1.0), Ci(c - w2 / 2, c + w2 / 2));
      ASSERT_LE(nu, prev + 1e-15);
      prev = nu;
    }
  }
}

TEST(AmConfig, Validation) {
  AmConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.grid_points, 10001);
  EXPECT_EQ(c.level, 0.95);
  c.M = 1;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = AmConfig{};
  c.level = 1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(Posterior, LargeRateCollapsesOnRelease) {
  const AmPosterior p = PosteriorDensity(0.5, 10000, 1.0, BetaPrior{}, 10001);
  EXPECT_NEAR(p.Mean(), 0.5, 0.001);
}

TEST(Posterior, TinyRateIsPriorDominated) {
  const AmPosterior p = PosteriorDensity(0.9, 1, 1e-6, BetaPrior{}, 10001);
  EXPECT_NEAR(p.Mean(), 0.5, 0.01);
  EXPECT_NEAR(p.Quantile(0.25), 0.25, 0.01);
}

TEST(Posterior, ApplicationCredibleInterval) {
  const AmPosterior p = PosteriorDensity(1.03, 25, 1.0, BetaPrior{}, 10001);
  const ConfidenceInterval ci = CredibleInterval(p, 0.90);
  // Density ~ exp(25 x) on [0, 1]: F(x) = (e^{25x} - 1) / (e^{25} - 1).
  const auto q = [](double prob) { return std::log1p(prob * std::expm1(25.0)) / 25.0; };
  EXPECT_NEAR(ci.lower, q(0.05), 1e-6);
  EXPECT_NEAR(ci.upper, q(0.95), 1e-6);
  EXPECT_NEAR(ci.lower, 0.878, 0.01);
  EXPECT_NEAR(ci.upper, 0.998, 0.01);
}

TEST(Posterior, DensityIntegratesToOne) {
  for (double nu : {-0.3, 0.0, 0.42, 1.03, 2.0}) {
    for (BetaPrior prior : {BetaPrior{1, 1}, BetaPrior{2, 5}, BetaPrior{0.5, 0.5}}) {
      const AmPosterior p = PosteriorDensity(nu, 25, 0.7, prior, 10001);
      double total = 0.0;
      for (std::size_t i = 1; i < p.grid.size(); ++i) {
        total += 0.5 * (p.grid[i] - p.grid[i - 1]) * (p.density[i] + p.density[i - 1]);
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
      for (double v : p.density) ASSERT_GE(v, 0.0);
      EXPECT_EQ(p.cdf.back(), 1.0);
    }
  }
}

TEST(Posterior, OpenGridForSingularPrior) {
  const AmPosterior p = PosteriorDensity(0.5, 10, 1.0, BetaPrior{0.5, 2.0}, 101);
  EXPECT_GT(p.grid.front(), 0.0);
  EXPECT_LT(p.grid.back(), 1.0);
  for (double v : p.density) ASSERT_TRUE(std::isfinite(v));
  const AmPosterior closed = PosteriorDensity(0.5, 10, 1.0, BetaPrior{}, 101);
  EXPECT_EQ(closed.grid.front(), 0.0);
  EXPECT_EQ(closed.grid.back(), 1.0);
}

TEST(Posterior, MeanBetweenPriorMeanAndClampedRelease) {
  for (double nu : {-0.5, 0.1, 0.3, 0.5, 0.7, 0.95, 1.4}) {
    for (double rate : {0.5, 5.0, 50.0}) {
      const double mean = PosteriorDensity(nu, 10, rate / 10, BetaPrior{}, 10001).Mean();
      const double target = std::clamp(nu, 0.0, 1.0);
      EXPECT_GE(mean, std::min(0.5, target) - 1e-9) << nu << " " << rate;
      EXPECT_LE(mean, std::max(0.5, target) + 1e-9) << nu << " " << rate;
    }
  }
}

TEST(Posterior, SamplesFollowGridAndAreSeeded) {
  AmConfig cfg;
  cfg.M = 25;
  cfg.samples = 20000;
  AmReleased rel{0.8, 25, 1.0, {}};
  RngStream a(3), b(3);
  const AmPosterior pa = PosteriorNu(rel, cfg, a);
  const AmPosterior pb = PosteriorNu(rel, cfg, b);
  EXPECT_EQ(pa.samples, pb.samples);
  EXPECT_NEAR(Mean(pa.samples), pa.Mean(), 0.003);
  EXPECT_NEAR(EmpiricalQuantile(pa.samples, 0.9), pa.Quantile(0.9), 0.005);
}

TEST(CredibleInterval, RejectsBadMass) {
  const AmPosterior p = PosteriorDensity(0.5, 10, 1.0, BetaPrior{}, 101);
  EXPECT_THROW(CredibleInterval(p, 0.0), InvalidArgument);
  EXPECT_THROW(CredibleInterval(p, 1.0), InvalidArgument);
}

TEST(ErrorBound, Examples) {
  EXPECT_NEAR(ErrorBound(25, 1.0, 0.2), 25.0 * (0.01 + 0.0032), 1e-12);
  EXPECT_NEAR(ErrorBound(25, 1.0, 0.2), 0.33, 1e-12);
  EXPECT_NEAR(ErrorBound(25, 1.0, 0.2, 1.0 / 12.0), 0.163, 1e-3);
  EXPECT_LT(ErrorBound(1000000, 1.0, 0.2), 1e-4);
  EXPECT_THROW(ErrorBound(0, 1.0, 0.2), InvalidArgument);
  EXPECT_THROW(ErrorBound(25, 1.0, 0.0), InvalidArgument);
}

TEST(ReferenceContour, PerfectCouplingGivesOne) {
  const std::vector<double> diff = {0.0};
  const std::vector<double> ratio = {1.0};
  const ContourGrid g = ReferenceContour(5.0, 0.5, 1.0, diff, ratio, 500, 1);
  EXPECT_NEAR(g.values[0][0], 1.0, 1e-12);
}

TEST(ReferenceContour, ScaleInvariance) {
  const std::vector<double> diff = {0.0, 0.1, 0.2, 0.4};
  const std::vector<double> ratio = {0.5, 1.0, 2.0};
  const int K = 2000;
  const ContourGrid a = ReferenceContour(5.0, 0.5, 0.95, diff, ratio, K, 11);
  const ContourGrid b = ReferenceContour(10.0, 1.0, 0.95, diff, ratio, K, 12);
  for (std::size_t i = 0; i < diff.size(); ++i) {
    for (std::size_t j = 0; j < ratio.size(); ++j) {
      // Overlap is bounded, so its sd is at most 1/2; 4 MC sd of a difference.
      EXPECT_NEAR(a.values[i][j], b.values[i][j], 4.0 * 0.5 * std::sqrt(2.0 / K));
    }
  }
}

TEST(ReferenceContour, RoughlyDecreasingInDifference) {
  std::vector<double> diff;
  for (int i = 0; i <= 10; ++i) diff.push_back(i * 0.05);
  const std::vector<double> ratio = {0.5, 1.0, 1.5};
  const int K = 500;
  const ContourGrid g = ReferenceContour(5.0, 0.5, 0.95, diff, ratio, K, 4);
  const double mc_sd = 0.5 / std::sqrt(static_cast<double>(K));
  for (std::size_t j = 0; j < ratio.size(); ++j) {
    for (std::size_t i = 1; i < diff.size(); ++i) {
      EXPECT_LE(g.values[i][j], g.values[i - 1][j] + 2.0 * mc_sd) << i << " " << j;
    }
  }
}

TEST(ReferenceContour, CsvLayoutAndThreadIndependence) {
  const std::vector<double> diff = {0.0, 0.5};
  const std::vector<double> ratio = {1.0, 2.0, 3.0};
  const ContourGrid a = ReferenceContour(-2.0, 0.3, 0.9, diff, ratio, 100, 5, 1);
  const ContourGrid b = ReferenceContour(-2.0, 0.3, 0.9, diff, ratio, 100, 5, 3);
  EXPECT_EQ(a.values, b.values);
  const std::string csv = a.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "diff/ratio,1,2,3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_THROW(ReferenceContour(0.0, 0.3, 0.9, diff, ratio, 100, 5), InvalidArgument);
  EXPECT_THROW(ReferenceContour(1.0, 0.3, 1.5, diff, ratio, 100, 5), InvalidArgument);
}

TEST(NullAssumption, ApplicationScale) {
  const double n = std::floor(160364.0 / 25.0);
  const InversionAssumption a = NullAssumptionLengths(177.0, 160364.0, n);
  const double sd = 177.0 * std::sqrt(160364.0 / n);
  EXPECT_NEAR(sd, 885.0, 0.1);
  EXPECT_NEAR(a.l1, 2.0 * testing::NormalQuantileOracle(0.975) * sd, 1e-9);
  EXPECT_NEAR(a.l1, 3469.1, 0.5);
  EXPECT_EQ(a.l1, a.l2);
}

TEST(NullAssumption, NoInflationAtFullSize) {
  const InversionAssumption a = NullAssumptionLengths(1.0, 500.0, 500.0, 0.95);
  EXPECT_NEAR(a.l1, 3.9199, 1e-4);
  EXPECT_NEAR(NullAssumptionLengths(2.5, 10, 10).l1, 2.0 * 1.959964 * 2.5, 1e-5);
}

TEST(InvertOverlap, EqualLengths) {
  const InversionAssumption a{4.0, 4.0};
  for (double nu : {0.0, 0.1, 0.5, 0.8, 1.0}) EXPECT_NEAR(InvertOverlap(nu, a), 4.0 * (1 - nu), 1e-12);
  EXPECT_EQ(InvertOverlap(1.0, a), 0.0);
  EXPECT_NEAR(InvertOverlap(0.5, a), 2.0, 1e-12);
}

TEST(InvertOverlap, BoundaryConventions) {
  const InversionAssumption a{5.0, 2.0};
  const double nu_max = 0.5 * (1 + 2.0 / 5.0);
  EXPECT_EQ(InvertOverlap(0.0, a), 3.5);
  EXPECT_EQ(InvertOverlap(nu_max, a), 1.5);
  EXPECT_EQ(InvertOverlap(0.95, a), 1.5);
  EXPECT_NEAR(InvertOverlap(nu_max - 1e-12, a), 1.5, 1e-9);
  EXPECT_THROW(InvertOverlap(1.2, a), InvalidArgument);
  EXPECT_THROW(InvertOverlap(0.5, InversionAssumption{1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(InvertOverlap(0.5, InversionAssumption{1.0, 0.0}), InvalidArgument);
}

TEST(InvertOverlap, RoundTripThroughGeometry) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double l1 = 0.5 + 5.0 * u(gen);
    const double l2 = l1 * (0.05 + 0.95 * u(gen));
    const double lo = 0.5 * (l1 - l2), hi = 0.5 * (l1 + l2);
    const double d = lo + (hi - lo) * (0.001 + 0.998 * u(gen));
    const double nu = GeometricOverlap(-l1 / 2, l1 / 2, d - l2 / 2, d + l2 / 2);
    ASSERT_NEAR(InvertOverlap(nu, {l1, l2}), d, 1e-12 * (1 + l1));
  }
}

TEST(InvertOverlap, Nonincreasing) {
  const InversionAssumption a{3.0, 1.0};
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) {
    const double v = InvertOverlap(i / 1000.0, a);
    ASSERT_LE(v, prev);
    prev = v;
  }
}

TEST(InvertCredibleInterval, ApplicationExample) {
  const ConfidenceInterval out =
      InvertCredibleInterval({0.878, 0.998, 0.9}, InversionAssumption{3469.1, 3469.1});
  EXPECT_NEAR(out.lower, 6.9, 0.1);
  EXPECT_NEAR(out.upper, 423.2, 0.1);
}

TEST(InvertCredibleInterval, FullRangeAndPoint) {
  const InversionAssumption a{4.0, 1.0};
  const ConfidenceInterval full = InvertCredibleInterval({0.0, 0.625, 0.9}, a);
  EXPECT_DOUBLE_EQ(full.lower, 1.5);
  EXPECT_DOUBLE_EQ(full.upper, 2.5);
  const ConfidenceInterval point = InvertCredibleInterval({0.3, 0.3, 0.9}, a);
  EXPECT_EQ(point.lower, point.upper);
  EXPECT_DOUBLE_EQ(point.lower, InvertOverlap(0.3, a));
}

TEST(AverageOverlap, IdenticalModelsOverlapFully) {
  const Dataset d = testing::ToDataset(testing::SimulateLinear(300, RngStream(50)));
  const ModelSpec m = ParseFormula("y ~ x1 + x2 + x3", d);
  const OverlapResult o = AverageOverlap(d, m, m, "x2", MakePartition(300, 6, 1), 0.95);
  ASSERT_EQ(o.nus.size(), 6u);
  for (double nu : o.nus) EXPECT_EQ(nu, 1.0);
  EXPECT_EQ(o.nu_bar, 1.0);
}

TEST(AverageOverlap, MeanOfSubsetOverlaps) {
  const Dataset d = testing::ToDataset(testing::SimulateLinear(300, RngStream(51)));
  const ModelSpec m0 = ParseFormula("y ~ x1 + x2 + x3", d);
  const ModelSpec m1 = ParseFormula("y ~ x1 + x2", d);
  const OverlapResult o = AverageOverlap(d, m0, m1, "x2", MakePartition(300, 5, 2), 0.95);
  EXPECT_NEAR(o.nu_bar, Mean(o.nus), 1e-15);
  for (std::size_t l = 0; l < 5; ++l) {
    EXPECT_EQ(o.nus[l], OverlapMeasure(o.ci_base[l], o.ci_alt[l]));
    EXPECT_GE(o.nus[l], 0.0);
    EXPECT_LE(o.nus[l], 1.0);
  }
}

TEST(AverageOverlap, RequiresUntransformedCoefficientInBothModels) {
  const Dataset d = testing::ToDataset(testing::SimulateLinear(100, RngStream(52)));
  const ModelSpec m0 = ParseFormula("y ~ x1 + x2", d);
  const ModelSpec m1 = ParseFormula("y ~ x1 + log(x2)", d);
  EXPECT_THROW(AverageOverlap(d, m0, m1, "x2", MakePartition(100, 2, 1), 0.95), InvalidArgument);
  EXPECT_THROW(AverageOverlap(d, m0, m0, "x3", MakePartition(100, 2, 1), 0.95), InvalidArgument);
}

TEST(AverageOverlap, SingularFitNamesSubsetAndModel) {
  auto cols = testing::SimulateLinear(40, RngStream(53));
  std::vector<double> twin(cols.x1);
  const Dataset d({"y", "x1", "x2", "twin"}, {cols.y, cols.x1, cols.x2, twin});
  const ModelSpec m0 = ParseFormula("y ~ x1 + x2", d);
  const ModelSpec m1 = ParseFormula("y ~ x1 + x2 + twin", d);
  try {
    AverageOverlap(d, m0, m1, "x2", MakePartition(40, 2, 1), 0.95);
    FAIL();
  } catch (const SingularFit& e) {
    EXPECT_NE(std::string(e.what()).find("model 1"), std::string::npos) << e.what();
    EXPECT_EQ(e.subset(), 0);
  }
}

// Property b1: with beta != gamma the overlap shrinks as subsets grow.
// x2 is correlated with x1, so dropping x2 biases the x1 coefficient.
TEST(AverageOverlap, ShrinksWithSubsetSizeWhenCoefficientsDiffer) {
  const auto simulate = [](std::size_t n, RngStream rng) {
    std::vector<double> y, x1, x2;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 10.0 * rng.Uniform();
      const double b = 5.0 + 0.3 * (a - 5.0) + rng.Normal();
      x1.push_back(a);
      x2.push_back(b);
      y.push_back(2.0 * a + 0.9 * b + 3.0 * rng.Normal());
    }
    return Dataset({"y", "x1", "x2"}, {y, x1, x2});
  };
  int wins = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    double mean_nu[2];
    int k = 0;
    for (std::size_t n : {250u, 4000u}) {
      const std::size_t M = 10;
      const Dataset d = simulate(n * M, RngStream(seed).Child("b1", n));
      const ModelSpec m0 = ParseFormula("y ~ x1 + x2", d);
      const ModelSpec m1 = ParseFormula("y ~ x1", d);
      mean_nu[k++] = AverageOverlap(d, m0, m1, "x1", MakePartition(n * M, M, seed), 0.95).nu_bar;
    }
    wins += mean_nu[1] < mean_nu[0] ? 1 : 0;
  }
  // One-sided sign test: P(X >= 15 | p = 1/2, n = 20) = 0.0207.
  EXPECT_GE(wins, 15);
}

TEST(Verify, SpendsOnceWithSensitivityOneOverM) {
  const Dataset d = testing::ToDataset(testing::SimulateLinear(500, RngStream(54)));
  const ModelSpec m0 = ParseFormula("y ~ x1 + x2 + x3", d);
  const ModelSpec m1 = ParseFormula("y ~ x1 + x2", d);
  AmConfig cfg;
  cfg.M = 10;
  cfg.seed = 5;
  cfg.grid_points = 2001;
  BudgetLedger ledger(1.0);
  const Verification v = Verify(d, m0, m1, "x2", cfg, ledger);
  ASSERT_EQ(ledger.entries().size(), 1u);
  EXPECT_DOUBLE_EQ(ledger.entries()[0].sensitivity, 0.1);
  EXPECT_EQ(v.posterior.samples.size(), 1000u);
  BudgetLedger other(1.0);
  const Verification w = Verify(d, m0, m1, "x2", cfg, other);
  EXPECT_EQ(v.released.nu_bar_noisy, w.released.nu_bar_noisy);
  EXPECT_EQ(v.posterior.samples, w.posterior.samples);
  EXPECT_THROW(Verify(d, m0, m1, "x2", cfg, ledger), BudgetExceeded);
}

}  // namespace
}  // namespace dprep::am
