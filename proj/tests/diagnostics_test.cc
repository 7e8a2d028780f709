// Copyright 2026 The dpdescent Authors
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

#include "dpdescent/diagnostics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpdescent {
namespace {

// Standard normal tail values, evaluated with 30-digit arithmetic.
constexpr double kTwoSidedTailAtOne = 0.317310507862914103;  // 2 (1 - Phi(1))
constexpr double kSignMeanAtOne = 0.682689492137085897;      // 1 - 2 Phi(-1)

Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

RandomStream Diag(std::uint64_t seed) {
  return CounterRng(seed).Stream(StreamPurpose::kDiagnostics, 0);
}

TEST(EstimateEtaTest, DeterministicCases) {
  const ObjectiveSpec p = MakeDiagonalQuadratic(
      Vec({1.0, 1.0}), NoiseModel::MultiplicativeBounded(0.0));
  RandomStream s = Diag(1);
  const MonteCarloEstimate high = EstimateEta(p, Vec({1.2, 1.6}), 1.0, 1000, s);
  EXPECT_EQ(high.value, 1.0);
  EXPECT_EQ(high.standard_error, 0.0);
  EXPECT_EQ(EstimateEta(p, Vec({0.3, 0.4}), 1.0, 1000, s).value, 0.0);
}

TEST(EstimateEtaTest, GaussianTail) {
  const ObjectiveSpec p =
      MakeDiagonalQuadratic(Vec({1.0}), NoiseModel::AdditiveGaussian(1.0));
  RandomStream s = Diag(2);
  const int n = 100000;
  const MonteCarloEstimate eta = EstimateEta(p, Vec({0.0}), 1.0, n, s);
  const double se =
      std::sqrt(kTwoSidedTailAtOne * (1 - kTwoSidedTailAtOne) / n);
  EXPECT_NEAR(eta.value, kTwoSidedTailAtOne, 4.0 * se);
  EXPECT_EQ(eta.samples, n);
}

TEST(EstimateDTest, MultiplicativeAndZeroNoiseAreExact) {
  for (const double rho : {0.0, 0.5, 0.9}) {
    const ObjectiveSpec p =
        MakeQuadratic(5, 0.1, 1.0, 0, NoiseModel::MultiplicativeBounded(rho));
    RandomStream s = Diag(3);
    EXPECT_NEAR(EstimateD(p, Vector::LinSpaced(5, -1, 2), 1000, s).value, 1.0,
                1e-15);
  }
}

TEST(EstimateDTest, GaussianSignMean) {
  // grad f = [1] at x = [1] on the unit quadratic.
  const ObjectiveSpec p =
      MakeDiagonalQuadratic(Vec({1.0}), NoiseModel::AdditiveGaussian(1.0));
  RandomStream s = Diag(4);
  const MonteCarloEstimate d = EstimateD(p, Vec({1.0}), 100000, s);
  EXPECT_LE(std::abs(d.value - kSignMeanAtOne), 4.0 * d.standard_error);
}

TEST(EstimateDTest, VanishingGradientIsAnError) {
  const ObjectiveSpec p = MakeBoundedCell(2);
  RandomStream s = Diag(5);
  EXPECT_THROW(EstimateD(p, Vector::Zero(2), 10, s), std::invalid_argument);
}

TEST(PhiTest, Examples) {
  EXPECT_EQ(Phi(3.0, 0.0, 1.0, 1.0), 9.0);
  EXPECT_EQ(Phi(3.0, 1.0, 0.5, 2.0), 3.0);
  EXPECT_EQ(Phi(2.0, 0.5, 1.0, 1.0), 3.0);
  EXPECT_THROW(Phi(1.0, 1.5, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Phi(1.0, 0.5, 1.5, 1.0), std::invalid_argument);
  EXPECT_THROW(Phi(-1.0, 0.5, 1.0, 1.0), std::invalid_argument);
}

TEST(PhiMuTest, Examples) {
  EXPECT_EQ(PhiMu(0.0, 0.3, 1.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(PhiMu(2.0, 0.0, 1.0, 1.0, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(PhiMu(2.0, 1.0, 1.0, 1.0, 2.0), std::sqrt(8.0));
}

// On a quadratic |grad f|^2 >= 2 mu (f - f*), so Phi_mu <= Phi.
TEST(PhiMuTest, BelowPhiOnQuadratic) {
  const ObjectiveSpec p = MakeQuadratic(10, 0.1, 1.0, 0);
  for (int k = 0; k < 200; ++k) {
    RandomStream s = CounterRng(6).Stream(StreamPurpose::kFixture, k);
    Vector x(10);
    for (int i = 0; i < 10; ++i) x(i) = 3.0 * s.StandardNormal();
    const double eta = s.Uniform(0.0, 1.0);
    const double q = std::pow(10.0, s.Uniform(-2, 2));
    EXPECT_LE(PhiMu(EvalF(p, x), eta, 1.0, q, 0.1),
              Phi(EvalGrad(p, x).norm(), eta, 1.0, q) + 1e-9);
  }
}

TEST(EnergyTest, Examples) {
  const ObjectiveSpec p = MakeDiagonalQuadratic(Vec({1.0}));
  MomentumState at_min =
      MomentumState::Start(Vec({0.0}), 0.9, MomentumKind::kHeavyBall);
  EXPECT_EQ(Energy(p, at_min, 1.0), 0.0);

  MomentumState still =
      MomentumState::Start(Vec({3.0}), 0.0, MomentumKind::kHeavyBall);
  EXPECT_EQ(Energy(p, still, 0.7), 4.5);

  MomentumState s =
      MomentumState::Start(Vec({2.0}), 0.5, MomentumKind::kHeavyBall);
  s.x_prev = Vec({0.0});
  EXPECT_EQ(Energy(p, s, 1.0), 12.0);

  s.beta = 1.0;
  EXPECT_THROW(Energy(p, s, 1.0), std::invalid_argument);
}

TEST(EnergyTest, NonNegative) {
  const ObjectiveSpec p = MakeBoundedCell(4);
  for (int k = 0; k < 100; ++k) {
    RandomStream s = CounterRng(7).Stream(StreamPurpose::kFixture, k);
    MomentumState m =
        MomentumState::Start(Vector::Zero(4), 0.9, MomentumKind::kHeavyBall);
    for (int i = 0; i < 4; ++i) {
      m.x(i) = s.StandardNormal();
      m.x_prev(i) = s.StandardNormal();
    }
    EXPECT_GE(Energy(p, m, DefaultEnergyConstant(0.9).c), 0.0);
  }
}

TEST(EnergyConstantTest, ClosedForms) {
  const EnergyConstants zero = DefaultEnergyConstant(0.0);
  EXPECT_EQ(zero.c, 1.0);
  EXPECT_EQ(zero.c1, 0.5);
  const EnergyConstants half = DefaultEnergyConstant(0.5);
  EXPECT_DOUBLE_EQ(half.c, 2.0 / 3.0);
  EXPECT_EQ(half.c1, 0.375);
  EXPECT_THROW(DefaultEnergyConstant(1.0), std::invalid_argument);
}

// c = c2 (1 - beta) / 2 + c beta^2 + c c1 for every beta.
TEST(EnergyConstantTest, BalanceEquation) {
  for (int i = 0; i < 100; ++i) {
    const double beta = 0.99 * i / 99.0;
    const EnergyConstants k = DefaultEnergyConstant(beta);
    const double rhs =
        k.c2 * (1.0 - beta) / 2.0 + k.c * beta * beta + k.c * k.c1;
    EXPECT_LE(std::abs(rhs - k.c), 1e-12) << "beta " << beta;
  }
}

std::vector<TraceRecord> SyntheticTrace(std::int64_t T,
                                        double (*alpha)(std::int64_t),
                                        double (*phi)(std::int64_t)) {
  std::vector<TraceRecord> trace(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) {
    TraceRecord& r = trace[static_cast<std::size_t>(t - 1)];
    r.t = t;
    r.alpha_t = alpha(t);
    r.phi_hat = phi(t);
  }
  RecomputeCumulativeColumns(trace);
  return trace;
}

double PolyAlpha(std::int64_t t) {
  return std::pow(static_cast<double>(t), -0.75);
}

TEST(RateReportTest, ConstantPhiIsFlaggedNonDecreasing) {
  const auto trace =
      SyntheticTrace(10000, PolyAlpha, [](std::int64_t) { return 1.0; });
  for (const TraceRecord& r : trace) EXPECT_EQ(r.rate_product, r.sum_alpha);
  const RateSummary s = RateReport(trace);
  EXPECT_FALSE(s.rate_product_decreasing);
  ASSERT_EQ(s.checkpoints.size(), 3u);
  EXPECT_EQ(s.checkpoints[0].t, 100);
  EXPECT_EQ(s.checkpoints[2].t, 10000);
}

TEST(RateReportTest, SummableSeriesPlateaus) {
  const auto trace = SyntheticTrace(100000, PolyAlpha, PolyAlpha);
  const RateSummary s = RateReport(trace);
  EXPECT_TRUE(s.series_increments_shrinking);
  // Direct summation of t^-1.5: the increment over the last decade is a
  // small fraction of the total.
  const double total = s.checkpoints.back().series_sum;
  const double before = s.checkpoints[s.checkpoints.size() - 2].series_sum;
  EXPECT_LT((total - before) / total, 0.01);
}

TEST(RateReportTest, AllZeroPhi) {
  const auto trace =
      SyntheticTrace(1000, PolyAlpha, [](std::int64_t) { return 0.0; });
  for (const TraceRecord& r : trace) EXPECT_EQ(r.rate_product, 0.0);
  EXPECT_TRUE(RateReport(trace).rate_product_decreasing);
}

TEST(RateReportTest, PartialLastDecadeGetsItsOwnRow) {
  const auto trace = SyntheticTrace(2500, PolyAlpha, PolyAlpha);
  const RateSummary s = RateReport(trace);
  ASSERT_EQ(s.checkpoints.size(), 3u);
  EXPECT_EQ(s.checkpoints.back().t, 2500);
}

TEST(CumulativeColumnsTest, Definitions) {
  std::vector<TraceRecord> trace(4);
  const double alphas[] = {0.5, 0.25, 0.125, 0.0625};
  const double phis[] = {3.0, 1.0, 2.0, 0.5};
  for (int i = 0; i < 4; ++i) {
    trace[i].t = i + 1;
    trace[i].alpha_t = alphas[i];
    trace[i].phi_hat = phis[i];
  }
  RecomputeCumulativeColumns(trace);
  EXPECT_EQ(trace[0].sum_alpha, 0.0);
  EXPECT_EQ(trace[0].rate_product, 0.0);
  EXPECT_EQ(trace[2].best_phi, 1.0);
  EXPECT_EQ(trace[2].sum_alpha, 0.75);
  EXPECT_EQ(trace[3].best_phi, 0.5);
  EXPECT_EQ(trace[3].rate_product, 0.5 * 0.875);
  const std::vector<double> sums = SeriesPartialSums(trace);
  EXPECT_EQ(sums[1], 1.5 + 0.25);
}

// Streaming fill and batch recompute agree bit for bit.
TEST(CumulativeColumnsTest, RecomputeMatchesStreaming) {
  std::vector<TraceRecord> streamed(1000);
  CumulativeColumns columns;
  for (std::int64_t t = 1; t <= 1000; ++t) {
    TraceRecord& r = streamed[static_cast<std::size_t>(t - 1)];
    r.t = t;
    r.alpha_t = 0.1 * PolyAlpha(t);
    r.phi_hat = 1.0 / (1.0 + std::sin(static_cast<double>(t)) + 1.5);
    columns.Fill(r);
  }
  std::vector<TraceRecord> batch = streamed;
  for (TraceRecord& r : batch) r.best_phi = r.sum_alpha = r.rate_product = -1;
  RecomputeCumulativeColumns(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ASSERT_EQ(batch[i].best_phi, streamed[i].best_phi);
    ASSERT_EQ(batch[i].sum_alpha, streamed[i].sum_alpha);
    ASSERT_EQ(batch[i].rate_product, streamed[i].rate_product);
  }
}

}  // namespace
}  // namespace dpdescent
