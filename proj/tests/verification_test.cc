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

#include "dpdescent/verification.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpdescent {
namespace {

// Last-decade shares at T = 1e5 over t in (T/10, T], by direct summation in
// 30-digit arithmetic.
constexpr double kShareInversePowerOneHalf = 0.00524738829164778874;
constexpr double kShareHarmonic = 0.190447664493618119;

Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

MonteCarloOptions Options(std::int64_t n, std::uint64_t seed) {
  MonteCarloOptions o;
  o.samples = n;
  o.seed = seed;
  return o;
}

PrivacyParams Unsafe(double q, double sigma_sq) {
  return PrivacyParams::Create(1.0, 1e-5, q, sigma_sq, /*unsafe=*/true);
}

std::vector<TraceRecord> SeriesTrace(std::int64_t T, double power) {
  std::vector<TraceRecord> trace(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) {
    TraceRecord& r = trace[static_cast<std::size_t>(t - 1)];
    r.t = t;
    r.alpha_t = 1.0;
    r.phi_hat = std::pow(static_cast<double>(t), -power);
  }
  return trace;
}

TEST(OraclePlainSgdTest, GeometricDecay) {
  const ObjectiveSpec p =
      MakeDiagonalQuadratic(Vec({1.0}), NoiseModel::MultiplicativeBounded(0.0));
  const auto xs =
      OraclePlainSgd(p, StepSchedule::Constant(0.5), Vec({8.0}), 3, 0);
  ASSERT_EQ(xs.size(), 4u);
  EXPECT_EQ(xs[0], Vec({8.0}));
  EXPECT_EQ(xs[1], Vec({4.0}));
  EXPECT_EQ(xs[3], Vec({1.0}));
  const auto none =
      OraclePlainSgd(p, StepSchedule::Constant(0.5), Vec({8.0}), 0, 0);
  ASSERT_EQ(none.size(), 1u);
  EXPECT_EQ(none[0], Vec({8.0}));
}

TEST(ClipLawsTest, AllLawsHold) {
  const auto reports = CheckClipLaws(10000, 1);
  ASSERT_EQ(reports.size(), 4u);
  for (const CheckReport& r : reports) {
    EXPECT_TRUE(r.passed) << r.name << " " << r.statistic;
    EXPECT_EQ(r.threshold, kClipLawTolerance);
    EXPECT_EQ(r.n_samples, 10000);
  }
}

TEST(SampleStatesTest, ShapesAndSeeds) {
  const auto a = SampleStates(4, 3, 9);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].size(), 4);
  EXPECT_EQ(a, SampleStates(4, 3, 9));
  EXPECT_NE(a[0], a[1]);
  const auto m =
      SampleMomentumStates(4, 3, 0.9, MomentumKind::kHeavyBall, 0.1, 9);
  EXPECT_EQ(m[0].x, a[0]);
  EXPECT_EQ(m[2].t, 3);
  EXPECT_GT(m[1].Velocity().norm(), 0.0);
  EXPECT_LT(m[1].Velocity().norm(), 1.0);
}

TEST(SecondMomentTest, DeterministicRegime) {
  const ObjectiveSpec p = MakeDiagonalQuadratic(
      Vec({1.0, 1.0}), NoiseModel::MultiplicativeBounded(0.0));
  const CheckReport r =
      CheckSecondMoment(p, Vec({0.3, 0.4}), Unsafe(1.0, 0.0), Options(100, 0));
  EXPECT_EQ(r.statistic, 0.25);
  EXPECT_EQ(r.threshold, 1.0);
  EXPECT_TRUE(r.passed);
}

TEST(SecondMomentTest, CalibratedThreshold) {
  const ObjectiveSpec p = MakeQuadratic(10, 0.1, 1.0, 0);
  // sigma^2 at the calibration threshold itself, so the run is flagged unsafe.
  const PrivacyParams params = PrivacyParams::Create(
      1.0, 1e-5, 1.0, CalibrationThreshold(1.0, 1e-5, 1.0), /*unsafe=*/true);
  // At the minimizer only the privacy noise remains: mean q^2 d sigma^2.
  const CheckReport r =
      CheckSecondMoment(p, Vector::Zero(10), params, Options(100000, 3));
  EXPECT_NEAR(r.threshold, 235.7214, 1e-4);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.threshold - r.statistic, 1.0, 4.0 * r.standard_error);
}

TEST(DescentTest, ExactGradientEquality) {
  const ObjectiveSpec p =
      MakeQuadratic(5, 0.1, 1.0, 0, NoiseModel::MultiplicativeBounded(0.0));
  const Vector x = Vector::LinSpaced(5, 0.1, 0.5);
  const CheckReport r =
      CheckDescentInequality(p, x, Unsafe(1e9, 0.0), Options(100, 0));
  EXPECT_DOUBLE_EQ(r.statistic, -EvalGrad(p, x).squaredNorm());
  EXPECT_DOUBLE_EQ(r.threshold, r.statistic);
  EXPECT_TRUE(r.passed);
}

TEST(DescentTest, AlwaysClippedEquality) {
  const ObjectiveSpec p =
      MakeQuadratic(5, 0.1, 1.0, 0, NoiseModel::MultiplicativeBounded(0.0));
  const Vector x = Vector::Constant(5, 3.0);
  const double G = EvalGrad(p, x).norm();
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const CheckReport r =
      CheckDescentInequality(p, x, params, Options(100000, 4));
  EXPECT_DOUBLE_EQ(r.threshold, -G);
  EXPECT_NEAR(r.statistic, -G, 4.0 * r.standard_error);
  EXPECT_TRUE(r.passed);
}

// In the mixed clipping regime under multiplicative noise,
//   E[-<grad f, g_dp>] + Phi = G^2 E[-b 1{(1 + b) G <= q}],
// b ~ U[-rho, rho], which is (rho^2 - c^2) / (4 rho) G^2 with
// c = clamp(q / G - 1, -rho, rho). It is positive whenever c < rho, so the
// descent inequality fails there whatever the privacy noise.
TEST(DescentTest, MixedRegimeExcessMatchesClosedForm) {
  const double rho = 0.5;
  const ObjectiveSpec p =
      MakeBoundedCell(1, NoiseModel::MultiplicativeBounded(rho));
  for (const double sigma_sq : {0.0, 23.5}) {
    for (const double x : {0.5, 1.0}) {
      const double G = EvalGrad(p, Vec({x})).norm();
      const double q = 0.9 * G;
      const double c = std::clamp(q / G - 1.0, -rho, rho);
      const double excess = (rho * rho - c * c) / (4.0 * rho) * G * G;
      const CheckReport r = CheckDescentInequality(
          p, Vec({x}), Unsafe(q, sigma_sq), Options(100000, 11));
      EXPECT_NEAR(r.statistic - r.threshold, excess, 4.0 * r.standard_error)
          << "x " << x << " sigma^2 " << sigma_sq;
      if (sigma_sq == 0.0) {
        EXPECT_FALSE(r.passed);
      }
    }
  }
}

TEST(DescentTest, RequiresCertifiedNoiseAndNonzeroGradient) {
  const ObjectiveSpec additive =
      MakeBoundedCell(2, NoiseModel::AdditiveGaussian(1.0));
  EXPECT_THROW(CheckDescentInequality(additive, Vec({1.0, 1.0}),
                                      Unsafe(1.0, 0.0), Options(10, 0)),
               std::invalid_argument);
  EXPECT_THROW(CheckDescentInequality(MakeBoundedCell(2), Vector::Zero(2),
                                      Unsafe(1.0, 0.0), Options(10, 0)),
               std::invalid_argument);
}

TEST(SupermartingaleTest, DeterministicDescent) {
  const ObjectiveSpec p =
      MakeQuadratic(10, 0.1, 1.0, 0, NoiseModel::MultiplicativeBounded(0.0));
  const Vector x = SampleStates(10, 1, 2)[0];
  const CheckReport r = CheckSgdSupermartingale(
      p, x, Unsafe(10.0, 0.0), StepSchedule::Constant(0.5), 1, Options(10, 0));
  EXPECT_LT(r.statistic, r.threshold);
  EXPECT_TRUE(r.passed);
}

TEST(SupermartingaleTest, EqualityControlFails) {
  // Isotropic quadratic, q = |grad f|, no noise: the bound is attained.
  const ObjectiveSpec p = MakeDiagonalQuadratic(
      Vector::Ones(4), NoiseModel::MultiplicativeBounded(0.0));
  const Vector x = Vec({1.0, -2.0, 0.5, 1.5});
  const PrivacyParams tight = Unsafe(EvalGrad(p, x).norm(), 0.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  MonteCarloOptions o = Options(100, 0);
  CheckReport exact = CheckSgdSupermartingale(p, x, tight, s, 1, o);
  EXPECT_NEAR(exact.statistic, exact.threshold, 1e-12);
  EXPECT_TRUE(exact.passed);
  o.threshold_shift = -1e-6 * x.squaredNorm();
  o.negative_control = true;
  const CheckReport shifted = CheckSgdSupermartingale(p, x, tight, s, 1, o);
  EXPECT_FALSE(shifted.passed);
  EXPECT_TRUE(shifted.AsExpected());
}

// With beta = 0 the heavy-ball energy residual decomposes into the
// supermartingale gap plus alpha^2 E|g_dp|^2, draw for draw.
TEST(EnergyTest, ZeroBetaMatchesSupermartingale) {
  const ObjectiveSpec p = MakeQuadratic(10, 0.1, 1.0, 0);
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const Vector x = SampleStates(10, 1, 5)[0];
  const double alpha = 0.05;
  const MonteCarloOptions o = Options(20000, 17);
  const MomentumState state =
      MomentumState::Start(x, 0.0, MomentumKind::kHeavyBall);
  const MonteCarloEstimate residual =
      EnergyResidual(p, state, params, alpha, o);
  const CheckReport sm = CheckSgdSupermartingale(
      p, x, params, StepSchedule::Constant(alpha), 1, o);
  const CheckReport m2 = CheckSecondMoment(p, x, params, o);
  const double curvature = 0.5 * p.smoothness() * alpha * alpha * m2.threshold;
  const double expected =
      sm.statistic - sm.threshold + curvature + alpha * alpha * m2.statistic;
  EXPECT_NEAR(residual.value, expected, 1e-9 * (1.0 + std::abs(expected)));
}

TEST(EnergyTest, ResidualShrinksQuadratically) {
  const ObjectiveSpec p = MakeQuadratic(10, 0.1, 1.0, 0);
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const MomentumState state = MomentumState::Start(
      SampleStates(10, 1, 6)[0], 0.9, MomentumKind::kHeavyBall);
  const double alphas[] = {0.1, 0.05, 0.025, 0.0125};
  const SlopeFit fit =
      FitEnergySlope(p, state, alphas, params, Options(20000, 2));
  EXPECT_NEAR(fit.slope, 2.0, 0.2);
  ASSERT_EQ(fit.residuals.size(), 4u);
}

TEST(EnergyTest, CoefficientAndCheck) {
  const ObjectiveSpec p = MakeQuadratic(10, 0.1, 1.0, 0);
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const auto states =
      SampleMomentumStates(10, 3, 0.9, MomentumKind::kHeavyBall, 0.1, 4);
  const double alphas[] = {0.1, 0.05};
  const double C =
      FitEnergyCoefficient(p, states, alphas, params, Options(5000, 1));
  EXPECT_GT(C, 0.0);
  const CheckReport r = CheckShbEnergyDecrease(
      p, states[0], params, StepSchedule::PolynomialDecay(0.1, 0.25), C,
      Options(5000, 7));
  EXPECT_EQ(r.threshold, C * 0.1 * 0.1);
  EXPECT_TRUE(r.passed);
  EXPECT_THROW(
      CheckShbEnergyDecrease(p, states[0], params, StepSchedule::Constant(0.1),
                             -1.0, Options(10, 0)),
      std::invalid_argument);
}

TEST(ReportTest, SameSeedSameReport) {
  const ObjectiveSpec p = MakeBoundedCell(10);
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const Vector x = SampleStates(10, 1, 1)[0];
  const CheckReport a = CheckDescentInequality(p, x, params, Options(2000, 5));
  const CheckReport b = CheckDescentInequality(p, x, params, Options(2000, 5));
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.threshold, b.threshold);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(OneSidedPassTest, Margins) {
  EXPECT_TRUE(OneSidedPass(1.0, 1.0, 0.0));
  EXPECT_TRUE(OneSidedPass(1.4, 1.0, 0.1));
  EXPECT_FALSE(OneSidedPass(1.41, 1.0, 0.1));
  EXPECT_TRUE(OneSidedPass(1.0 + 5e-13, 1.0, 0.0));
  EXPECT_FALSE(OneSidedPass(1.0 + 1e-11, 1.0, 0.0));
}

TEST(SeriesTest, LastDecadeShares) {
  std::vector<double> terms(100000);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = std::pow(static_cast<double>(i + 1), -1.5);
  }
  EXPECT_NEAR(LastDecadeShare(terms), kShareInversePowerOneHalf, 1e-12);
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = 1.0 / (i + 1.0);
  EXPECT_NEAR(LastDecadeShare(terms), kShareHarmonic, 1e-12);
  EXPECT_EQ(LastDecadeShare(std::vector<double>(50, 0.0)), 0.0);
}

TEST(SeriesTest, ConvergentPassesDivergentFails) {
  const CheckReport conv =
      CheckSeriesConvergence(SeriesTrace(100000, 1.5), 1.0);
  EXPECT_TRUE(conv.passed);
  EXPECT_NEAR(conv.statistic, kShareInversePowerOneHalf, 1e-12);
  const auto harmonic = SeriesTrace(100000, 1.0);
  EXPECT_TRUE(CheckSeriesConvergence(harmonic, 1.0).passed);
  const CheckReport tight = CheckSeriesConvergence(harmonic, 1.0, 0.15);
  EXPECT_FALSE(tight.passed);
  EXPECT_NEAR(tight.statistic, kShareHarmonic, 1e-12);
}

TEST(SeriesTest, ZeroSeriesAndShortTraces) {
  auto zero = SeriesTrace(10000, 1.0);
  for (TraceRecord& r : zero) r.phi_hat = 0.0;
  const CheckReport r = CheckSeriesConvergence(zero, 1.0);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_TRUE(r.passed);
  EXPECT_THROW(CheckSeriesConvergence(SeriesTrace(100, 1.5), 1.0),
               std::invalid_argument);
}

TEST(SeriesTest, MomentumTraceUsesTheLargerShare) {
  auto trace = SeriesTrace(10000, 1.5);
  for (TraceRecord& r : trace) {
    r.momentum_grad_norm = 1.0 / std::sqrt(static_cast<double>(r.t));
  }
  // min(m^2, m) = 1 / t: harmonic.
  std::vector<double> harmonic(10000);
  for (std::size_t i = 0; i < harmonic.size(); ++i)
    harmonic[i] = 1.0 / (i + 1.0);
  const CheckReport r = CheckSeriesConvergence(trace, 1.0);
  EXPECT_NEAR(r.statistic, LastDecadeShare(harmonic), 1e-12);
  trace[5000].momentum_grad_norm = std::nan("");
  EXPECT_FALSE(CheckSeriesConvergence(trace, 1.0).passed);
}

TEST(LastIterateTest, TailMean) {
  auto trace = SeriesTrace(1000, 1.0);
  for (TraceRecord& r : trace) r.grad_norm = static_cast<double>(r.t);
  EXPECT_EQ(TailMeanGradNorm(trace, 1000), 995.5);
  EXPECT_EQ(TailMeanGradNorm(trace, 50), 50.0);
  EXPECT_THROW(TailMeanGradNorm(trace, 1001), std::invalid_argument);
}

TEST(LastIterateTest, Preconditions) {
  std::vector<std::vector<TraceRecord>> traces(20, SeriesTrace(10000, 1.0));
  EXPECT_THROW(CheckLastIterate(traces, Algorithm::kDpSgd, 1.0),
               std::invalid_argument);
  EXPECT_THROW(CheckLastIterate(traces, Algorithm::kDpShb, 0.5),
               std::invalid_argument);
  std::vector<std::vector<TraceRecord>> few(19, SeriesTrace(10000, 1.0));
  EXPECT_THROW(CheckLastIterate(few, Algorithm::kDpShb, 1.0),
               std::invalid_argument);
  std::vector<std::vector<TraceRecord>> short_traces(20, SeriesTrace(999, 1.0));
  EXPECT_THROW(CheckLastIterate(short_traces, Algorithm::kDpShb, 1.0),
               std::invalid_argument);
}

TEST(LastIterateTest, NoiselessQuadraticPasses) {
  const ObjectiveSpec p =
      MakeQuadratic(10, 0.1, 1.0, 0, NoiseModel::MultiplicativeBounded(0.0));
  const PrivacyParams off = Unsafe(1.0, 0.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  std::vector<std::vector<TraceRecord>> traces;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TrajectoryConfig c;
    c.algorithm = Algorithm::kDpShb;
    c.beta = 0.9;
    c.horizon = 10000;
    c.seed = seed;
    c.diagnostics.every = 10000;
    c.diagnostics.eta_samples = 1;
    traces.push_back(
        RunTrajectory(p, off, s, SeededGaussianPoint(10, 5.0, CounterRng(seed)),
                      c)
            .trace);
  }
  const CheckReport r = CheckLastIterate(traces, Algorithm::kDpShb, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.statistic, 1.0);
}

}  // namespace
}  // namespace dpdescent
