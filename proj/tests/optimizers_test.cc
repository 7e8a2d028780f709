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

#include "dpdescent/optimizers.h"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpdescent/verification.h"

namespace dpdescent {
namespace {

Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

PrivacyParams NoPrivacy() {
  return PrivacyParams::Create(1.0, 1e-5, 1e9, 0.0, /*unsafe=*/true);
}

ObjectiveSpec DefaultQuadratic() { return MakeQuadratic(10, 0.1, 1.0, 0); }

Vector StartPoint(int d) {
  Vector x(d);
  RandomStream s = CounterRng(99).Stream(StreamPurpose::kInitialization, 0);
  for (int i = 0; i < d; ++i) x(i) = 2.0 * s.StandardNormal();
  return x;
}

TEST(StepScheduleTest, Examples) {
  const StepSchedule unit = StepSchedule::PolynomialDecay(1.0, 0.25);
  EXPECT_EQ(unit(1), 1.0);
  EXPECT_EQ(unit(16), 0.125);
  EXPECT_DOUBLE_EQ(StepSchedule::PolynomialDecay(0.1, 0.25)(16), 0.0125);
}

TEST(StepScheduleTest, TableRepeatsLastEntry) {
  const StepSchedule table = StepSchedule::Table({0.5, 0.25});
  EXPECT_EQ(table(1), 0.5);
  EXPECT_EQ(table(2), 0.25);
  EXPECT_EQ(table(1000), 0.25);
  EXPECT_EQ(StepSchedule::Constant(0.1)(12345), 0.1);
}

TEST(StepScheduleTest, Errors) {
  EXPECT_THROW(StepSchedule::PolynomialDecay(0.0, 0.25), std::invalid_argument);
  EXPECT_THROW(StepSchedule::PolynomialDecay(0.1, 0.5), std::invalid_argument);
  EXPECT_THROW(StepSchedule::PolynomialDecay(0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(StepSchedule::Table({}), std::invalid_argument);
  EXPECT_THROW(StepSchedule::Table({0.1, -0.1}), std::invalid_argument);
  EXPECT_THROW(StepSchedule::Constant(0.1)(0), std::invalid_argument);
}

// Sum alpha_t diverges while sum alpha_t^2 settles.
TEST(StepScheduleTest, SquareSummableNotSummable) {
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  double sum = 0.0;
  double sum_sq = 0.0;
  double sum_at_1e4 = 0.0;
  double sq_at_1e4 = 0.0;
  for (std::int64_t t = 1; t <= 1000000; ++t) {
    const double a = s(t);
    sum += a;
    sum_sq += a * a;
    if (t == 10000) {
      sum_at_1e4 = sum;
      sq_at_1e4 = sum_sq;
    }
  }
  // Integral bounds for the decreasing terms 0.1 t^-0.75 and 0.01 t^-1.5
  // over (1e4, 1e6].
  EXPECT_GE(sum - sum_at_1e4,
            0.4 * (std::pow(1e6 + 1.0, 0.25) - std::pow(1e4 + 1.0, 0.25)));
  EXPECT_LE(sum_sq - sq_at_1e4,
            0.02 * (std::pow(1e4, -0.5) - std::pow(1e6, -0.5)));
  EXPECT_GT(sum - sum_at_1e4, 100.0 * (sum_sq - sq_at_1e4));
}

TEST(DpSgdTest, PlainGradientStepExample) {
  const ObjectiveSpec p =
      MakeDiagonalQuadratic(Vec({1.0}), NoiseModel::MultiplicativeBounded(0.0));
  const SgdState next = DpSgdStep({Vec({1.0}), 1}, p, NoPrivacy(),
                                  StepSchedule::Constant(0.5), CounterRng(0));
  EXPECT_EQ(next.x, Vec({0.5}));
  EXPECT_EQ(next.t, 2);
}

TEST(DpSgdTest, ReturnsPrivateGradient) {
  const ObjectiveSpec p = DefaultQuadratic();
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  const CounterRng rng(4);
  const SgdState state{StartPoint(10), 7};
  Vector g;
  const SgdState next = DpSgdStep(state, p, params, s, rng, &g);
  EXPECT_EQ(g, PrivateGradientAt(p, params, rng, 7, state.x));
  EXPECT_EQ(next.x, state.x - s(7) * g);
}

TEST(DpSgdTest, MatchesPlainSgdOracleWithoutPrivacy) {
  const ObjectiveSpec p = DefaultQuadratic();
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  const Vector x0 = StartPoint(10);
  const std::vector<Vector> oracle = OraclePlainSgd(p, s, x0, 100, 31);
  ASSERT_EQ(oracle.size(), 101u);
  EXPECT_EQ(oracle[0], x0);
  SgdState state{x0, 1};
  const CounterRng rng(31);
  for (int k = 0; k < 100; ++k) {
    state = DpSgdStep(state, p, NoPrivacy(), s, rng);
    ASSERT_EQ(state.x, oracle[static_cast<std::size_t>(k) + 1]) << "step " << k;
  }
}

TEST(DpShbTest, UpdateExample) {
  // g(x) = x at x = [2], alpha = 0.5: alpha g = [1].
  const ObjectiveSpec p =
      MakeDiagonalQuadratic(Vec({1.0}), NoiseModel::MultiplicativeBounded(0.0));
  MomentumState s =
      MomentumState::Start(Vec({2.0}), 0.5, MomentumKind::kHeavyBall);
  s.x_prev = Vec({0.0});
  const MomentumState next =
      DpShbStep(s, p, NoPrivacy(), StepSchedule::Constant(0.5), CounterRng(0));
  EXPECT_EQ(next.x, Vec({2.0}));
  EXPECT_EQ(next.x_prev, Vec({2.0}));
}

// beta = 0 turns both momentum methods into DP-SGD, bit for bit.
TEST(MomentumTest, ZeroBetaReducesToSgd) {
  const ObjectiveSpec p = DefaultQuadratic();
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  const CounterRng rng(12);
  const Vector x0 = StartPoint(10);
  SgdState sgd{x0, 1};
  MomentumState shb = MomentumState::Start(x0, 0.0, MomentumKind::kHeavyBall);
  MomentumState nag = MomentumState::Start(x0, 0.0, MomentumKind::kNesterov);
  for (int k = 0; k < 1000; ++k) {
    sgd = DpSgdStep(sgd, p, params, s, rng);
    shb = DpShbStep(shb, p, params, s, rng);
    nag = DpNagStep(nag, p, params, s, rng);
    ASSERT_EQ(shb.x, sgd.x) << "step " << k;
    ASSERT_EQ(nag.x, sgd.x) << "step " << k;
  }
}

TEST(DpShbTest, ReparameterizedUpdate) {
  const ObjectiveSpec p = DefaultQuadratic();
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  const double beta = 0.9;
  const CounterRng rng(3);
  MomentumState state =
      MomentumState::Start(StartPoint(10), beta, MomentumKind::kHeavyBall);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double alpha = s(state.t);
    Vector g;
    const MomentumState next = DpShbStep(state, p, params, s, rng, &g);
    // Oracle from the update algebra, not from Reparameterized().
    const Vector z0 = state.x + beta / (1.0 - beta) * (state.x - state.x_prev);
    const Vector z1 = next.x + beta / (1.0 - beta) * (next.x - next.x_prev);
    const Vector expected = -alpha / (1.0 - beta) * g;
    worst = std::max(worst, ((z1 - z0) - expected).norm() / expected.norm());
    ASSERT_EQ(next.Reparameterized(), z1);
    state = next;
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(DpNagTest, LookAheadWithZeroVelocity) {
  for (const double beta : {0.0, 0.5, 0.9}) {
    MomentumState s =
        MomentumState::Start(Vec({1.0}), beta, MomentumKind::kNesterov);
    EXPECT_EQ(s.LookAhead(), Vec({1.0}));
  }
}

// The look-ahead form gives v_{t+1} = beta v_t - alpha g. The factored form
// beta (v_t - alpha g) differs from it by (1 - beta) alpha g.
TEST(DpNagTest, VelocityRecursion) {
  const ObjectiveSpec p = DefaultQuadratic();
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  const double beta = 0.9;
  const CounterRng rng(5);
  MomentumState state =
      MomentumState::Start(StartPoint(10), beta, MomentumKind::kNesterov);
  double worst = 0.0;
  double factored_gap = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double alpha = s(state.t);
    Vector g;
    const MomentumState next = DpNagStep(state, p, params, s, rng,
                                         NesterovGradientPoint::kLookAhead, &g);
    const Vector v = state.Velocity();
    const Vector v_next = next.Velocity();
    worst = std::max(
        worst, (v_next - (beta * v - alpha * g)).norm() / (1.0 + v.norm()));
    const double gap = (v_next - beta * (v - alpha * g)).norm();
    factored_gap =
        std::max(factored_gap,
                 std::abs(gap - (1.0 - beta) * alpha * g.norm()) / (1.0 + gap));
    EXPECT_EQ(g, PrivateGradientAt(p, params, rng, state.t, state.LookAhead()));
    state = next;
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_LE(factored_gap, 1e-12);
}

TEST(DpNagTest, CurrentIterateOptionCoincidesWithHeavyBall) {
  const ObjectiveSpec p = DefaultQuadratic();
  const PrivacyParams params = PrivacyParams::Calibrated(1.0, 1e-5, 1.0);
  const StepSchedule s = StepSchedule::PolynomialDecay(0.1, 0.25);
  const CounterRng rng(8);
  const Vector x0 = StartPoint(10);
  MomentumState shb = MomentumState::Start(x0, 0.9, MomentumKind::kHeavyBall);
  MomentumState nag = MomentumState::Start(x0, 0.9, MomentumKind::kNesterov);
  for (int k = 0; k < 200; ++k) {
    shb = DpShbStep(shb, p, params, s, rng);
    nag = DpNagStep(nag, p, params, s, rng,
                    NesterovGradientPoint::kCurrentIterate);
    // Same update, summed in a different order.
    ASSERT_LE((nag.x - shb.x).norm(), 1e-12 * (1.0 + shb.x.norm()))
        << "step " << k;
  }
}

TEST(MomentumTest, Errors) {
  EXPECT_THROW(MomentumState::Start(Vec({1.0}), 1.0, MomentumKind::kHeavyBall),
               std::invalid_argument);
  EXPECT_THROW(MomentumState::Start(Vec({1.0}), -0.1, MomentumKind::kHeavyBall),
               std::invalid_argument);
  const ObjectiveSpec p = DefaultQuadratic();
  const MomentumState nag =
      MomentumState::Start(StartPoint(10), 0.5, MomentumKind::kNesterov);
  EXPECT_THROW(DpShbStep(nag, p, NoPrivacy(), StepSchedule::Constant(0.1),
                         CounterRng(0)),
               std::invalid_argument);
  const MomentumState wrong_dim =
      MomentumState::Start(Vec({1.0}), 0.5, MomentumKind::kHeavyBall);
  EXPECT_THROW(DpShbStep(wrong_dim, p, NoPrivacy(), StepSchedule::Constant(0.1),
                         CounterRng(0)),
               std::invalid_argument);
}

}  // namespace
}  // namespace dpdescent
