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

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dpdescent {
namespace {

void CheckBeta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
  }
}

void CheckMomentumState(const MomentumState& state,
                        const ObjectiveSpec& problem, MomentumKind kind) {
  if (state.kind != kind) {
    throw std::invalid_argument("momentum state has the wrong kind");
  }
  CheckBeta(state.beta);
  if (state.x.size() != problem.dim() || state.x_prev.size() != problem.dim()) {
    throw std::invalid_argument("momentum state has the wrong dimension");
  }
  if (state.t < 1) throw std::invalid_argument("step counter must be >= 1");
}

}  // namespace

StepSchedule StepSchedule::PolynomialDecay(double a, double theta) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("step schedule: a must be positive");
  }
  if (!(theta > 0.0 && theta < 0.5)) {
    throw std::invalid_argument("step schedule: theta must lie in (0, 1/2)");
  }
  StepSchedule s;
  s.mode_ = Mode::kPolynomialDecay;
  s.base_ = a;
  s.theta_ = theta;
  return s;
}

StepSchedule StepSchedule::Table(std::vector<double> steps) {
  if (steps.empty()) throw std::invalid_argument("step table is empty");
  for (const double a : steps) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("step table entries must be positive");
    }
  }
  StepSchedule s;
  s.mode_ = Mode::kTable;
  s.table_ = std::move(steps);
  return s;
}

double StepSchedule::operator()(std::int64_t t) const {
  if (t < 1) throw std::invalid_argument("step index t must be >= 1");
  if (mode_ == Mode::kPolynomialDecay) {
    return base_ * std::pow(static_cast<double>(t), -(1.0 - theta_));
  }
  const auto i = static_cast<std::size_t>(t - 1);
  return i < table_.size() ? table_[i] : table_.back();
}

MomentumState MomentumState::Start(Vector x0, double beta, MomentumKind kind) {
  CheckBeta(beta);
  MomentumState s;
  s.x_prev = x0;
  s.x = std::move(x0);
  s.beta = beta;
  s.t = 1;
  s.kind = kind;
  return s;
}

Vector MomentumState::Velocity() const { return x - x_prev; }

Vector MomentumState::Reparameterized() const {
  return x + (beta / (1.0 - beta)) * Velocity();
}

Vector MomentumState::LookAhead() const { return x + beta * Velocity(); }

Vector PrivateGradientAt(const ObjectiveSpec& problem,
                         const PrivacyParams& params, const CounterRng& rng,
                         std::int64_t t, const Vector& x) {
  const auto index = static_cast<std::uint64_t>(t);
  RandomStream sampling = rng.Stream(StreamPurpose::kSampling, index);
  RandomStream noise = rng.Stream(StreamPurpose::kPrivacyNoise, index);
  const StochasticGradientSample sample =
      SampleStochasticGrad(problem, x, sampling);
  return PrivatizeGradient(sample.g, params, noise);
}

SgdState DpSgdStep(const SgdState& state, const ObjectiveSpec& problem,
                   const PrivacyParams& params, const StepSchedule& schedule,
                   const CounterRng& rng, Vector* g_dp) {
  if (state.x.size() != problem.dim()) {
    throw std::invalid_argument("SGD state has the wrong dimension");
  }
  const double alpha = schedule(state.t);
  Vector g = PrivateGradientAt(problem, params, rng, state.t, state.x);
  SgdState next{state.x - alpha * g, state.t + 1};
  if (g_dp != nullptr) *g_dp = std::move(g);
  return next;
}

MomentumState DpShbStep(const MomentumState& state,
                        const ObjectiveSpec& problem,
                        const PrivacyParams& params,
                        const StepSchedule& schedule, const CounterRng& rng,
                        Vector* g_dp) {
  CheckMomentumState(state, problem, MomentumKind::kHeavyBall);
  const double alpha = schedule(state.t);
  Vector g = PrivateGradientAt(problem, params, rng, state.t, state.x);
  MomentumState next;
  next.x = state.x - alpha * g + state.beta * (state.x - state.x_prev);
  next.x_prev = state.x;
  next.beta = state.beta;
  next.t = state.t + 1;
  next.kind = MomentumKind::kHeavyBall;
  if (g_dp != nullptr) *g_dp = std::move(g);
  return next;
}

MomentumState DpNagStep(const MomentumState& state,
                        const ObjectiveSpec& problem,
                        const PrivacyParams& params,
                        const StepSchedule& schedule, const CounterRng& rng,
                        NesterovGradientPoint point, Vector* g_dp) {
  CheckMomentumState(state, problem, MomentumKind::kNesterov);
  const double alpha = schedule(state.t);
  const Vector y = state.LookAhead();
  const Vector& at = point == NesterovGradientPoint::kLookAhead ? y : state.x;
  Vector g = PrivateGradientAt(problem, params, rng, state.t, at);
  MomentumState next;
  next.x = y - alpha * g;
  next.x_prev = state.x;
  next.beta = state.beta;
  next.t = state.t + 1;
  next.kind = MomentumKind::kNesterov;
  if (g_dp != nullptr) *g_dp = std::move(g);
  return next;
}

}  // namespace dpdescent
