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

// Step-size schedules and single-step updates for DP-SGD, DP-SHB (heavy
// ball) and DP-NAG (Nesterov).
//
// Randomness contract: the step taken at iteration t draws its stochastic
// gradient from rng.Stream(kSampling, t) and its privacy noise from
// rng.Stream(kPrivacyNoise, t). All three methods share this contract, so at
// beta = 0 they produce identical iterates.

#ifndef DPDESCENT_OPTIMIZERS_H_
#define DPDESCENT_OPTIMIZERS_H_

#include <cstdint>
#include <vector>

#include "dpdescent/privacy.h"
#include "dpdescent/problems.h"
#include "dpdescent/random.h"

namespace dpdescent {

class StepSchedule {
 public:
  enum class Mode {
    // alpha_t = a * t^-(1 - theta), theta in (0, 1/2).
    kPolynomialDecay,
    // User table alpha_1, ..., alpha_n; alpha_t = alpha_n for t > n.
    // Square-summability is the caller's responsibility.
    kTable,
  };

  static StepSchedule PolynomialDecay(double a, double theta);
  static StepSchedule Table(std::vector<double> steps);
  static StepSchedule Constant(double a) { return Table({a}); }

  // Requires t >= 1.
  double operator()(std::int64_t t) const;

  Mode mode() const { return mode_; }
  double base() const { return base_; }
  double theta() const { return theta_; }
  const std::vector<double>& table() const { return table_; }

 private:
  StepSchedule() = default;

  Mode mode_ = Mode::kPolynomialDecay;
  double base_ = 0.0;
  double theta_ = 0.0;
  std::vector<double> table_;
};

inline double StepSize(const StepSchedule& schedule, std::int64_t t) {
  return schedule(t);
}

struct SgdState {
  Vector x;
  std::int64_t t = 1;
};

enum class MomentumKind { kHeavyBall, kNesterov };

// Where DP-NAG evaluates its private gradient.
enum class NesterovGradientPoint {
  // y_t = x_t + beta (x_t - x_{t-1}); the form used in the last-iterate
  // analysis.
  kLookAhead,
  // x_t itself, as in the displayed two-line recursion. With state
  // (x, x_prev) this coincides with the heavy-ball update.
  kCurrentIterate,
};

struct MomentumState {
  Vector x;
  Vector x_prev;
  double beta = 0.0;
  std::int64_t t = 1;
  MomentumKind kind = MomentumKind::kHeavyBall;

  // x_prev = x0, so the first velocity is zero. Requires beta in [0, 1).
  static MomentumState Start(Vector x0, double beta, MomentumKind kind);

  // v = x - x_prev.
  Vector Velocity() const;
  // z = x + beta / (1 - beta) v.
  Vector Reparameterized() const;
  // y = x + beta v.
  Vector LookAhead() const;
};

// x_{t+1} = x_t - alpha_t g_dp(x_t). If `g_dp` is non-null it receives the
// private gradient used.
SgdState DpSgdStep(const SgdState& state, const ObjectiveSpec& problem,
                   const PrivacyParams& params, const StepSchedule& schedule,
                   const CounterRng& rng, Vector* g_dp = nullptr);

// x_{t+1} = x_t - alpha_t g_dp(x_t) + beta (x_t - x_{t-1}).
MomentumState DpShbStep(const MomentumState& state,
                        const ObjectiveSpec& problem,
                        const PrivacyParams& params,
                        const StepSchedule& schedule, const CounterRng& rng,
                        Vector* g_dp = nullptr);

// y_t = x_t + beta (x_t - x_{t-1}); x_{t+1} = y_t - alpha_t g_dp(p) where p
// is y_t (look-ahead) or x_t (current iterate).
MomentumState DpNagStep(
    const MomentumState& state, const ObjectiveSpec& problem,
    const PrivacyParams& params, const StepSchedule& schedule,
    const CounterRng& rng,
    NesterovGradientPoint point = NesterovGradientPoint::kLookAhead,
    Vector* g_dp = nullptr);

// The private gradient at `x` for iteration t under the randomness contract.
Vector PrivateGradientAt(const ObjectiveSpec& problem,
                         const PrivacyParams& params, const CounterRng& rng,
                         std::int64_t t, const Vector& x);

}  // namespace dpdescent

#endif  // DPDESCENT_OPTIMIZERS_H_
