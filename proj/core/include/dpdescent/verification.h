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

// Statistical checks of the one-step inequalities and pathwise convergence
// proxies.
//
// Monte Carlo checks simulate n independent one-step transitions from a
// fixed state. Draw i uses CounterRng(seed, i) and runs the library's own
// step code, so the checks exercise exactly what a trajectory executes.
// A one-sided check passes when
//
//   statistic <= threshold + 4 SE + 1e-12 max(1, |threshold|)
//
// where SE is the standard error of the per-draw difference between the two
// sides. The last term only absorbs rounding in equality cases.

#ifndef DPDESCENT_VERIFICATION_H_
#define DPDESCENT_VERIFICATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpdescent/diagnostics.h"
#include "dpdescent/optimizers.h"
#include "dpdescent/privacy.h"
#include "dpdescent/problems.h"
#include "dpdescent/trajectory.h"

namespace dpdescent {

inline constexpr double kStandardErrorMargin = 4.0;
inline constexpr double kRoundingSlack = 1e-12;

struct CheckReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  double standard_error = 0.0;  // 0 for deterministic checks
  bool passed = false;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool one_sided = true;
  // Negative controls are expected to fail.
  bool negative_control = false;

  bool AsExpected() const { return passed != negative_control; }
};

// Pass rule for one-sided statistical checks.
bool OneSidedPass(double statistic, double threshold, double standard_error);

struct MonteCarloOptions {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  // Added to the threshold. Negative controls tighten a check that holds
  // with equality by a small negative shift.
  double threshold_shift = 0.0;
  bool negative_control = false;
};

// Plain SGD x_{t+1} = x_t - alpha_t g_t with no clipping and no noise.
// Returns x_1 .. x_{T+1}. Draws g_t from CounterRng(seed).Stream(kSampling, t)
// like the private optimizers, but shares none of their step code.
std::vector<Vector> OraclePlainSgd(const ObjectiveSpec& problem,
                                   const StepSchedule& schedule,
                                   const Vector& x0, std::int64_t T,
                                   std::uint64_t seed);

// Clip laws over n seeded (v, w, q) triples with random dimension and
// scales spanning six decades. One deterministic report per law, each with
// the worst relative violation as statistic and 1e-12 as threshold:
//   clip_norm            | |clip(v)| - min(|v|, q) |
//   clip_idempotence     | clip(clip(v)) - clip(v) |
//   clip_parallelism     component of clip(v) orthogonal to v, or a sign flip
//   clip_nonexpansive    |clip(v) - clip(w)| - |v - w|
std::vector<CheckReport> CheckClipLaws(std::int64_t n, std::uint64_t seed);

inline constexpr double kClipLawTolerance = 1e-12;

// Seeded test states x_k ~ N(0, I), k = 0 .. count - 1.
std::vector<Vector> SampleStates(int d, int count, std::uint64_t seed);

// Momentum states with x ~ N(0, I) and x_prev = x + velocity_scale N(0, I).
// State k starts at step t = k + 1.
std::vector<MomentumState> SampleMomentumStates(int d, int count, double beta,
                                                MomentumKind kind,
                                                double velocity_scale,
                                                std::uint64_t seed);

// Mean of |g_dp|^2 at x against q^2 (1 + d sigma^2).
CheckReport CheckSecondMoment(const ObjectiveSpec& problem, const Vector& x,
                              const PrivacyParams& params,
                              const MonteCarloOptions& options);

// Mean of -<grad f(x), g_dp> against -Phi(|grad f(x)|, eta_hat, D, q), with
// eta_hat taken from the same draws. Requires a certified D and
// grad f(x) != 0.
CheckReport CheckDescentInequality(const ObjectiveSpec& problem,
                                   const Vector& x, const PrivacyParams& params,
                                   const MonteCarloOptions& options);

// Mean of f(x_{t+1}) - f* over one DP-SGD step from x at step t, against
//   f(x) - f* - alpha_t Phi + (L alpha_t^2 / 2) q^2 (1 + d sigma^2).
CheckReport CheckSgdSupermartingale(const ObjectiveSpec& problem,
                                    const Vector& x,
                                    const PrivacyParams& params,
                                    const StepSchedule& schedule,
                                    std::int64_t t,
                                    const MonteCarloOptions& options);

// One-step energy residual for DP-SHB from `state` with step size alpha:
//   Y_{t+1} - Y_t + alpha / (1 - beta) Phi(|grad f(x_t)|, eta_hat, D, q),
// where Y uses c = DefaultEnergyConstant(beta).c.
MonteCarloEstimate EnergyResidual(const ObjectiveSpec& problem,
                                  const MomentumState& state,
                                  const PrivacyParams& params, double alpha,
                                  const MonteCarloOptions& options);

// C = 2 max_k residual_k / alpha_k^2 over every (state, alpha) pair. The
// factor 2 leaves headroom for states outside the pilot grid. Returns 0 when
// no residual is positive.
double FitEnergyCoefficient(const ObjectiveSpec& problem,
                            std::span<const MomentumState> states,
                            std::span<const double> alphas,
                            const PrivacyParams& params,
                            const MonteCarloOptions& options);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> alphas;
  std::vector<double> residuals;
};

// Least-squares slope of log|residual| against log alpha at one state.
// Draws are shared across alphas (common random numbers).
SlopeFit FitEnergySlope(const ObjectiveSpec& problem,
                        const MomentumState& state,
                        std::span<const double> alphas,
                        const PrivacyParams& params,
                        const MonteCarloOptions& options);

// Energy residual at state.t against C alpha_t^2.
CheckReport CheckShbEnergyDecrease(const ObjectiveSpec& problem,
                                   const MomentumState& state,
                                   const PrivacyParams& params,
                                   const StepSchedule& schedule,
                                   double coefficient,
                                   const MonteCarloOptions& options);

inline constexpr double kDefaultSeriesShare = 0.25;
inline constexpr std::int64_t kMinSeriesHorizon = 10000;

// Share of sum_t alpha_t Phi_t contributed by t in (T/10, T]. Momentum
// traces also test sum_t alpha_t min(|grad f|^2, q |grad f|) at the
// momentum point and report the larger share. An all-zero series has share
// 0. Throws std::invalid_argument when T < min_horizon.
CheckReport CheckSeriesConvergence(
    std::span<const TraceRecord> trace, double clip_threshold,
    double max_share = kDefaultSeriesShare,
    std::int64_t min_horizon = kMinSeriesHorizon);

// Share of a nonnegative series contributed by terms t in (T/10, T],
// where terms[i] is the term for t = i + 1.
double LastDecadeShare(std::span<const double> terms);

inline constexpr std::size_t kMinLastIterateSeeds = 20;

// Mean of |grad f(x_t)| over the last 1% of steps up to horizon H.
double TailMeanGradNorm(std::span<const TraceRecord> trace, std::int64_t H);

// For each seed compares TailMeanGradNorm at T against T/100. The statistic
// is the largest ratio over seeds, and the check passes when it is strictly
// below 1. Requires >= 20 traces, a momentum algorithm, q >= 1 and
// T >= 1e4.
CheckReport CheckLastIterate(std::span<const std::vector<TraceRecord>> traces,
                             Algorithm algorithm, double clip_threshold,
                             bool negative_control = false);

}  // namespace dpdescent

#endif  // DPDESCENT_VERIFICATION_H_
