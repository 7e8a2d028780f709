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

#ifndef DPDESCENT_TRAJECTORY_H_
#define DPDESCENT_TRAJECTORY_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "dpdescent/diagnostics.h"
#include "dpdescent/optimizers.h"
#include "dpdescent/privacy.h"
#include "dpdescent/problems.h"

namespace dpdescent {

enum class Algorithm { kDpSgd, kDpShb, kDpNag };

std::string_view AlgorithmName(Algorithm algorithm);
std::optional<Algorithm> ParseAlgorithm(std::string_view name);
inline bool IsMomentum(Algorithm a) { return a != Algorithm::kDpSgd; }

struct DiagnosticsConfig {
  // Monte Carlo columns (eta_hat, and D_hat when D is not certified) are
  // refreshed every `every` steps; 0 means max(1, T / 1000). Between
  // refreshes the latest estimate is carried forward while |grad f| is
  // exact at every step.
  std::int64_t every = 0;
  std::int64_t eta_samples = 1000;
  std::int64_t d_samples = 1000;
};

struct TrajectoryConfig {
  Algorithm algorithm = Algorithm::kDpSgd;
  double beta = 0.0;  // ignored by DP-SGD
  NesterovGradientPoint nesterov_point = NesterovGradientPoint::kLookAhead;
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  DiagnosticsConfig diagnostics;
};

struct TrajectoryResult {
  std::vector<TraceRecord> trace;
  Vector final_x;
  // A coordinate became non-finite. The last trace row is then the
  // diagnostic row for the offending iterate.
  bool aborted = false;
};

using TraceSink = std::function<void(const TraceRecord&)>;

// Runs `horizon` steps from x0, emitting row t (for x_t) before step t is
// taken. Rows also go to `sink` as soon as they are formed. With
// keep_trace = false only the sink sees them.
TrajectoryResult RunTrajectory(const ObjectiveSpec& problem,
                               const PrivacyParams& params,
                               const StepSchedule& schedule, const Vector& x0,
                               const TrajectoryConfig& config,
                               const TraceSink& sink = {},
                               bool keep_trace = true);

// Gaussian direction scaled to `norm`, drawn from
// rng.Stream(kInitialization, 0).
Vector SeededGaussianPoint(int d, double norm, const CounterRng& rng);

}  // namespace dpdescent

#endif  // DPDESCENT_TRAJECTORY_H_
