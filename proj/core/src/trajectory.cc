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

#include "dpdescent/trajectory.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpdescent {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-run diagnostic state: carried-forward Monte Carlo estimates and the
// cumulative columns.
class RowBuilder {
 public:
  RowBuilder(const ObjectiveSpec& problem, const PrivacyParams& params,
             const StepSchedule& schedule, const TrajectoryConfig& config)
      : problem_(problem),
        params_(params),
        schedule_(schedule),
        config_(config),
        rng_(config.seed, config.replicate),
        certified_d_(problem.directional_constant()),
        d_hat_(certified_d_.value_or(1.0)) {
    every_ = config.diagnostics.every > 0
                 ? config.diagnostics.every
                 : std::max<std::int64_t>(1, config.horizon / 1000);
    energy_c_ = IsMomentum(config.algorithm)
                    ? DefaultEnergyConstant(config.beta).c
                    : 0.0;
  }

  TraceRecord Build(std::int64_t t, const Vector& x,
                    const MomentumState* momentum) {
    TraceRecord row;
    row.t = t;
    row.alpha_t = schedule_(t);
    row.privacy_valid = params_.privacy_valid();
    const Vector grad = EvalGrad(problem_, x);
    row.grad_norm = grad.norm();
    row.f_gap = EvalF(problem_, x) - problem_.f_star();

    if ((t - 1) % every_ == 0) Refresh(t, x, row.grad_norm);
    row.eta_hat = eta_hat_;
    row.phi_hat =
        Phi(row.grad_norm, eta_hat_, d_hat_, params_.clip_threshold());
    const double mu = problem_.strong_convexity();
    if (mu > 0.0) {
      row.phi_mu_hat = PhiMu(std::max(0.0, row.f_gap), eta_hat_, d_hat_,
                             params_.clip_threshold(), mu);
    }
    if (momentum != nullptr) {
      row.energy = Energy(problem_, *momentum, energy_c_);
      const Vector anchor = momentum->kind == MomentumKind::kHeavyBall
                                ? momentum->Reparameterized()
                                : momentum->LookAhead();
      row.momentum_grad_norm = EvalGrad(problem_, anchor).norm();
    }
    columns_.Fill(row);
    return row;
  }

  TraceRecord Aborted(std::int64_t t) {
    TraceRecord row;
    row.t = t;
    row.alpha_t = schedule_(t);
    row.privacy_valid = params_.privacy_valid();
    row.f_gap = kNaN;
    row.grad_norm = kNaN;
    row.eta_hat = eta_hat_;
    row.phi_hat = kNaN;
    if (problem_.strong_convexity() > 0.0) row.phi_mu_hat = kNaN;
    if (IsMomentum(config_.algorithm)) {
      row.energy = kNaN;
      row.momentum_grad_norm = kNaN;
    }
    columns_.Fill(row);
    return row;
  }

 private:
  void Refresh(std::int64_t t, const Vector& x, double grad_norm) {
    RandomStream stream =
        rng_.Stream(StreamPurpose::kDiagnostics, static_cast<std::uint64_t>(t));
    eta_hat_ = EstimateEta(problem_, x, params_.clip_threshold(),
                           config_.diagnostics.eta_samples, stream)
                   .value;
    if (!certified_d_.has_value() && grad_norm > 0.0) {
      d_hat_ = std::clamp(
          EstimateD(problem_, x, config_.diagnostics.d_samples, stream).value,
          0.0, 1.0);
    }
  }

  const ObjectiveSpec& problem_;
  const PrivacyParams& params_;
  const StepSchedule& schedule_;
  const TrajectoryConfig& config_;
  CounterRng rng_;
  std::optional<double> certified_d_;
  double d_hat_;
  double eta_hat_ = 0.0;
  double energy_c_ = 0.0;
  std::int64_t every_ = 1;
  CumulativeColumns columns_;
};

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDpSgd:
      return "dp-sgd";
    case Algorithm::kDpShb:
      return "dp-shb";
    case Algorithm::kDpNag:
      return "dp-nag";
  }
  return "unknown";
}

std::optional<Algorithm> ParseAlgorithm(std::string_view name) {
  for (const Algorithm a :
       {Algorithm::kDpSgd, Algorithm::kDpShb, Algorithm::kDpNag}) {
    if (AlgorithmName(a) == name) return a;
  }
  return std::nullopt;
}

TrajectoryResult RunTrajectory(const ObjectiveSpec& problem,
                               const PrivacyParams& params,
                               const StepSchedule& schedule, const Vector& x0,
                               const TrajectoryConfig& config,
                               const TraceSink& sink, bool keep_trace) {
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (x0.size() != problem.dim()) {
    throw std::invalid_argument("x0 has the wrong dimension");
  }
  if (!x0.allFinite()) throw std::invalid_argument("x0 is not finite");

  TrajectoryResult result;
  if (keep_trace)
    result.trace.reserve(static_cast<std::size_t>(config.horizon));
  auto emit = [&](const TraceRecord& row) {
    if (sink) sink(row);
    if (keep_trace) result.trace.push_back(row);
  };

  RowBuilder rows(problem, params, schedule, config);
  const CounterRng rng(config.seed, config.replicate);

  if (config.algorithm == Algorithm::kDpSgd) {
    SgdState state{x0, 1};
    for (std::int64_t t = 1; t <= config.horizon; ++t) {
      emit(rows.Build(t, state.x, nullptr));
      state = DpSgdStep(state, problem, params, schedule, rng);
      if (!state.x.allFinite()) {
        emit(rows.Aborted(t + 1));
        result.aborted = true;
        break;
      }
    }
    result.final_x = std::move(state.x);
    return result;
  }

  const MomentumKind kind = config.algorithm == Algorithm::kDpShb
                                ? MomentumKind::kHeavyBall
                                : MomentumKind::kNesterov;
  MomentumState state = MomentumState::Start(x0, config.beta, kind);
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    emit(rows.Build(t, state.x, &state));
    state = kind == MomentumKind::kHeavyBall
                ? DpShbStep(state, problem, params, schedule, rng)
                : DpNagStep(state, problem, params, schedule, rng,
                            config.nesterov_point);
    if (!state.x.allFinite()) {
      emit(rows.Aborted(t + 1));
      result.aborted = true;
      break;
    }
  }
  result.final_x = std::move(state.x);
  return result;
}

Vector SeededGaussianPoint(int d, double norm, const CounterRng& rng) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(norm >= 0.0)) throw std::invalid_argument("norm must be >= 0");
  RandomStream stream = rng.Stream(StreamPurpose::kInitialization, 0);
  Vector x(d);
  for (int i = 0; i < d; ++i) x(i) = stream.StandardNormal();
  const double n = x.norm();
  return n > 0.0 ? Vector(x * (norm / n)) : x;
}

}  // namespace dpdescent
