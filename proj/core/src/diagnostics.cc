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

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpdescent {
namespace {

void CheckMeritArgs(double eta, double D, double q) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in [0, 1]");
  }
  if (!(D >= 0.0 && D <= 1.0))
    throw std::invalid_argument("D must lie in [0, 1]");
  if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
}

}  // namespace

MonteCarloEstimate EstimateEta(const ObjectiveSpec& problem, const Vector& x,
                               double q, std::int64_t n, RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("EstimateEta: n must be >= 1");
  if (!(q > 0.0)) throw std::invalid_argument("EstimateEta: q must be > 0");
  const Vector grad = EvalGrad(problem, x);
  std::int64_t exceed = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (SampleStochasticGrad(problem, x, grad, stream).g.norm() > q) ++exceed;
  }
  MonteCarloEstimate est;
  est.samples = n;
  est.value = static_cast<double>(exceed) / static_cast<double>(n);
  est.standard_error =
      std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(n));
  return est;
}

MonteCarloEstimate EstimateD(const ObjectiveSpec& problem, const Vector& x,
                             std::int64_t n, RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("EstimateD: n must be >= 1");
  const Vector grad = EvalGrad(problem, x);
  const double grad_norm = grad.norm();
  if (grad_norm == 0.0) {
    throw std::invalid_argument("EstimateD: gradient vanishes at x");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  MonteCarloEstimate est;
  for (std::int64_t i = 0; i < n; ++i) {
    const Vector g = SampleStochasticGrad(problem, x, grad, stream).g;
    const double norm = g.norm();
    if (norm == 0.0) {
      ++est.skipped;
      continue;
    }
    const double a = grad.dot(g) / (norm * grad_norm);
    sum += a;
    sum_sq += a * a;
    ++est.samples;
  }
  if (est.samples == 0) {
    throw std::runtime_error("EstimateD: every draw was the zero vector");
  }
  const auto m = static_cast<double>(est.samples);
  est.value = sum / m;
  const double var =
      est.samples > 1
          ? std::max(0.0, (sum_sq - m * est.value * est.value) / (m - 1.0))
          : 0.0;
  est.standard_error = std::sqrt(var / m);
  return est;
}

double Phi(double grad_norm, double eta, double D, double q) {
  if (!(grad_norm >= 0.0))
    throw std::invalid_argument("grad_norm must be >= 0");
  CheckMeritArgs(eta, D, q);
  return (1.0 - eta) * grad_norm * grad_norm + D * eta * q * grad_norm;
}

double PhiMu(double f_gap, double eta, double D, double q, double mu) {
  if (!(f_gap >= 0.0)) throw std::invalid_argument("f_gap must be >= 0");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  CheckMeritArgs(eta, D, q);
  const double s = 2.0 * mu * f_gap;
  return (1.0 - eta) * s + D * eta * q * std::sqrt(s);
}

double Energy(const ObjectiveSpec& problem, const MomentumState& state,
              double c) {
  if (!(state.beta >= 0.0 && state.beta < 1.0)) {
    throw std::invalid_argument("Energy: beta must lie in [0, 1)");
  }
  const Vector v = state.Velocity();
  const Vector z = state.x + (state.beta / (1.0 - state.beta)) * v;
  return EvalF(problem, z) - problem.f_star() + c * v.squaredNorm();
}

EnergyConstants DefaultEnergyConstant(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in [0, 1)");
  }
  EnergyConstants k;
  k.c2 = 1.0;
  k.c1 = (1.0 - beta * beta) / 2.0;
  k.c = k.c2 / (1.0 + beta);
  return k;
}

std::vector<double> SeriesPartialSums(std::span<const TraceRecord> trace) {
  std::vector<double> sums;
  sums.reserve(trace.size());
  double s = 0.0;
  for (const TraceRecord& row : trace) {
    s += row.alpha_t * row.phi_hat;
    sums.push_back(s);
  }
  return sums;
}

RateSummary RateReport(std::span<const TraceRecord> trace) {
  RateSummary summary;
  if (trace.empty()) return summary;
  const std::vector<double> sums = SeriesPartialSums(trace);
  const auto last = static_cast<std::int64_t>(trace.size());
  auto add = [&](std::int64_t t) {
    const TraceRecord& row = trace[static_cast<std::size_t>(t - 1)];
    summary.checkpoints.push_back({row.t, row.best_phi, row.sum_alpha,
                                   row.rate_product,
                                   sums[static_cast<std::size_t>(t - 1)]});
  };
  std::int64_t decade = 100;
  for (; decade <= last; decade *= 10) add(decade);
  if (summary.checkpoints.empty() || summary.checkpoints.back().t != last) {
    add(last);
  }

  const auto& cps = summary.checkpoints;
  bool nonincreasing = true;
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (cps[i].rate_product > cps[i - 1].rate_product) nonincreasing = false;
  }
  const bool all_zero = std::all_of(
      cps.begin(), cps.end(),
      [](const RateCheckpoint& c) { return c.rate_product == 0.0; });
  summary.rate_product_decreasing =
      all_zero || (nonincreasing && cps.size() > 1 &&
                   cps.back().rate_product < cps.front().rate_product);

  // Increments over [10^k, 10^(k+1)] only; a trailing partial decade is not
  // comparable.
  std::vector<double> increments;
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (cps[i].t == 10 * cps[i - 1].t) {
      increments.push_back(cps[i].series_sum - cps[i - 1].series_sum);
    }
  }
  bool shrinking = increments.size() >= 2;
  for (std::size_t i = 1; i < increments.size(); ++i) {
    if (!(increments[i] < increments[i - 1] || increments[i] == 0.0)) {
      shrinking = false;
    }
  }
  summary.series_increments_shrinking = shrinking;
  return summary;
}

void CumulativeColumns::Fill(TraceRecord& row) {
  best_phi_ = started_ ? std::min(best_phi_, row.phi_hat) : row.phi_hat;
  started_ = true;
  row.best_phi = best_phi_;
  row.sum_alpha = sum_alpha_;
  row.rate_product = best_phi_ * sum_alpha_;
  sum_alpha_ += row.alpha_t;
}

void RecomputeCumulativeColumns(std::span<TraceRecord> trace) {
  CumulativeColumns columns;
  for (TraceRecord& row : trace) columns.Fill(row);
}

}  // namespace dpdescent
