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

// Convergence diagnostics along a trajectory.
//
// The merit functions are
//
//   Phi(x)    = (1 - eta) |grad f(x)|^2 + D eta q |grad f(x)|
//   Phi_mu(x) = (1 - eta) 2 mu (f(x) - f*) + D eta q sqrt(2 mu (f(x) - f*))
//
// where eta = P(|g| > q | x) is the clipping probability. eta and D are
// population quantities; the trajectory never observes them, so they are
// estimated by Monte Carlo on a dedicated stream.

#ifndef DPDESCENT_DIAGNOSTICS_H_
#define DPDESCENT_DIAGNOSTICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpdescent/optimizers.h"
#include "dpdescent/problems.h"
#include "dpdescent/random.h"

namespace dpdescent {

// One row per iteration, describing the iterate x_t before step t is taken.
// Serialized in this field order.
struct TraceRecord {
  std::int64_t t = 0;
  double alpha_t = 0.0;
  double f_gap = 0.0;      // f(x_t) - f_star
  double grad_norm = 0.0;  // |grad f(x_t)|
  double eta_hat = 0.0;
  double phi_hat = 0.0;
  std::optional<double> phi_mu_hat;  // strongly convex problems only
  std::optional<double> energy;      // momentum runs only
  double best_phi = 0.0;             // min_{i <= t} phi_hat_i
  double sum_alpha = 0.0;            // sum_{i < t} alpha_i
  double rate_product = 0.0;         // best_phi * sum_alpha
  bool privacy_valid = false;
  // |grad f| at the point driving the momentum analysis: z_t for heavy ball,
  // the look-ahead y_t for Nesterov. Momentum runs only.
  std::optional<double> momentum_grad_norm;
};

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::int64_t samples = 0;
  std::int64_t skipped = 0;
};

// Fraction of n stochastic-gradient draws at x with |g| > q, with its
// binomial standard error.
MonteCarloEstimate EstimateEta(const ObjectiveSpec& problem, const Vector& x,
                               double q, std::int64_t n, RandomStream& stream);

// Mean of <grad f(x), g / |g|> / |grad f(x)| over n draws. Draws with g = 0
// are skipped and counted. Requires grad f(x) != 0.
MonteCarloEstimate EstimateD(const ObjectiveSpec& problem, const Vector& x,
                             std::int64_t n, RandomStream& stream);

double Phi(double grad_norm, double eta, double D, double q);
double PhiMu(double f_gap, double eta, double D, double q, double mu);

// Y = f(z) - f_star + c |v|^2 with v = x - x_prev, z = x + beta/(1-beta) v.
double Energy(const ObjectiveSpec& problem, const MomentumState& state,
              double c);

// Constants balancing c = c2 (1 - beta) / 2 + c beta^2 + c c1 with the
// choice c1 = (1 - beta^2) / 2, c2 = 1, hence c = 1 / (1 + beta).
struct EnergyConstants {
  double c = 1.0;
  double c1 = 0.5;
  double c2 = 1.0;
};
EnergyConstants DefaultEnergyConstant(double beta);

struct RateCheckpoint {
  std::int64_t t = 0;
  double best_phi = 0.0;
  double sum_alpha = 0.0;
  double rate_product = 0.0;
  double series_sum = 0.0;  // sum_{i <= t} alpha_i phi_hat_i
};

struct RateSummary {
  std::vector<RateCheckpoint> checkpoints;
  // rate_product never increases across checkpoints and ends below where it
  // started (or is identically zero).
  bool rate_product_decreasing = false;
  // Series increments over successive decades strictly shrink.
  bool series_increments_shrinking = false;
};

// Checkpoints at t = 100, 1000, ... (powers of ten within the trace) plus the
// last row when it is not a power of ten.
RateSummary RateReport(std::span<const TraceRecord> trace);

// sum_{i <= t} alpha_i phi_hat_i for every prefix.
std::vector<double> SeriesPartialSums(std::span<const TraceRecord> trace);

// Running best_phi, sum_alpha and rate_product maintained row by row.
class CumulativeColumns {
 public:
  void Fill(TraceRecord& row);

 private:
  bool started_ = false;
  double best_phi_ = 0.0;
  double sum_alpha_ = 0.0;
};

// Recomputes best_phi, sum_alpha and rate_product from the per-row columns.
void RecomputeCumulativeColumns(std::span<TraceRecord> trace);

}  // namespace dpdescent

#endif  // DPDESCENT_DIAGNOSTICS_H_
