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

// Clipping, Gaussian noise injection and (epsilon, delta) calibration for
// the privatized gradient
//
//   g_dp = clip_q(g) + q * zeta,   zeta ~ N(0, sigma_dp_sq * I).
//
// The realized per-coordinate noise standard deviation is q * sigma_dp.

#ifndef DPDESCENT_PRIVACY_H_
#define DPDESCENT_PRIVACY_H_

#include "dpdescent/problems.h"
#include "dpdescent/random.h"

namespace dpdescent {

inline constexpr double kDefaultCalibrationSafety = 1.01;

// 2 log(1.25 / delta) q^2 / epsilon^2. A single Gaussian-mechanism step is
// (epsilon, delta)-DP when sigma_dp_sq strictly exceeds this.
double CalibrationThreshold(double epsilon, double delta, double q);

// safety * CalibrationThreshold(epsilon, delta, q). Requires safety >= 1.
double CalibrateSigmaSq(double epsilon, double delta, double q,
                        double safety = kDefaultCalibrationSafety);

class PrivacyParams {
 public:
  // Validates ranges and, unless `unsafe` is set, the strict calibration
  // inequality. Unsafe parameters are meant for ablations (sigma_dp_sq = 0,
  // huge q) and are reported as not privacy-valid.
  static PrivacyParams Create(double epsilon, double delta, double q,
                              double sigma_dp_sq, bool unsafe = false);

  // sigma_dp_sq = CalibrateSigmaSq(epsilon, delta, q, safety), safety > 1.
  static PrivacyParams Calibrated(double epsilon, double delta, double q,
                                  double safety = kDefaultCalibrationSafety);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  double clip_threshold() const { return q_; }
  double sigma_dp_sq() const { return sigma_dp_sq_; }
  bool unsafe() const { return unsafe_; }

  // q * sqrt(sigma_dp_sq).
  double noise_stddev() const;
  // True when the calibration inequality holds, whatever the unsafe flag.
  bool privacy_valid() const;

 private:
  PrivacyParams(double epsilon, double delta, double q, double sigma_dp_sq,
                bool unsafe)
      : epsilon_(epsilon),
        delta_(delta),
        q_(q),
        sigma_dp_sq_(sigma_dp_sq),
        unsafe_(unsafe) {}

  double epsilon_;
  double delta_;
  double q_;
  double sigma_dp_sq_;
  bool unsafe_;
};

// min(1, q / |v|) v, with clip(0) = 0. The result satisfies
// |result| <= q under the same floating-point norm, so clipping twice is
// the identity on the first result.
Vector Clip(const Vector& v, double q);

// clip(g, q) + q * zeta with zeta drawn from `noise_stream`.
Vector PrivatizeGradient(const Vector& g, const PrivacyParams& params,
                         RandomStream& noise_stream);

// q^2 (1 + d sigma_dp_sq): the bound on E|g_dp|^2.
double SecondMomentBound(double q, int d, double sigma_dp_sq);

}  // namespace dpdescent

#endif  // DPDESCENT_PRIVACY_H_
