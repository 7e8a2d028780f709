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

#include "dpdescent/privacy.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpdescent {
namespace {

void CheckRanges(double epsilon, double delta, double q) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("clipping threshold q must be positive");
  }
}

}  // namespace

double CalibrationThreshold(double epsilon, double delta, double q) {
  CheckRanges(epsilon, delta, q);
  return 2.0 * std::log(1.25 / delta) * q * q / (epsilon * epsilon);
}

double CalibrateSigmaSq(double epsilon, double delta, double q, double safety) {
  if (!(safety >= 1.0) || !std::isfinite(safety)) {
    throw std::invalid_argument("calibration safety factor must be >= 1");
  }
  return safety * CalibrationThreshold(epsilon, delta, q);
}

PrivacyParams PrivacyParams::Create(double epsilon, double delta, double q,
                                    double sigma_dp_sq, bool unsafe) {
  CheckRanges(epsilon, delta, q);
  if (!(sigma_dp_sq >= 0.0) || !std::isfinite(sigma_dp_sq)) {
    throw std::invalid_argument("sigma_dp_sq must be finite and >= 0");
  }
  PrivacyParams params(epsilon, delta, q, sigma_dp_sq, unsafe);
  if (!unsafe && !params.privacy_valid()) {
    throw std::invalid_argument(
        "sigma_dp_sq does not exceed 2 log(1.25/delta) q^2 / epsilon^2");
  }
  return params;
}

PrivacyParams PrivacyParams::Calibrated(double epsilon, double delta, double q,
                                        double safety) {
  return Create(epsilon, delta, q, CalibrateSigmaSq(epsilon, delta, q, safety));
}

double PrivacyParams::noise_stddev() const {
  return q_ * std::sqrt(sigma_dp_sq_);
}

bool PrivacyParams::privacy_valid() const {
  return sigma_dp_sq_ > CalibrationThreshold(epsilon_, delta_, q_);
}

namespace {

// The plain norm overflows once entries pass ~1e154; rescale only then.
double SafeNorm(const Vector& v) {
  const double n = v.norm();
  return std::isfinite(n) ? n : v.stableNorm();
}

}  // namespace

Vector Clip(const Vector& v, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("clip: q must be positive");
  const double norm = SafeNorm(v);
  if (norm <= q) return v;
  double scale = q / norm;
  Vector out = scale * v;
  // Rounding can leave |out| a few ulps above q; shrink until it is not.
  while (SafeNorm(out) > q) {
    scale = std::nextafter(scale, 0.0);
    out = scale * v;
  }
  return out;
}

Vector PrivatizeGradient(const Vector& g, const PrivacyParams& params,
                         RandomStream& noise_stream) {
  const double q = params.clip_threshold();
  const double stddev = params.noise_stddev();
  Vector out = Clip(g, q);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) += stddev * noise_stream.StandardNormal();
  }
  return out;
}

double SecondMomentBound(double q, int d, double sigma_dp_sq) {
  if (!(q > 0.0) || d < 1 || !(sigma_dp_sq >= 0.0)) {
    throw std::invalid_argument("second moment bound: arguments out of range");
  }
  return q * q * (1.0 + d * sigma_dp_sq);
}

}  // namespace dpdescent
