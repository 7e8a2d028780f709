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

// Experiment configuration. Configs are JSON objects; every key is optional
// and unknown keys are rejected. See README.md for the schema.

#ifndef DPDESCENT_HARNESS_CONFIG_H_
#define DPDESCENT_HARNESS_CONFIG_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpdescent/optimizers.h"
#include "dpdescent/privacy.h"
#include "dpdescent/problems.h"
#include "dpdescent/trajectory.h"
#include "dpdescent/verification.h"

namespace dpdescent::harness {

// Schema violation. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sigma^2 below the calibration threshold without the unsafe flag. Maps to
// exit status 3.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NoiseConfig {
  std::string kind = "multiplicative";  // | "additive" | "minibatch"
  double rho = 0.5;
  double scale = 0.1;
  std::size_t batch_size = 10;
};

struct ProblemConfig {
  std::string name = "quadratic";  // | "boundedcell" | "logistic"
  int dim = 10;
  double mu = 0.1;
  double L = 1.0;
  std::uint64_t fixture_seed = 0;
  NoiseConfig noise;
  // Logistic only: a CSV file, or synthetic data when empty.
  std::string data_path;
  std::size_t num_examples = 200;
  double separation = 1.0;
  double l2 = 0.01;
};

struct PrivacyConfig {
  double epsilon = 1.0;
  double delta = 1e-5;
  double q = 1.0;
  double safety = kDefaultCalibrationSafety;
  std::optional<double> sigma_dp_sq;  // explicit; overrides safety
  bool unsafe = false;
};

struct ScheduleConfig {
  std::string mode = "polynomial-decay";  // | "table"
  double a = 0.1;
  double theta = 0.25;
  std::vector<double> table;
};

struct X0Config {
  std::string policy = "seeded-gaussian";  // | "zero"
  double norm = 5.0;
};

struct VerificationConfig {
  std::int64_t samples = 100000;
  int descent_states = 5;
  int supermartingale_states = 10;
  std::uint64_t state_seed = 1;
  double series_share = kDefaultSeriesShare;
  bool negative_controls = true;
};

struct ExperimentConfig {
  std::string algorithm = "dp-shb";
  ProblemConfig problem;
  PrivacyConfig privacy;
  ScheduleConfig schedule;
  double beta = 0.9;
  std::string nesterov_point = "look-ahead";  // | "current-iterate"
  X0Config x0;
  std::int64_t horizon = 10000;
  std::vector<std::uint64_t> seeds;  // default 0 .. 19
  DiagnosticsConfig diagnostics;
  VerificationConfig verification;
  bool last_iterate_report = false;
  std::string output_dir = "out";
};

// Parses and validates. Throws ConfigError on schema or range violations.
// The calibration inequality is checked separately by BuildPrivacy.
ExperimentConfig ParseConfig(const nlohmann::json& json);

// Reads a config file, or the "config" member of a run manifest.
ExperimentConfig LoadConfig(const std::string& path);

// The fully resolved config. ParseConfig(ToJson(c)) reproduces c.
nlohmann::json ToJson(const ExperimentConfig& config);

// Parses "3", "1,2,5" or "0..19" (inclusive).
std::vector<std::uint64_t> ParseSeedList(const std::string& text);

Algorithm ResolveAlgorithm(const ExperimentConfig& config);
NesterovGradientPoint ResolveNesterovPoint(const ExperimentConfig& config);
ObjectiveSpec BuildProblem(const ExperimentConfig& config);
// Throws CalibrationError when sigma^2 violates the calibration inequality
// and the unsafe flag is not set.
PrivacyParams BuildPrivacy(const ExperimentConfig& config);
StepSchedule BuildSchedule(const ExperimentConfig& config);
Vector BuildInitialPoint(const ExperimentConfig& config, int dim,
                         std::uint64_t seed);
TrajectoryConfig BuildTrajectoryConfig(const ExperimentConfig& config,
                                       std::uint64_t seed);

}  // namespace dpdescent::harness

#endif  // DPDESCENT_HARNESS_CONFIG_H_
