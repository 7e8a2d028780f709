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

// Subcommands of the dpdescent CLI. Each returns a process exit status and
// never throws.

#ifndef DPDESCENT_HARNESS_COMMANDS_H_
#define DPDESCENT_HARNESS_COMMANDS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dpdescent/harness/config.h"
#include "dpdescent/verification.h"

namespace dpdescent::harness {

enum ExitStatus : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitSchema = 2,
  kExitCalibration = 3,
  kExitNonFinite = 4,
};

const char* LibraryVersion();

struct GlobalOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::string> out_dir;
  std::optional<std::string> seeds;  // see ParseSeedList
  int jobs = 0;                      // 0: hardware concurrency
  bool unsafe_privacy = false;
};

// Worker count: DPDESCENT_JOBS when set, else `flag`, else the hardware
// concurrency. Always >= 1.
int ResolveJobs(int flag);

// Runs fn(i) for i in [0, n) on `jobs` threads. Rethrows the first
// exception by index after all tasks finish.
void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)>& fn);

// Applies --config, --seeds, --out and --unsafe-privacy.
ExperimentConfig ResolveConfig(const GlobalOptions& options);

nlohmann::json ToJson(const CheckReport& report);

inline const std::vector<std::string> kVerifySuites = {
    "clip", "moments", "descent", "supermartingale", "series", "last-iterate"};

// Pure check logic behind `verify`. Throws ConfigError when a suite's
// preconditions are not met by the config.
std::vector<CheckReport> RunVerifySuite(const ExperimentConfig& config,
                                        const std::string& suite, int jobs);

int RunCommand(const GlobalOptions& options, std::ostream& out,
               std::ostream& err);
int VerifyCommand(const GlobalOptions& options, const std::string& suite,
                  std::ostream& out, std::ostream& err);
int CalibrateCommand(double epsilon, double delta, double q, double safety,
                     std::ostream& out, std::ostream& err);
int ReportCommand(const std::string& run_dir, std::ostream& out,
                  std::ostream& err);

}  // namespace dpdescent::harness

#endif  // DPDESCENT_HARNESS_COMMANDS_H_
