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

// dpdescent command-line tool: run, verify, calibrate, report.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dpdescent/harness/commands.h"

namespace {

using dpdescent::harness::GlobalOptions;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private SGD, heavy-ball and Nesterov runs "
      "with convergence diagnostics and verification checks."};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpdescent::harness::LibraryVersion());

  GlobalOptions global;
  std::string seeds;
  std::string out_dir;
  app.add_option("--config", global.config_path,
                 "JSON config or run manifest (default: built-in defaults)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seeds", seeds,
                 "Seed list: '7', '1,2,5' or '0..19' (overrides the config)");
  app.add_option("--jobs", global.jobs,
                 "Worker threads; DPDESCENT_JOBS overrides this")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--unsafe-privacy", global.unsafe_privacy,
               "Allow sigma^2 at or below the calibration threshold");

  CLI::App* run = app.add_subcommand("run", "Run all seeds and write traces");

  std::string suite = "all";
  CLI::App* verify = app.add_subcommand("verify", "Run verification suites");
  verify
      ->add_option("suite", suite,
                   "clip, moments, descent, supermartingale, series, "
                   "last-iterate or all")
      ->check(CLI::IsMember({"clip", "moments", "descent", "supermartingale",
                             "series", "last-iterate", "all"}));

  double epsilon = 1.0;
  double delta = 1e-5;
  double q = 1.0;
  double safety = dpdescent::kDefaultCalibrationSafety;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Print the calibrated noise level");
  calibrate->add_option("--epsilon", epsilon, "Privacy epsilon (> 0)");
  calibrate->add_option("--delta", delta, "Privacy delta in (0, 1)");
  calibrate->add_option("--q", q, "Clipping threshold (> 0)");
  calibrate->add_option("--safety", safety,
                        "Multiplier on the threshold (>= 1, default 1.01)");

  std::string run_dir;
  CLI::App* report =
      app.add_subcommand("report", "Plots and summary for a finished run");
  report->add_option("run_dir", run_dir, "Directory written by `run`")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dpdescent::harness::kExitSchema;
  }
  if (!seeds.empty()) global.seeds = seeds;
  if (!out_dir.empty()) global.out_dir = out_dir;

  if (*run) return dpdescent::harness::RunCommand(global, std::cout, std::cerr);
  if (*verify) {
    return dpdescent::harness::VerifyCommand(global, suite, std::cout,
                                             std::cerr);
  }
  if (*calibrate) {
    return dpdescent::harness::CalibrateCommand(epsilon, delta, q, safety,
                                                std::cout, std::cerr);
  }
  return dpdescent::harness::ReportCommand(run_dir, std::cout, std::cerr);
}
