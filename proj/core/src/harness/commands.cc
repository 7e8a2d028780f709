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

#include "dpdescent/harness/commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include "dpdescent/harness/svg_plot.h"
#include "dpdescent/harness/trace_io.h"

#ifndef DPDESCENT_VERSION
#define DPDESCENT_VERSION "unknown"
#endif

namespace dpdescent::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Monte Carlo seeds per suite, offset from verification.state_seed so that
// suites never share draws.
constexpr std::uint64_t kMomentsSeedBase = 1000;
constexpr std::uint64_t kDescentSeedBase = 2000;
constexpr std::uint64_t kSupermartingaleSeedBase = 3000;
constexpr std::uint64_t kEnergySeedBase = 4000;
constexpr std::uint64_t kPilotStateOffset = 100;

constexpr double kEnergyVelocityScale = 0.1;
constexpr double kEnergySlopeTarget = 2.0;
constexpr double kEnergySlopeTolerance = 0.2;
constexpr std::int64_t kEnergyPilotDivisor = 10;
constexpr double kSeriesControlShare = 0.15;
constexpr std::int64_t kSeriesControlHorizon = 100000;
// Relative tightening applied to checks that hold with equality.
constexpr double kEqualityControlShift = 1e-6;

const std::vector<double> kEnergyPilotAlphas = {0.1, 0.05, 0.025, 0.0125};

template <typename F>
int Guard(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const CalibrationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.close();
  if (out.fail()) throw std::runtime_error("failed writing " + path.string());
}

void WriteJson(const fs::path& path, const json& j) {
  WriteText(path, j.dump(2) + "\n");
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string TraceName(std::uint64_t seed) {
  return "trace_" + std::to_string(seed) + ".csv";
}

json CheckpointsJson(const RateSummary& summary) {
  json rows = json::array();
  for (const RateCheckpoint& c : summary.checkpoints) {
    rows.push_back({{"t", c.t},
                    {"best_phi", c.best_phi},
                    {"sum_alpha", c.sum_alpha},
                    {"rate_product", c.rate_product},
                    {"series_sum", c.series_sum}});
  }
  return rows;
}

std::string FormatCell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void PrintReportTable(const std::vector<CheckReport>& reports,
                      std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %14s %14s %12s %-8s %s\n", "check",
                "statistic", "threshold", "std_err", "result", "expected");
  out << line;
  for (const CheckReport& r : reports) {
    std::snprintf(
        line, sizeof(line), "%-22s %14s %14s %12s %-8s %s\n", r.name.c_str(),
        FormatCell(r.statistic).c_str(), FormatCell(r.threshold).c_str(),
        FormatCell(r.standard_error).c_str(), r.passed ? "pass" : "fail",
        r.negative_control
            ? (r.AsExpected() ? "fail (control)" : "FAIL EXPECTED, GOT PASS")
            : (r.AsExpected() ? "pass" : "UNEXPECTED"));
    out << line;
  }
}

// Runs the configured trajectory for every seed, in seed order.
std::vector<std::vector<TraceRecord>> RunSeeds(const ExperimentConfig& config,
                                               const StepSchedule& schedule,
                                               int jobs) {
  const ObjectiveSpec problem = BuildProblem(config);
  const PrivacyParams params = BuildPrivacy(config);
  std::vector<std::vector<TraceRecord>> traces(config.seeds.size());
  ParallelFor(config.seeds.size(), jobs, [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    const Vector x0 = BuildInitialPoint(config, problem.dim(), seed);
    traces[i] = RunTrajectory(problem, params, schedule, x0,
                              BuildTrajectoryConfig(config, seed))
                    .trace;
  });
  return traces;
}

std::vector<CheckReport> MomentsSuite(const ExperimentConfig& config) {
  const ObjectiveSpec problem = BuildProblem(config);
  const PrivacyParams params = BuildPrivacy(config);
  const VerificationConfig& v = config.verification;
  std::vector<CheckReport> reports;
  const std::vector<Vector> states =
      SampleStates(problem.dim(), v.descent_states, v.state_seed);
  for (std::size_t k = 0; k < states.size(); ++k) {
    MonteCarloOptions o;
    o.samples = v.samples;
    o.seed = v.state_seed * 10000 + kMomentsSeedBase + k;
    reports.push_back(CheckSecondMoment(problem, states[k], params, o));
  }
  return reports;
}

void RequireCertified(const ObjectiveSpec& problem, const char* suite) {
  if (!problem.directional_constant().has_value()) {
    throw ConfigError(std::string(suite) +
                      " suite requires the multiplicative noise model");
  }
}

std::vector<CheckReport> DescentSuite(const ExperimentConfig& config) {
  const ObjectiveSpec problem = BuildProblem(config);
  RequireCertified(problem, "descent");
  const PrivacyParams params = BuildPrivacy(config);
  const VerificationConfig& v = config.verification;
  std::vector<CheckReport> reports;
  const std::vector<Vector> states =
      SampleStates(problem.dim(), v.descent_states, v.state_seed);
  for (std::size_t k = 0; k < states.size(); ++k) {
    MonteCarloOptions o;
    o.samples = v.samples;
    o.seed = v.state_seed * 10000 + kDescentSeedBase + k;
    reports.push_back(CheckDescentInequality(problem, states[k], params, o));
  }
  if (v.negative_controls) {
    // No sampling noise, no privacy noise and no clipping: the inequality
    // is an equality, so a tightened threshold must fail.
    const ObjectiveSpec exact =
        problem.WithNoise(NoiseModel::MultiplicativeBounded(0.0));
    const PrivacyParams off = PrivacyParams::Create(
        params.epsilon(), params.delta(), 1e9, 0.0, /*unsafe=*/true);
    const double g2 = EvalGrad(exact, states[0]).squaredNorm();
    MonteCarloOptions o;
    o.samples = 1000;
    o.seed = v.state_seed * 10000 + kDescentSeedBase + 999;
    o.threshold_shift = -kEqualityControlShift * std::max(g2, 1.0);
    o.negative_control = true;
    CheckReport r = CheckDescentInequality(exact, states[0], off, o);
    r.name = "descent_equality_control";
    reports.push_back(r);
  }
  return reports;
}

std::vector<CheckReport> SupermartingaleSuite(const ExperimentConfig& config) {
  const ObjectiveSpec problem = BuildProblem(config);
  RequireCertified(problem, "supermartingale");
  const PrivacyParams params = BuildPrivacy(config);
  const StepSchedule schedule = BuildSchedule(config);
  const VerificationConfig& v = config.verification;
  const int d = problem.dim();
  std::vector<CheckReport> reports;

  const std::vector<Vector> states =
      SampleStates(d, v.supermartingale_states, v.state_seed);
  for (std::size_t k = 0; k < states.size(); ++k) {
    MonteCarloOptions o;
    o.samples = v.samples;
    o.seed = v.state_seed * 10000 + kSupermartingaleSeedBase + k;
    reports.push_back(
        CheckSgdSupermartingale(problem, states[k], params, schedule,
                                static_cast<std::int64_t>(k) + 1, o));
  }
  if (v.negative_controls) {
    // Isotropic quadratic, no noise, q = |grad f|: the one-step bound is
    // attained exactly.
    const ObjectiveSpec iso = MakeDiagonalQuadratic(
        Vector::Ones(d), NoiseModel::MultiplicativeBounded(0.0));
    const Vector& x = states[0];
    const PrivacyParams tight = PrivacyParams::Create(
        params.epsilon(), params.delta(), EvalGrad(iso, x).norm(), 0.0,
        /*unsafe=*/true);
    MonteCarloOptions o;
    o.samples = 1000;
    o.seed = v.state_seed * 10000 + kSupermartingaleSeedBase + 999;
    o.threshold_shift = -kEqualityControlShift * std::max(1.0, x.squaredNorm());
    o.negative_control = true;
    CheckReport r = CheckSgdSupermartingale(iso, x, tight, schedule, 1, o);
    r.name = "supermartingale_equality_control";
    reports.push_back(r);
  }

  // Heavy-ball energy recursion with a coefficient fitted on pilot states.
  const double beta = config.beta;
  std::vector<MomentumState> pilot = SampleMomentumStates(
      d, v.supermartingale_states, beta, MomentumKind::kHeavyBall,
      kEnergyVelocityScale, v.state_seed + kPilotStateOffset);
  const std::size_t with_velocity = pilot.size();
  for (std::size_t k = 0; k < with_velocity; ++k) {
    MomentumState still = pilot[k];
    still.x_prev = still.x;
    pilot.push_back(still);
  }
  MonteCarloOptions pilot_options;
  pilot_options.samples =
      std::max<std::int64_t>(1000, v.samples / kEnergyPilotDivisor);
  pilot_options.seed = v.state_seed * 10000 + kEnergySeedBase + 500;
  const double coefficient = FitEnergyCoefficient(
      problem, pilot, kEnergyPilotAlphas, params, pilot_options);

  MonteCarloOptions slope_options;
  slope_options.samples = v.samples;
  slope_options.seed = v.state_seed * 10000 + kEnergySeedBase + 900;
  const SlopeFit fit = FitEnergySlope(
      problem, pilot[with_velocity], kEnergyPilotAlphas, params, slope_options);
  CheckReport slope;
  slope.name = "shb_energy_slope";
  slope.statistic = std::abs(fit.slope - kEnergySlopeTarget);
  slope.threshold = kEnergySlopeTolerance;
  slope.one_sided = false;
  slope.passed = slope.statistic <= slope.threshold;
  slope.n_samples = v.samples;
  slope.seed = slope_options.seed;
  reports.push_back(slope);

  const std::vector<MomentumState> test = SampleMomentumStates(
      d, v.supermartingale_states, beta, MomentumKind::kHeavyBall,
      kEnergyVelocityScale, v.state_seed);
  for (std::size_t k = 0; k < test.size(); ++k) {
    MonteCarloOptions o;
    o.samples = v.samples;
    o.seed = v.state_seed * 10000 + kEnergySeedBase + k;
    reports.push_back(CheckShbEnergyDecrease(problem, test[k], params, schedule,
                                             coefficient, o));
  }
  return reports;
}

std::vector<CheckReport> SeriesSuite(
    const ExperimentConfig& config,
    const std::vector<std::vector<TraceRecord>>& traces) {
  std::vector<CheckReport> reports;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    CheckReport r = CheckSeriesConvergence(traces[i], config.privacy.q,
                                           config.verification.series_share);
    r.seed = config.seeds[i];
    reports.push_back(r);
  }
  if (config.verification.negative_controls) {
    // Harmonic series: divergent, last-decade share near ln 10 / ln T.
    std::vector<TraceRecord> harmonic(kSeriesControlHorizon);
    for (std::int64_t t = 1; t <= kSeriesControlHorizon; ++t) {
      TraceRecord& row = harmonic[static_cast<std::size_t>(t - 1)];
      row.t = t;
      row.alpha_t = 1.0 / static_cast<double>(t);
      row.phi_hat = 1.0;
    }
    CheckReport r =
        CheckSeriesConvergence(harmonic, config.privacy.q, kSeriesControlShare);
    r.name = "series_harmonic_control";
    r.negative_control = true;
    reports.push_back(r);
  }
  return reports;
}

void RequireSeriesHorizon(const ExperimentConfig& config) {
  if (config.horizon < kMinSeriesHorizon) {
    throw ConfigError("series check: trace too short (horizon " +
                      std::to_string(config.horizon) + " < " +
                      std::to_string(kMinSeriesHorizon) + ")");
  }
}

void RequireLastIterate(const ExperimentConfig& config) {
  if (!IsMomentum(ResolveAlgorithm(config))) {
    throw ConfigError("last-iterate suite requires dp-shb or dp-nag");
  }
  if (config.seeds.size() < kMinLastIterateSeeds) {
    throw ConfigError("last-iterate suite requires at least 20 seeds");
  }
  if (config.privacy.q < 1.0) {
    throw ConfigError("last-iterate suite requires privacy.q >= 1");
  }
  if (config.horizon < kMinSeriesHorizon) {
    throw ConfigError("last-iterate suite requires horizon >= 10000");
  }
}

std::vector<CheckReport> LastIterateSuite(
    const ExperimentConfig& config,
    const std::vector<std::vector<TraceRecord>>& traces, int jobs) {
  std::vector<CheckReport> reports;
  const Algorithm algorithm = ResolveAlgorithm(config);
  reports.push_back(CheckLastIterate(traces, algorithm, config.privacy.q));
  if (config.verification.negative_controls) {
    // Constant step at the schedule's first value: not square-summable.
    const StepSchedule constant =
        StepSchedule::Constant(BuildSchedule(config)(1));
    const auto control = RunSeeds(config, constant, jobs);
    CheckReport r = CheckLastIterate(control, algorithm, config.privacy.q,
                                     /*negative_control=*/true);
    r.name = "last_iterate_constant_step_control";
    reports.push_back(r);
  }
  return reports;
}

// The output directory is left out so that a run's artifacts do not depend
// on where they are written.
json RunManifest(const ExperimentConfig& config, const PrivacyParams& params) {
  json resolved = ToJson(config);
  resolved.erase("output_dir");
  return {{"tool", "dpdescent"},
          {"library_version", LibraryVersion()},
          {"config", resolved},
          {"seeds", config.seeds},
          {"resolved_privacy",
           {{"calibration_threshold",
             CalibrationThreshold(params.epsilon(), params.delta(),
                                  params.clip_threshold())},
            {"sigma_dp_sq", params.sigma_dp_sq()},
            {"noise_stddev", params.noise_stddev()},
            {"privacy_valid", params.privacy_valid()}}}};
}

struct Band {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Band Quantiles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  Band b;
  b.min = v.front();
  b.max = v.back();
  const std::size_t n = v.size();
  b.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  return b;
}

struct PlotKind {
  const char* file;
  const char* title;
  const char* y_label;
};

constexpr PlotKind kPlots[] = {
    {"best_phi", "best Phi_hat vs t", "min_{i<=t} Phi_hat"},
    {"rate_product", "rate product vs t", "best_phi * sum alpha"},
    {"grad_norm", "gradient norm vs t", "|grad f(x_t)|"},
    {"series", "series partial sums vs t", "sum alpha_t Phi_hat_t"},
};

// Column values for plot kind k; `series` holds the partial sums.
std::vector<double> PlotValues(int k, const std::vector<TraceRecord>& trace,
                               const std::vector<double>& series) {
  std::vector<double> v;
  v.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceRecord& r = trace[i];
    switch (k) {
      case 0:
        v.push_back(r.best_phi);
        break;
      case 1:
        v.push_back(r.rate_product);
        break;
      case 2:
        v.push_back(r.grad_norm);
        break;
      default:
        v.push_back(series[i]);
    }
  }
  return v;
}

}  // namespace

const char* LibraryVersion() { return DPDESCENT_VERSION; }

int ResolveJobs(int flag) {
  if (const char* env = std::getenv("DPDESCENT_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  if (flag >= 1) return flag;
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentConfig ResolveConfig(const GlobalOptions& options) {
  ExperimentConfig config = options.config_path.empty()
                                ? ParseConfig(json::object())
                                : LoadConfig(options.config_path);
  if (options.seeds) config.seeds = ParseSeedList(*options.seeds);
  if (options.out_dir) config.output_dir = *options.out_dir;
  if (options.unsafe_privacy) config.privacy.unsafe = true;
  return ParseConfig(ToJson(config));
}

json ToJson(const CheckReport& r) {
  return {{"check_name", r.name},
          {"statistic", r.statistic},
          {"threshold", r.threshold},
          {"standard_error", r.standard_error},
          {"passed", r.passed},
          {"n_samples", r.n_samples},
          {"seed", r.seed},
          {"one_sided", r.one_sided},
          {"negative_control", r.negative_control},
          {"as_expected", r.AsExpected()}};
}

std::vector<CheckReport> RunVerifySuite(const ExperimentConfig& config,
                                        const std::string& suite, int jobs) {
  const bool all = suite == "all";
  if (!all && std::find(kVerifySuites.begin(), kVerifySuites.end(), suite) ==
                  kVerifySuites.end()) {
    throw ConfigError("unknown verify suite: " + suite);
  }
  auto wants = [&](const char* name) { return all || suite == name; };

  // Validate every precondition before doing any work.
  if (wants("descent") || wants("supermartingale")) {
    RequireCertified(BuildProblem(config),
                     wants("descent") ? "descent" : "supermartingale");
  }
  if (wants("series")) RequireSeriesHorizon(config);
  if (wants("last-iterate")) RequireLastIterate(config);
  BuildPrivacy(config);

  std::vector<CheckReport> reports;
  auto append = [&](std::vector<CheckReport> more) {
    reports.insert(reports.end(), more.begin(), more.end());
  };
  if (wants("clip")) {
    append(CheckClipLaws(100000, config.verification.state_seed));
  }
  if (wants("moments")) append(MomentsSuite(config));
  if (wants("descent")) append(DescentSuite(config));
  if (wants("supermartingale")) append(SupermartingaleSuite(config));
  if (wants("series") || wants("last-iterate")) {
    const auto traces = RunSeeds(config, BuildSchedule(config), jobs);
    if (wants("series")) append(SeriesSuite(config, traces));
    if (wants("last-iterate")) append(LastIterateSuite(config, traces, jobs));
  }
  return reports;
}

int RunCommand(const GlobalOptions& options, std::ostream& out,
               std::ostream& err) {
  return Guard(err, [&] {
    const ExperimentConfig config = ResolveConfig(options);
    const ObjectiveSpec problem = BuildProblem(config);
    const PrivacyParams params = BuildPrivacy(config);
    const StepSchedule schedule = BuildSchedule(config);
    const Algorithm algorithm = ResolveAlgorithm(config);
    if (config.last_iterate_report) RequireLastIterate(config);

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    WriteJson(dir / "manifest.json", RunManifest(config, params));

    const std::size_t n = config.seeds.size();
    std::vector<std::vector<TraceRecord>> traces(n);
    std::vector<char> aborted(n, 0);
    ParallelFor(n, ResolveJobs(options.jobs), [&](std::size_t i) {
      const std::uint64_t seed = config.seeds[i];
      TraceWriter writer((dir / TraceName(seed)).string());
      const Vector x0 = BuildInitialPoint(config, problem.dim(), seed);
      TrajectoryResult result = RunTrajectory(
          problem, params, schedule, x0, BuildTrajectoryConfig(config, seed),
          [&writer](const TraceRecord& row) { writer.Append(row); });
      writer.Close();
      aborted[i] = result.aborted ? 1 : 0;
      traces[i] = std::move(result.trace);
    });

    json seeds = json::array();
    bool any_aborted = false;
    for (std::size_t i = 0; i < n; ++i) {
      const RateSummary summary = RateReport(traces[i]);
      any_aborted = any_aborted || aborted[i] != 0;
      seeds.push_back(
          {{"seed", config.seeds[i]},
           {"rows", traces[i].size()},
           {"aborted", aborted[i] != 0},
           {"checkpoints", CheckpointsJson(summary)},
           {"rate_product_decreasing", summary.rate_product_decreasing},
           {"series_increments_shrinking",
            summary.series_increments_shrinking}});
      const TraceRecord& last = traces[i].back();
      out << "seed " << config.seeds[i] << ": " << traces[i].size()
          << " rows, best_phi " << FormatCell(last.best_phi)
          << ", rate_product " << FormatCell(last.rate_product)
          << (aborted[i] ? ", ABORTED (non-finite iterate)" : "") << "\n";
    }
    json report = {{"algorithm", AlgorithmName(algorithm)}, {"seeds", seeds}};
    if (config.last_iterate_report && !any_aborted) {
      report["last_iterate"] =
          ToJson(CheckLastIterate(traces, algorithm, config.privacy.q));
    }
    WriteJson(dir / "rate_report.json", report);
    if (any_aborted) {
      err << "error: non-finite iterate; partial traces retained\n";
      return static_cast<int>(kExitNonFinite);
    }
    return static_cast<int>(kExitOk);
  });
}

int VerifyCommand(const GlobalOptions& options, const std::string& suite,
                  std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const ExperimentConfig config = ResolveConfig(options);
    const std::vector<CheckReport> reports =
        RunVerifySuite(config, suite, ResolveJobs(options.jobs));
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    json array = json::array();
    for (const CheckReport& r : reports) array.push_back(ToJson(r));
    WriteJson(dir / "checks.json", array);
    PrintReportTable(reports, out);
    const auto bad =
        std::count_if(reports.begin(), reports.end(),
                      [](const CheckReport& r) { return !r.AsExpected(); });
    out << reports.size() - static_cast<std::size_t>(bad) << "/"
        << reports.size() << " checks as expected\n";
    return bad == 0 ? static_cast<int>(kExitOk)
                    : static_cast<int>(kExitFailure);
  });
}

int CalibrateCommand(double epsilon, double delta, double q, double safety,
                     std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    double threshold = 0.0;
    double sigma_sq = 0.0;
    try {
      threshold = CalibrationThreshold(epsilon, delta, q);
      sigma_sq = CalibrateSigmaSq(epsilon, delta, q, safety);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    out << "threshold " << FormatReal(threshold) << "\n";
    out << "sigma_dp_sq " << FormatReal(sigma_sq) << "\n";
    out << "noise_stddev " << FormatReal(q * std::sqrt(sigma_sq)) << "\n";
    out << "strict_inequality " << (sigma_sq > threshold ? "holds" : "violated")
        << "\n";
    return static_cast<int>(kExitOk);
  });
}

int ReportCommand(const std::string& run_dir, std::ostream& out,
                  std::ostream& err) {
  return Guard(err, [&] {
    const fs::path dir(run_dir);
    const json manifest = ReadJson(dir / "manifest.json");
    if (!manifest.contains("seeds") || !manifest.at("seeds").is_array()) {
      throw std::runtime_error("manifest.json has no seed list");
    }
    std::vector<std::uint64_t> seeds;
    for (const json& s : manifest.at("seeds")) {
      seeds.push_back(s.get<std::uint64_t>());
    }
    if (seeds.empty()) throw std::runtime_error("manifest.json lists no seeds");

    std::vector<std::vector<TraceRecord>> traces;
    for (const std::uint64_t seed : seeds) {
      traces.push_back(ReadTrace((dir / TraceName(seed)).string()));
      if (traces.back().empty()) {
        throw std::runtime_error(TraceName(seed) + " has no rows");
      }
    }

    json per_seed = json::array();
    std::vector<std::vector<double>> partial_sums;
    std::size_t written = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const RateSummary summary = RateReport(traces[i]);
      partial_sums.push_back(SeriesPartialSums(traces[i]));
      per_seed.push_back(
          {{"seed", seeds[i]},
           {"rows", traces[i].size()},
           {"checkpoints", CheckpointsJson(summary)},
           {"rate_product_decreasing", summary.rate_product_decreasing},
           {"series_increments_shrinking",
            summary.series_increments_shrinking}});
      std::vector<double> t;
      for (const TraceRecord& r : traces[i])
        t.push_back(static_cast<double>(r.t));
      const std::vector<std::size_t> keep = LogSpacedIndices(t.size());
      for (int k = 0; k < 4; ++k) {
        const std::vector<double> y = PlotValues(k, traces[i], partial_sums[i]);
        PlotSeries s;
        s.label = "seed " + std::to_string(seeds[i]);
        for (const std::size_t j : keep) {
          s.x.push_back(t[j]);
          s.y.push_back(y[j]);
        }
        LogLogPlot plot{kPlots[k].title, "t", kPlots[k].y_label, {s}};
        WriteText(dir / (std::string(kPlots[k].file) + "_" +
                         std::to_string(seeds[i]) + ".svg"),
                  RenderSvg(plot));
        ++written;
      }
    }

    json summary = {{"seeds", per_seed}};
    if (seeds.size() > 1) {
      std::size_t rows = traces[0].size();
      for (const auto& tr : traces) rows = std::min(rows, tr.size());
      std::vector<std::vector<double>> values(4);
      json checkpoints = json::array();
      std::vector<std::int64_t> cps;
      for (std::int64_t c = 100; c <= static_cast<std::int64_t>(rows);
           c *= 10) {
        cps.push_back(c);
      }
      if (cps.empty() || cps.back() != static_cast<std::int64_t>(rows)) {
        cps.push_back(static_cast<std::int64_t>(rows));
      }
      auto band_at = [&](int k, std::size_t j) {
        std::vector<double> v;
        for (std::size_t i = 0; i < traces.size(); ++i) {
          v.push_back(PlotValues(k, {traces[i][j]}, {partial_sums[i][j]})[0]);
        }
        return Quantiles(v);
      };
      for (const std::int64_t c : cps) {
        const auto j = static_cast<std::size_t>(c - 1);
        json row = {{"t", c}};
        for (int k = 0; k < 4; ++k) {
          const Band b = band_at(k, j);
          row[kPlots[k].file] = {
              {"median", b.median}, {"min", b.min}, {"max", b.max}};
        }
        checkpoints.push_back(row);
      }
      summary["aggregate"] = {{"rows", rows}, {"checkpoints", checkpoints}};

      const std::vector<std::size_t> keep = LogSpacedIndices(rows);
      for (int k = 0; k < 4; ++k) {
        PlotSeries med{"median", {}, {}, "#1f77b4", false};
        PlotSeries lo{"min", {}, {}, "#7f7f7f", true};
        PlotSeries hi{"max", {}, {}, "#7f7f7f", true};
        for (const std::size_t j : keep) {
          const Band b = band_at(k, j);
          const double t = static_cast<double>(j + 1);
          med.x.push_back(t);
          med.y.push_back(b.median);
          lo.x.push_back(t);
          lo.y.push_back(b.min);
          hi.x.push_back(t);
          hi.y.push_back(b.max);
        }
        LogLogPlot plot{std::string(kPlots[k].title) + " (" +
                            std::to_string(seeds.size()) + " seeds)",
                        "t",
                        kPlots[k].y_label,
                        {med, lo, hi}};
        WriteText(dir / ("aggregate_" + std::string(kPlots[k].file) + ".svg"),
                  RenderSvg(plot));
        ++written;
      }
    }
    WriteJson(dir / "summary.json", summary);
    out << "wrote " << written << " SVG files and summary.json to "
        << dir.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace dpdescent::harness
