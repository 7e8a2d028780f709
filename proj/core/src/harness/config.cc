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

#include "dpdescent/harness/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dpdescent::harness {
namespace {

using nlohmann::json;

// Integers built in code are stored signed even when non-negative.
bool IsNonNegativeInteger(const json& v) {
  return v.is_number_unsigned() ||
         (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Reads members of one JSON object and rejects any member not read.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }

  const json* Find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string Where(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void Read(const char* key, double& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number()) throw ConfigError(Where(key) + " must be a number");
      out = v->get<double>();
      if (!std::isfinite(out))
        throw ConfigError(Where(key) + " must be finite");
    }
  }

  void Read(const char* key, std::optional<double>& out) {
    if (Find(key) != nullptr) {
      double v = 0.0;
      Read(key, v);
      out = v;
    }
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void Read(const char* key, Int& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_integer()) {
        throw ConfigError(Where(key) + " must be an integer");
      }
      if constexpr (std::is_unsigned_v<Int>) {
        if (IsNonNegativeInteger(*v)) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        throw ConfigError(Where(key) + " must be non-negative");
      } else {
        out = static_cast<Int>(v->get<std::int64_t>());
      }
    }
  }

  void Read(const char* key, bool& out) {
    if (const json* v = Find(key)) {
      if (!v->is_boolean())
        throw ConfigError(Where(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }

  void Read(const char* key, std::string& out) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) throw ConfigError(Where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void Read(const char* key, std::vector<double>& out) {
    if (const json* v = Find(key)) {
      if (!v->is_array()) throw ConfigError(Where(key) + " must be an array");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number()) {
          throw ConfigError(Where(key) + " must contain numbers only");
        }
        out.push_back(e.get<double>());
      }
    }
  }

  // Throws on members that were never looked up.
  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (seen_.count(key) == 0) {
        throw ConfigError("unknown key: " +
                          (path_.empty() ? key : path_ + "." + key));
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void Require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

template <typename F>
void Section(ObjectReader& parent, const char* key, F&& body) {
  if (const json* v = parent.Find(key)) {
    ObjectReader reader(*v, parent.Where(key));
    body(reader);
    reader.Finish();
  }
}

std::vector<std::uint64_t> ReadSeeds(const json& v) {
  std::vector<std::uint64_t> seeds;
  if (v.is_array()) {
    for (const json& e : v) {
      Require(IsNonNegativeInteger(e), "seeds must be non-negative integers");
      seeds.push_back(e.get<std::uint64_t>());
    }
  } else {
    ObjectReader r(v, "seeds");
    std::int64_t count = 0;
    std::uint64_t base = 0;
    r.Read("count", count);
    r.Read("base", base);
    r.Finish();
    Require(count >= 1, "seeds.count must be >= 1");
    for (std::int64_t i = 0; i < count; ++i) {
      seeds.push_back(base + static_cast<std::uint64_t>(i));
    }
  }
  Require(!seeds.empty(), "seeds must not be empty");
  Require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() ==
              seeds.size(),
          "seeds must be distinct");
  return seeds;
}

NoiseModel BuildNoise(const NoiseConfig& n) {
  if (n.kind == "multiplicative")
    return NoiseModel::MultiplicativeBounded(n.rho);
  if (n.kind == "additive") return NoiseModel::AdditiveGaussian(n.scale);
  return NoiseModel::Minibatch(n.batch_size);
}

void Validate(const ExperimentConfig& c) {
  Require(ParseAlgorithm(c.algorithm).has_value(),
          "algorithm must be dp-sgd, dp-shb or dp-nag");
  Require(
      c.nesterov_point == "look-ahead" || c.nesterov_point == "current-iterate",
      "nesterov_point must be look-ahead or current-iterate");
  Require(c.beta >= 0.0 && c.beta < 1.0, "beta must lie in [0, 1)");
  Require(c.horizon >= 1, "horizon must be >= 1");

  const ProblemConfig& p = c.problem;
  Require(
      p.name == "quadratic" || p.name == "boundedcell" || p.name == "logistic",
      "problem.name must be quadratic, boundedcell or logistic");
  Require(p.dim >= 1, "problem.dim must be >= 1");
  Require(p.noise.kind == "multiplicative" || p.noise.kind == "additive" ||
              p.noise.kind == "minibatch",
          "problem.noise.kind must be multiplicative, additive or minibatch");
  Require(p.noise.rho >= 0.0 && p.noise.rho < 1.0,
          "problem.noise.rho must lie in [0, 1)");
  Require(p.noise.scale >= 0.0, "problem.noise.scale must be >= 0");
  Require(p.noise.batch_size >= 1, "problem.noise.batch_size must be >= 1");
  Require(p.noise.kind != "minibatch" || p.name == "logistic",
          "minibatch noise requires the logistic problem");

  const PrivacyConfig& pr = c.privacy;
  Require(pr.epsilon > 0.0, "privacy.epsilon must be > 0");
  Require(pr.delta > 0.0 && pr.delta < 1.0, "privacy.delta must lie in (0, 1)");
  Require(pr.q > 0.0, "privacy.q must be > 0");
  Require(pr.safety >= 1.0, "privacy.safety must be >= 1");
  Require(!pr.sigma_dp_sq.has_value() || *pr.sigma_dp_sq >= 0.0,
          "privacy.sigma_dp_sq must be >= 0");

  const ScheduleConfig& s = c.schedule;
  if (s.mode == "polynomial-decay") {
    Require(s.a > 0.0, "schedule.a must be > 0");
    Require(s.theta > 0.0 && s.theta < 0.5,
            "schedule.theta must lie in (0, 1/2)");
  } else {
    Require(s.mode == "table",
            "schedule.mode must be polynomial-decay or table");
    Require(!s.table.empty(), "schedule.table must not be empty");
    for (const double a : s.table) {
      Require(a > 0.0, "schedule.table entries must be > 0");
    }
  }

  Require(c.x0.policy == "zero" || c.x0.policy == "seeded-gaussian",
          "x0.policy must be zero or seeded-gaussian");
  Require(c.x0.norm >= 0.0, "x0.norm must be >= 0");

  Require(c.diagnostics.every >= 0, "diagnostics.every must be >= 0");
  Require(c.diagnostics.eta_samples >= 1,
          "diagnostics.eta_samples must be >= 1");
  Require(c.diagnostics.d_samples >= 1, "diagnostics.d_samples must be >= 1");

  const VerificationConfig& v = c.verification;
  Require(v.samples >= 1000, "verification.samples must be >= 1000");
  Require(v.descent_states >= 1, "verification.descent_states must be >= 1");
  Require(v.supermartingale_states >= 1,
          "verification.supermartingale_states must be >= 1");
  Require(v.series_share > 0.0 && v.series_share < 1.0,
          "verification.series_share must lie in (0, 1)");

  Require(!c.last_iterate_report || pr.q >= 1.0,
          "last_iterate_report requires privacy.q >= 1");
  Require(!c.seeds.empty(), "seeds must not be empty");
}

}  // namespace

ExperimentConfig ParseConfig(const json& j) {
  ExperimentConfig c;
  try {
    ObjectReader r(j, "");
    r.Read("algorithm", c.algorithm);
    Section(r, "problem", [&](ObjectReader& p) {
      p.Read("name", c.problem.name);
      p.Read("dim", c.problem.dim);
      p.Read("mu", c.problem.mu);
      p.Read("L", c.problem.L);
      p.Read("fixture_seed", c.problem.fixture_seed);
      Section(p, "noise", [&](ObjectReader& n) {
        n.Read("kind", c.problem.noise.kind);
        n.Read("rho", c.problem.noise.rho);
        n.Read("scale", c.problem.noise.scale);
        n.Read("batch_size", c.problem.noise.batch_size);
      });
      p.Read("data_path", c.problem.data_path);
      p.Read("num_examples", c.problem.num_examples);
      p.Read("separation", c.problem.separation);
      p.Read("l2", c.problem.l2);
    });
    Section(r, "privacy", [&](ObjectReader& p) {
      p.Read("epsilon", c.privacy.epsilon);
      p.Read("delta", c.privacy.delta);
      p.Read("q", c.privacy.q);
      p.Read("safety", c.privacy.safety);
      p.Read("sigma_dp_sq", c.privacy.sigma_dp_sq);
      p.Read("unsafe", c.privacy.unsafe);
    });
    Section(r, "schedule", [&](ObjectReader& s) {
      s.Read("mode", c.schedule.mode);
      s.Read("a", c.schedule.a);
      s.Read("theta", c.schedule.theta);
      s.Read("table", c.schedule.table);
    });
    r.Read("beta", c.beta);
    r.Read("nesterov_point", c.nesterov_point);
    Section(r, "x0", [&](ObjectReader& x) {
      x.Read("policy", c.x0.policy);
      x.Read("norm", c.x0.norm);
    });
    r.Read("horizon", c.horizon);
    if (const json* s = r.Find("seeds")) c.seeds = ReadSeeds(*s);
    Section(r, "diagnostics", [&](ObjectReader& d) {
      d.Read("every", c.diagnostics.every);
      d.Read("eta_samples", c.diagnostics.eta_samples);
      d.Read("d_samples", c.diagnostics.d_samples);
    });
    Section(r, "verification", [&](ObjectReader& v) {
      v.Read("samples", c.verification.samples);
      v.Read("descent_states", c.verification.descent_states);
      v.Read("supermartingale_states", c.verification.supermartingale_states);
      v.Read("state_seed", c.verification.state_seed);
      v.Read("series_share", c.verification.series_share);
      v.Read("negative_controls", c.verification.negative_controls);
    });
    r.Read("last_iterate_report", c.last_iterate_report);
    r.Read("output_dir", c.output_dir);
    r.Finish();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.seeds.empty()) {
    for (std::uint64_t s = 0; s < 20; ++s) c.seeds.push_back(s);
  }
  Validate(c);
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  // A run manifest carries the resolved config under "config".
  if (j.is_object() && j.contains("config") && j.contains("library_version")) {
    return ParseConfig(j.at("config"));
  }
  return ParseConfig(j);
}

json ToJson(const ExperimentConfig& c) {
  json j;
  j["algorithm"] = c.algorithm;
  j["problem"] = {
      {"name", c.problem.name},
      {"dim", c.problem.dim},
      {"mu", c.problem.mu},
      {"L", c.problem.L},
      {"fixture_seed", c.problem.fixture_seed},
      {"noise",
       {{"kind", c.problem.noise.kind},
        {"rho", c.problem.noise.rho},
        {"scale", c.problem.noise.scale},
        {"batch_size", c.problem.noise.batch_size}}},
      {"data_path", c.problem.data_path},
      {"num_examples", c.problem.num_examples},
      {"separation", c.problem.separation},
      {"l2", c.problem.l2},
  };
  j["privacy"] = {
      {"epsilon", c.privacy.epsilon},
      {"delta", c.privacy.delta},
      {"q", c.privacy.q},
      {"safety", c.privacy.safety},
      {"unsafe", c.privacy.unsafe},
  };
  j["privacy"]["sigma_dp_sq"] =
      c.privacy.sigma_dp_sq ? json(*c.privacy.sigma_dp_sq) : json(nullptr);
  j["schedule"] = {{"mode", c.schedule.mode},
                   {"a", c.schedule.a},
                   {"theta", c.schedule.theta},
                   {"table", c.schedule.table}};
  j["beta"] = c.beta;
  j["nesterov_point"] = c.nesterov_point;
  j["x0"] = {{"policy", c.x0.policy}, {"norm", c.x0.norm}};
  j["horizon"] = c.horizon;
  j["seeds"] = c.seeds;
  j["diagnostics"] = {{"every", c.diagnostics.every},
                      {"eta_samples", c.diagnostics.eta_samples},
                      {"d_samples", c.diagnostics.d_samples}};
  j["verification"] = {
      {"samples", c.verification.samples},
      {"descent_states", c.verification.descent_states},
      {"supermartingale_states", c.verification.supermartingale_states},
      {"state_seed", c.verification.state_seed},
      {"series_share", c.verification.series_share},
      {"negative_controls", c.verification.negative_controls},
  };
  j["last_iterate_report"] = c.last_iterate_report;
  j["output_dir"] = c.output_dir;
  return j;
}

std::vector<std::uint64_t> ParseSeedList(const std::string& text) {
  auto parse_one = [&](const std::string& s) {
    Require(
        !s.empty() && s.find_first_not_of("0123456789") == std::string::npos,
        "invalid seed list: " + text);
    try {
      return static_cast<std::uint64_t>(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("invalid seed list: " + text);
    }
  };
  std::vector<std::uint64_t> seeds;
  const std::size_t dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = parse_one(text.substr(0, dots));
    const std::uint64_t hi = parse_one(text.substr(dots + 2));
    Require(lo <= hi, "invalid seed range: " + text);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) seeds.push_back(parse_one(item));
  Require(!seeds.empty(), "empty seed list");
  Require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() ==
              seeds.size(),
          "seeds must be distinct");
  return seeds;
}

Algorithm ResolveAlgorithm(const ExperimentConfig& config) {
  const std::optional<Algorithm> a = ParseAlgorithm(config.algorithm);
  Require(a.has_value(), "unknown algorithm: " + config.algorithm);
  return *a;
}

NesterovGradientPoint ResolveNesterovPoint(const ExperimentConfig& config) {
  return config.nesterov_point == "current-iterate"
             ? NesterovGradientPoint::kCurrentIterate
             : NesterovGradientPoint::kLookAhead;
}

ObjectiveSpec BuildProblem(const ExperimentConfig& config) {
  const ProblemConfig& p = config.problem;
  try {
    if (p.name == "quadratic") {
      return MakeQuadratic(p.dim, p.mu, p.L, p.fixture_seed,
                           BuildNoise(p.noise));
    }
    if (p.name == "boundedcell")
      return MakeBoundedCell(p.dim, BuildNoise(p.noise));
    const LogisticData data =
        p.data_path.empty()
            ? SynthesizeLogisticData(p.num_examples, p.dim, p.separation,
                                     p.fixture_seed)
            : LoadLogisticCsv(p.data_path);
    const std::size_t batch =
        p.noise.kind == "minibatch"
            ? p.noise.batch_size
            : static_cast<std::size_t>(data.labels.size());
    ObjectiveSpec spec = MakeLogistic(data.features, data.labels, batch, p.l2);
    return p.noise.kind == "minibatch" ? spec
                                       : spec.WithNoise(BuildNoise(p.noise));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

PrivacyParams BuildPrivacy(const ExperimentConfig& config) {
  const PrivacyConfig& p = config.privacy;
  const double sigma_sq = p.sigma_dp_sq.value_or(
      p.safety * CalibrationThreshold(p.epsilon, p.delta, p.q));
  if (!p.unsafe &&
      !(sigma_sq > CalibrationThreshold(p.epsilon, p.delta, p.q))) {
    throw CalibrationError(
        "sigma_dp_sq = " + std::to_string(sigma_sq) +
        " does not exceed the calibration threshold " +
        std::to_string(CalibrationThreshold(p.epsilon, p.delta, p.q)) +
        " (set privacy.unsafe or --unsafe-privacy to run anyway)");
  }
  try {
    return PrivacyParams::Create(p.epsilon, p.delta, p.q, sigma_sq, p.unsafe);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("privacy: ") + e.what());
  }
}

StepSchedule BuildSchedule(const ExperimentConfig& config) {
  const ScheduleConfig& s = config.schedule;
  try {
    return s.mode == "table" ? StepSchedule::Table(s.table)
                             : StepSchedule::PolynomialDecay(s.a, s.theta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

Vector BuildInitialPoint(const ExperimentConfig& config, int dim,
                         std::uint64_t seed) {
  if (config.x0.policy == "zero") return Vector::Zero(dim);
  return SeededGaussianPoint(dim, config.x0.norm, CounterRng(seed));
}

TrajectoryConfig BuildTrajectoryConfig(const ExperimentConfig& config,
                                       std::uint64_t seed) {
  TrajectoryConfig t;
  t.algorithm = ResolveAlgorithm(config);
  t.beta = config.beta;
  t.nesterov_point = ResolveNesterovPoint(config);
  t.horizon = config.horizon;
  t.seed = seed;
  t.diagnostics = config.diagnostics;
  return t;
}

}  // namespace dpdescent::harness
