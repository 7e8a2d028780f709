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

#include "dpdescent/verification.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpdescent {
namespace {

// Running mean and variance (Welford).
class Accumulator {
 public:
  void Add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double standard_error() const {
    if (n_ < 2) return 0.0;
    const auto n = static_cast<double>(n_);
    return std::sqrt(m2_ / (n - 1.0) / n);
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

void CheckSamples(const MonteCarloOptions& options) {
  if (options.samples < 2) {
    throw std::invalid_argument("Monte Carlo checks need at least 2 samples");
  }
}

double CertifiedD(const ObjectiveSpec& problem) {
  const std::optional<double> d = problem.directional_constant();
  if (!d.has_value()) {
    throw std::invalid_argument(
        "check requires a noise model with a certified directional constant");
  }
  return *d;
}

// Whether the stochastic gradient drawn at step t under rng is clipped.
// Replays the sampling stream the optimizer step consumes.
bool DrawIsClipped(const ObjectiveSpec& problem, const Vector& x,
                   const Vector& grad, const CounterRng& rng, std::int64_t t,
                   double q) {
  RandomStream sampling =
      rng.Stream(StreamPurpose::kSampling, static_cast<std::uint64_t>(t));
  return SampleStochasticGrad(problem, x, grad, sampling).g.norm() > q;
}

// Per-draw Phi term: its mean over draws is Phi(G, eta_hat, D, q).
double PhiTerm(bool clipped, double grad_norm, double D, double q) {
  return clipped ? D * q * grad_norm : grad_norm * grad_norm;
}

CheckReport OneSidedReport(std::string name, const Accumulator& statistic,
                           double threshold, const Accumulator& difference,
                           const MonteCarloOptions& options) {
  CheckReport r;
  r.name = std::move(name);
  r.statistic = statistic.mean();
  r.threshold = threshold + options.threshold_shift;
  r.standard_error = difference.standard_error();
  r.passed = OneSidedPass(r.statistic, r.threshold, r.standard_error);
  r.n_samples = statistic.count();
  r.seed = options.seed;
  r.one_sided = true;
  r.negative_control = options.negative_control;
  return r;
}

std::int64_t TraceHorizon(std::span<const TraceRecord> trace) {
  return static_cast<std::int64_t>(trace.size());
}

}  // namespace

bool OneSidedPass(double statistic, double threshold, double standard_error) {
  const double slack = kStandardErrorMargin * standard_error +
                       kRoundingSlack * std::max(1.0, std::abs(threshold));
  return statistic <= threshold + slack;
}

std::vector<Vector> OraclePlainSgd(const ObjectiveSpec& problem,
                                   const StepSchedule& schedule,
                                   const Vector& x0, std::int64_t T,
                                   std::uint64_t seed) {
  if (T < 0) throw std::invalid_argument("oracle: T must be >= 0");
  if (x0.size() != problem.dim()) {
    throw std::invalid_argument("oracle: x0 has the wrong dimension");
  }
  std::vector<Vector> path;
  path.reserve(static_cast<std::size_t>(T) + 1);
  path.push_back(x0);
  const CounterRng rng(seed);
  for (std::int64_t t = 1; t <= T; ++t) {
    const Vector& x = path.back();
    RandomStream stream =
        rng.Stream(StreamPurpose::kSampling, static_cast<std::uint64_t>(t));
    const Vector g = SampleStochasticGrad(problem, x, stream).g;
    const double alpha = schedule(t);
    Vector next(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) next(i) = x(i) - alpha * g(i);
    path.push_back(std::move(next));
  }
  return path;
}

std::vector<CheckReport> CheckClipLaws(std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("clip laws: n must be >= 1");
  double norm_err = 0.0;
  double idem_err = 0.0;
  double par_err = 0.0;
  double lip_err = 0.0;
  const CounterRng rng(seed);
  for (std::int64_t i = 0; i < n; ++i) {
    RandomStream s =
        rng.Stream(StreamPurpose::kFixture, static_cast<std::uint64_t>(i));
    const int d = 1 + static_cast<int>(s.Index(20));
    const double scale = std::pow(10.0, s.Uniform(-3.0, 3.0));
    const double q = std::pow(10.0, s.Uniform(-3.0, 3.0));
    Vector v(d);
    Vector w(d);
    for (int j = 0; j < d; ++j) v(j) = scale * s.StandardNormal();
    for (int j = 0; j < d; ++j) w(j) = scale * s.StandardNormal();

    const Vector cv = Clip(v, q);
    const Vector cw = Clip(w, q);
    const double nv = v.norm();
    const double target = std::min(nv, q);
    if (target > 0.0) {
      norm_err = std::max(norm_err, std::abs(cv.norm() - target) / target);
    }
    const double ncv = cv.norm();
    if (ncv > 0.0) {
      idem_err = std::max(idem_err, (Clip(cv, q) - cv).norm() / ncv);
      const Vector along = (cv.dot(v) / (nv * nv)) * v;
      double err = (cv - along).norm() / ncv;
      if (cv.dot(v) <= 0.0) err = std::numeric_limits<double>::infinity();
      par_err = std::max(par_err, err);
    }
    const double dist = (v - w).norm();
    if (dist > 0.0) {
      lip_err = std::max(lip_err, ((cv - cw).norm() - dist) / dist);
    }
  }
  std::vector<CheckReport> reports;
  for (const auto& [name, value] :
       {std::pair<const char*, double>{"clip_norm", norm_err},
        {"clip_idempotence", idem_err},
        {"clip_parallelism", par_err},
        {"clip_nonexpansive", lip_err}}) {
    CheckReport r;
    r.name = name;
    r.statistic = value;
    r.threshold = kClipLawTolerance;
    r.one_sided = false;
    r.passed = std::abs(value) <= kClipLawTolerance;
    r.n_samples = n;
    r.seed = seed;
    reports.push_back(r);
  }
  return reports;
}

std::vector<Vector> SampleStates(int d, int count, std::uint64_t seed) {
  if (d < 1 || count < 0) throw std::invalid_argument("SampleStates: bad size");
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(count));
  const CounterRng rng(seed);
  for (int k = 0; k < count; ++k) {
    RandomStream s =
        rng.Stream(StreamPurpose::kFixture, static_cast<std::uint64_t>(k));
    Vector x(d);
    for (int i = 0; i < d; ++i) x(i) = s.StandardNormal();
    states.push_back(std::move(x));
  }
  return states;
}

std::vector<MomentumState> SampleMomentumStates(int d, int count, double beta,
                                                MomentumKind kind,
                                                double velocity_scale,
                                                std::uint64_t seed) {
  if (!(velocity_scale >= 0.0)) {
    throw std::invalid_argument("velocity_scale must be >= 0");
  }
  const std::vector<Vector> xs = SampleStates(d, count, seed);
  const std::vector<Vector> vs = SampleStates(d, count, MixBits(seed + 1));
  std::vector<MomentumState> states;
  states.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    MomentumState s = MomentumState::Start(xs[k], beta, kind);
    s.x_prev = xs[k] + velocity_scale * vs[k];
    s.t = static_cast<std::int64_t>(k) + 1;
    states.push_back(std::move(s));
  }
  return states;
}

CheckReport CheckSecondMoment(const ObjectiveSpec& problem, const Vector& x,
                              const PrivacyParams& params,
                              const MonteCarloOptions& options) {
  CheckSamples(options);
  Accumulator stat;
  for (std::int64_t i = 0; i < options.samples; ++i) {
    const CounterRng rng(options.seed, static_cast<std::uint64_t>(i));
    stat.Add(PrivateGradientAt(problem, params, rng, 1, x).squaredNorm());
  }
  const double bound = SecondMomentBound(params.clip_threshold(), problem.dim(),
                                         params.sigma_dp_sq());
  return OneSidedReport("second_moment", stat, bound, stat, options);
}

CheckReport CheckDescentInequality(const ObjectiveSpec& problem,
                                   const Vector& x, const PrivacyParams& params,
                                   const MonteCarloOptions& options) {
  CheckSamples(options);
  const double D = CertifiedD(problem);
  const Vector grad = EvalGrad(problem, x);
  const double G = grad.norm();
  if (G == 0.0) throw std::invalid_argument("descent check: grad f(x) = 0");
  const double q = params.clip_threshold();

  Accumulator stat;
  Accumulator phi;
  Accumulator diff;
  for (std::int64_t i = 0; i < options.samples; ++i) {
    const CounterRng rng(options.seed, static_cast<std::uint64_t>(i));
    const double s = -grad.dot(PrivateGradientAt(problem, params, rng, 1, x));
    const double p =
        PhiTerm(DrawIsClipped(problem, x, grad, rng, 1, q), G, D, q);
    stat.Add(s);
    phi.Add(p);
    diff.Add(s + p);
  }
  return OneSidedReport("descent_inequality", stat, -phi.mean(), diff, options);
}

CheckReport CheckSgdSupermartingale(const ObjectiveSpec& problem,
                                    const Vector& x,
                                    const PrivacyParams& params,
                                    const StepSchedule& schedule,
                                    std::int64_t t,
                                    const MonteCarloOptions& options) {
  CheckSamples(options);
  const double D = CertifiedD(problem);
  const Vector grad = EvalGrad(problem, x);
  const double G = grad.norm();
  const double q = params.clip_threshold();
  const double alpha = schedule(t);
  const double gap = EvalF(problem, x) - problem.f_star();
  const double curvature =
      0.5 * problem.smoothness() * alpha * alpha *
      SecondMomentBound(q, problem.dim(), params.sigma_dp_sq());

  Accumulator stat;
  Accumulator phi;
  Accumulator diff;
  for (std::int64_t i = 0; i < options.samples; ++i) {
    const CounterRng rng(options.seed, static_cast<std::uint64_t>(i));
    const SgdState next =
        DpSgdStep(SgdState{x, t}, problem, params, schedule, rng);
    const double s = EvalF(problem, next.x) - problem.f_star();
    const double p =
        PhiTerm(DrawIsClipped(problem, x, grad, rng, t, q), G, D, q);
    stat.Add(s);
    phi.Add(p);
    diff.Add(s + alpha * p);
  }
  const double threshold = gap - alpha * phi.mean() + curvature;
  return OneSidedReport("sgd_supermartingale", stat, threshold, diff, options);
}

MonteCarloEstimate EnergyResidual(const ObjectiveSpec& problem,
                                  const MomentumState& state,
                                  const PrivacyParams& params, double alpha,
                                  const MonteCarloOptions& options) {
  CheckSamples(options);
  if (state.kind != MomentumKind::kHeavyBall) {
    throw std::invalid_argument("energy residual: heavy-ball state required");
  }
  const double D = CertifiedD(problem);
  const double c = DefaultEnergyConstant(state.beta).c;
  const StepSchedule schedule = StepSchedule::Constant(alpha);
  const Vector grad = EvalGrad(problem, state.x);
  const double G = grad.norm();
  const double q = params.clip_threshold();
  const double y_now = Energy(problem, state, c);
  const double weight = alpha / (1.0 - state.beta);

  Accumulator acc;
  for (std::int64_t i = 0; i < options.samples; ++i) {
    const CounterRng rng(options.seed, static_cast<std::uint64_t>(i));
    const MomentumState next = DpShbStep(state, problem, params, schedule, rng);
    const bool clipped = DrawIsClipped(problem, state.x, grad, rng, state.t, q);
    acc.Add(Energy(problem, next, c) - y_now +
            weight * PhiTerm(clipped, G, D, q));
  }
  MonteCarloEstimate est;
  est.value = acc.mean();
  est.standard_error = acc.standard_error();
  est.samples = acc.count();
  return est;
}

double FitEnergyCoefficient(const ObjectiveSpec& problem,
                            std::span<const MomentumState> states,
                            std::span<const double> alphas,
                            const PrivacyParams& params,
                            const MonteCarloOptions& options) {
  if (states.empty() || alphas.empty()) {
    throw std::invalid_argument("energy fit: empty pilot grid");
  }
  double worst = 0.0;
  for (const MomentumState& s : states) {
    for (const double alpha : alphas) {
      const double r = EnergyResidual(problem, s, params, alpha, options).value;
      worst = std::max(worst, r / (alpha * alpha));
    }
  }
  return 2.0 * worst;
}

SlopeFit FitEnergySlope(const ObjectiveSpec& problem,
                        const MomentumState& state,
                        std::span<const double> alphas,
                        const PrivacyParams& params,
                        const MonteCarloOptions& options) {
  if (alphas.size() < 2)
    throw std::invalid_argument("slope fit: need >= 2 alphas");
  SlopeFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const double alpha : alphas) {
    if (!(alpha > 0.0)) throw std::invalid_argument("slope fit: alpha <= 0");
    const double r =
        EnergyResidual(problem, state, params, alpha, options).value;
    if (r == 0.0) throw std::runtime_error("slope fit: zero residual");
    fit.alphas.push_back(alpha);
    fit.residuals.push_back(r);
    const double lx = std::log(alpha);
    const double ly = std::log(std::abs(r));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const auto n = static_cast<double>(alphas.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("slope fit: alphas coincide");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

CheckReport CheckShbEnergyDecrease(const ObjectiveSpec& problem,
                                   const MomentumState& state,
                                   const PrivacyParams& params,
                                   const StepSchedule& schedule,
                                   double coefficient,
                                   const MonteCarloOptions& options) {
  if (!(coefficient >= 0.0)) {
    throw std::invalid_argument("energy check: coefficient must be >= 0");
  }
  const double alpha = schedule(state.t);
  const MonteCarloEstimate est =
      EnergyResidual(problem, state, params, alpha, options);
  CheckReport r;
  r.name = "shb_energy_decrease";
  r.statistic = est.value;
  r.threshold = coefficient * alpha * alpha + options.threshold_shift;
  r.standard_error = est.standard_error;
  r.passed = OneSidedPass(r.statistic, r.threshold, r.standard_error);
  r.n_samples = est.samples;
  r.seed = options.seed;
  r.negative_control = options.negative_control;
  return r;
}

double LastDecadeShare(std::span<const double> terms) {
  const auto T = static_cast<std::int64_t>(terms.size());
  double total = 0.0;
  double tail = 0.0;
  for (std::int64_t t = 1; t <= T; ++t) {
    const double v = terms[static_cast<std::size_t>(t - 1)];
    total += v;
    if (t > T / 10) tail += v;
  }
  if (total == 0.0) return 0.0;
  return tail / total;
}

CheckReport CheckSeriesConvergence(std::span<const TraceRecord> trace,
                                   double clip_threshold, double max_share,
                                   std::int64_t min_horizon) {
  const std::int64_t T = TraceHorizon(trace);
  if (T < min_horizon) {
    throw std::invalid_argument(
        "series check: trace too short (T = " + std::to_string(T) + " < " +
        std::to_string(min_horizon) + ")");
  }
  if (!(clip_threshold > 0.0)) {
    throw std::invalid_argument("series check: q must be positive");
  }
  std::vector<double> phi_terms;
  std::vector<double> z_terms;
  phi_terms.reserve(trace.size());
  const bool momentum = trace.front().momentum_grad_norm.has_value();
  for (const TraceRecord& row : trace) {
    phi_terms.push_back(row.alpha_t * row.phi_hat);
    if (momentum) {
      const double m = row.momentum_grad_norm.value_or(
          std::numeric_limits<double>::quiet_NaN());
      z_terms.push_back(row.alpha_t * std::min(m * m, clip_threshold * m));
    }
  }
  double share = LastDecadeShare(phi_terms);
  if (momentum) {
    const double z_share = LastDecadeShare(z_terms);
    share = std::isnan(z_share) ? z_share : std::max(share, z_share);
  }

  CheckReport r;
  r.name = "series_convergence";
  r.statistic = share;
  r.threshold = max_share;
  r.one_sided = false;
  r.passed = std::abs(share) <= max_share;
  r.n_samples = T;
  return r;
}

double TailMeanGradNorm(std::span<const TraceRecord> trace, std::int64_t H) {
  if (H < 1 || H > TraceHorizon(trace)) {
    throw std::invalid_argument("tail mean: horizon outside the trace");
  }
  const std::int64_t width = std::max<std::int64_t>(1, H / 100);
  double sum = 0.0;
  for (std::int64_t t = H - width + 1; t <= H; ++t) {
    sum += trace[static_cast<std::size_t>(t - 1)].grad_norm;
  }
  return sum / static_cast<double>(width);
}

CheckReport CheckLastIterate(std::span<const std::vector<TraceRecord>> traces,
                             Algorithm algorithm, double clip_threshold,
                             bool negative_control) {
  if (traces.size() < kMinLastIterateSeeds) {
    throw std::invalid_argument("last-iterate check: needs >= 20 seeds");
  }
  if (!IsMomentum(algorithm)) {
    throw std::invalid_argument("last-iterate check: momentum algorithm only");
  }
  if (!(clip_threshold >= 1.0)) {
    throw std::invalid_argument("last-iterate check: requires q >= 1");
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const std::vector<TraceRecord>& trace : traces) {
    const std::int64_t T = TraceHorizon(trace);
    if (T < kMinSeriesHorizon) {
      throw std::invalid_argument("last-iterate check: needs T >= 1e4");
    }
    const double early = TailMeanGradNorm(trace, T / 100);
    const double late = TailMeanGradNorm(trace, T);
    const double ratio = early > 0.0  ? late / early
                         : late > 0.0 ? std::numeric_limits<double>::infinity()
                                      : 0.0;
    // A NaN ratio (aborted run) must fail the check.
    worst = std::isnan(ratio) ? ratio : std::max(worst, ratio);
    if (std::isnan(worst)) break;
  }
  CheckReport r;
  r.name = "last_iterate";
  r.statistic = worst;
  r.threshold = 1.0;
  r.one_sided = false;
  r.passed = worst < 1.0;
  r.n_samples = static_cast<std::int64_t>(traces.size());
  r.negative_control = negative_control;
  return r;
}

}  // namespace dpdescent
