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

// Test objectives with exact and stochastic gradient oracles.
//
// Every objective carries the constants the convergence theory needs: the
// smoothness constant L, the strong-convexity constant mu (0 when the
// objective is not strongly convex), the infimum f_star, and, when the
// stochastic-gradient model admits one, a certified lower bound D on the
// directional alignment E<grad f, g/|g|> / |grad f|.

#ifndef DPDESCENT_PROBLEMS_H_
#define DPDESCENT_PROBLEMS_H_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpdescent/random.h"

namespace dpdescent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class NoiseKind {
  // g = (1 + b) grad f(x), b ~ U[-rho, rho].
  kMultiplicativeBounded,
  // g = grad f(x) + s u, u ~ N(0, I).
  kAdditiveGaussian,
  // g = mean of per-example gradients over a uniform batch, without
  // replacement. Requires a finite-sum objective.
  kMinibatch,
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::kMultiplicativeBounded;
  double rho = 0.5;
  double scale = 0.0;
  std::size_t batch_size = 1;

  static NoiseModel MultiplicativeBounded(double rho);
  static NoiseModel AdditiveGaussian(double scale);
  static NoiseModel Minibatch(std::size_t batch_size);

  std::string Describe() const;
};

// The deterministic part of an objective. Implementations are immutable and
// safe to share between threads.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;

  virtual int dim() const = 0;
  virtual double Value(const Vector& x) const = 0;
  virtual Vector Gradient(const Vector& x) const = 0;

  // Finite-sum objectives override both of these. `indices` must be sorted.
  virtual std::size_t num_examples() const { return 0; }
  virtual Vector BatchGradient(const Vector& x,
                               std::span<const std::size_t> indices) const;
};

class ObjectiveSpec {
 public:
  ObjectiveSpec(std::string name, std::shared_ptr<const SmoothFunction> fn,
                double smoothness, double strong_convexity, double f_star,
                std::optional<Vector> x_star, NoiseModel noise);

  const std::string& name() const { return name_; }
  int dim() const { return fn_->dim(); }
  double smoothness() const { return smoothness_; }
  double strong_convexity() const { return strong_convexity_; }
  double f_star() const { return f_star_; }
  const std::optional<Vector>& x_star() const { return x_star_; }
  const NoiseModel& noise() const { return noise_; }
  const SmoothFunction& function() const { return *fn_; }

  // Certified D of the directional-invariance assumption, or nullopt when
  // the noise model is not certified (additive Gaussian, minibatch).
  std::optional<double> directional_constant() const;

  // Same objective under a different stochastic-gradient model.
  ObjectiveSpec WithNoise(NoiseModel noise) const;

 private:
  std::string name_;
  std::shared_ptr<const SmoothFunction> fn_;
  double smoothness_;
  double strong_convexity_;
  double f_star_;
  std::optional<Vector> x_star_;
  NoiseModel noise_;
};

struct StochasticGradientSample {
  Vector g;
  // Identifies the realized randomness: stream key mixed with the stream
  // position at which the draw started.
  std::uint64_t draw_id = 0;
};

double EvalF(const ObjectiveSpec& problem, const Vector& x);
Vector EvalGrad(const ObjectiveSpec& problem, const Vector& x);

StochasticGradientSample SampleStochasticGrad(const ObjectiveSpec& problem,
                                              const Vector& x,
                                              RandomStream& stream);

// Same as above when the caller already holds grad f(x). The exact gradient
// is ignored by the minibatch model.
StochasticGradientSample SampleStochasticGrad(const ObjectiveSpec& problem,
                                              const Vector& x,
                                              const Vector& exact_grad,
                                              RandomStream& stream);

// f(x) = 1/2 sum_i lambda_i x_i^2 with min lambda = mu and max lambda = L;
// the interior eigenvalues are seeded-uniform in [mu, L].
ObjectiveSpec MakeQuadratic(int d, double mu, double L, std::uint64_t seed,
                            NoiseModel noise = {});

// f(x) = 1/2 sum_i lambda_i x_i^2 for explicit lambda_i > 0.
ObjectiveSpec MakeDiagonalQuadratic(const Vector& eigenvalues,
                                    NoiseModel noise = {});

// f(x) = sum_i x_i^2 / (1 + x_i^2). Nonconvex, f_star = 0, L = 2.
ObjectiveSpec MakeBoundedCell(int d, NoiseModel noise = {});

// Sup of |d^2/dx^2 [x^2 / (1 + x^2)]| over the real line.
inline constexpr double kBoundedCellSmoothness = 2.0;

// f(x) = (1/N) sum_i log(1 + exp(-y_i <a_i, x>)) + (l2 / 2) |x|^2 with the
// minibatch stochastic gradient. When l2 > 0 the minimizer is found by
// damped Newton iterations and f_star = f(x_star). When l2 = 0, f_star is
// the certified lower bound 0 and x_star is absent.
ObjectiveSpec MakeLogistic(const Matrix& features, const Vector& labels,
                           std::size_t batch_size, double l2);

struct LogisticData {
  Matrix features;  // N x d
  Vector labels;    // entries in {-1, +1}
};

// Header-free CSV: d feature columns followed by one label column.
LogisticData LoadLogisticCsv(const std::string& path);

// Two Gaussian clusters at +/- (separation / 2) e_1 with unit covariance,
// labels +1 / -1 with equal probability.
LogisticData SynthesizeLogisticData(std::size_t n, int d, double separation,
                                    std::uint64_t seed);

}  // namespace dpdescent

#endif  // DPDESCENT_PROBLEMS_H_
