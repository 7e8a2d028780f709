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

#include "dpdescent/problems.h"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace dpdescent {
namespace {

void CheckDim(const ObjectiveSpec& problem, const Vector& x) {
  if (x.size() != problem.dim()) {
    std::ostringstream msg;
    msg << problem.name() << ": expected a vector of length " << problem.dim()
        << ", got " << x.size();
    throw std::invalid_argument(msg.str());
  }
}

class DiagonalQuadratic final : public SmoothFunction {
 public:
  explicit DiagonalQuadratic(Vector eigenvalues)
      : eigenvalues_(std::move(eigenvalues)) {}

  int dim() const override { return static_cast<int>(eigenvalues_.size()); }

  double Value(const Vector& x) const override {
    return 0.5 * (eigenvalues_.array() * x.array().square()).sum();
  }

  Vector Gradient(const Vector& x) const override {
    return eigenvalues_.cwiseProduct(x);
  }

 private:
  Vector eigenvalues_;
};

class BoundedCell final : public SmoothFunction {
 public:
  explicit BoundedCell(int d) : d_(d) {}

  int dim() const override { return d_; }

  double Value(const Vector& x) const override {
    const Eigen::ArrayXd sq = x.array().square();
    return (sq / (1.0 + sq)).sum();
  }

  Vector Gradient(const Vector& x) const override {
    const Eigen::ArrayXd denom = (1.0 + x.array().square()).square();
    return (2.0 * x.array() / denom).matrix();
  }

 private:
  int d_;
};

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

class Logistic final : public SmoothFunction {
 public:
  Logistic(Matrix features, Vector labels, double l2)
      : features_(std::move(features)), labels_(std::move(labels)), l2_(l2) {
    all_.resize(labels_.size());
    std::iota(all_.begin(), all_.end(), std::size_t{0});
  }

  int dim() const override { return static_cast<int>(features_.cols()); }
  std::size_t num_examples() const override { return all_.size(); }

  double Value(const Vector& x) const override {
    const Vector margins = features_ * x;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      loss += Softplus(-labels_(i) * margins(i));
    }
    return loss / static_cast<double>(all_.size()) +
           0.5 * l2_ * x.squaredNorm();
  }

  Vector Gradient(const Vector& x) const override {
    return BatchGradient(x, all_);
  }

  Vector BatchGradient(const Vector& x,
                       std::span<const std::size_t> indices) const override {
    Vector g = Vector::Zero(x.size());
    for (const std::size_t i : indices) {
      const auto row = features_.row(static_cast<Eigen::Index>(i));
      const double y = labels_(static_cast<Eigen::Index>(i));
      const double weight = -y * Sigmoid(-y * row.dot(x));
      g += weight * row.transpose();
    }
    g /= static_cast<double>(indices.size());
    g += l2_ * x;
    return g;
  }

  Matrix Hessian(const Vector& x) const {
    const Vector margins = features_ * x;
    Vector w(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double s = Sigmoid(margins(i));
      w(i) = s * (1.0 - s);
    }
    Matrix h = features_.transpose() * w.asDiagonal() * features_;
    h /= static_cast<double>(all_.size());
    h.diagonal().array() += l2_;
    return h;
  }

  const Matrix& features() const { return features_; }

 private:
  Matrix features_;
  Vector labels_;
  double l2_;
  std::vector<std::size_t> all_;
};

// Damped Newton on a strongly convex logistic objective.
Vector NewtonMinimize(const Logistic& fn) {
  Vector x = Vector::Zero(fn.dim());
  for (int iter = 0; iter < 100; ++iter) {
    const Vector g = fn.Gradient(x);
    if (g.norm() <= 1e-13) break;
    const Vector step = fn.Hessian(x).ldlt().solve(g);
    const double f0 = fn.Value(x);
    const double slope = g.dot(step);
    double t = 1.0;
    Vector candidate = x - step;
    while (fn.Value(candidate) > f0 - 1e-4 * t * slope && t > 1e-10) {
      t *= 0.5;
      candidate = x - t * step;
    }
    if (candidate == x) break;
    x = candidate;
  }
  return x;
}

void ValidateNoise(const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseKind::kMultiplicativeBounded:
      if (!(noise.rho >= 0.0 && noise.rho < 1.0)) {
        throw std::invalid_argument(
            "multiplicative noise requires rho in [0, 1)");
      }
      break;
    case NoiseKind::kAdditiveGaussian:
      if (!(noise.scale >= 0.0) || !std::isfinite(noise.scale)) {
        throw std::invalid_argument("additive noise requires scale >= 0");
      }
      break;
    case NoiseKind::kMinibatch:
      if (noise.batch_size < 1) {
        throw std::invalid_argument("minibatch size must be positive");
      }
      break;
  }
}

}  // namespace

NoiseModel NoiseModel::MultiplicativeBounded(double rho) {
  NoiseModel m;
  m.kind = NoiseKind::kMultiplicativeBounded;
  m.rho = rho;
  return m;
}

NoiseModel NoiseModel::AdditiveGaussian(double scale) {
  NoiseModel m;
  m.kind = NoiseKind::kAdditiveGaussian;
  m.rho = 0.0;
  m.scale = scale;
  return m;
}

NoiseModel NoiseModel::Minibatch(std::size_t batch_size) {
  NoiseModel m;
  m.kind = NoiseKind::kMinibatch;
  m.rho = 0.0;
  m.batch_size = batch_size;
  return m;
}

std::string NoiseModel::Describe() const {
  std::ostringstream out;
  switch (kind) {
    case NoiseKind::kMultiplicativeBounded:
      out << "multiplicative-bounded(" << rho << ")";
      break;
    case NoiseKind::kAdditiveGaussian:
      out << "additive-gaussian(" << scale << ")";
      break;
    case NoiseKind::kMinibatch:
      out << "minibatch(" << batch_size << ")";
      break;
  }
  return out.str();
}

Vector SmoothFunction::BatchGradient(const Vector&,
                                     std::span<const std::size_t>) const {
  throw std::logic_error("objective is not a finite sum");
}

ObjectiveSpec::ObjectiveSpec(std::string name,
                             std::shared_ptr<const SmoothFunction> fn,
                             double smoothness, double strong_convexity,
                             double f_star, std::optional<Vector> x_star,
                             NoiseModel noise)
    : name_(std::move(name)),
      fn_(std::move(fn)),
      smoothness_(smoothness),
      strong_convexity_(strong_convexity),
      f_star_(f_star),
      x_star_(std::move(x_star)),
      noise_(noise) {
  if (fn_ == nullptr) throw std::invalid_argument("objective has no function");
  if (fn_->dim() < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(smoothness_ > 0.0)) throw std::invalid_argument("L must be positive");
  if (!(strong_convexity_ >= 0.0)) {
    throw std::invalid_argument("mu must be nonnegative");
  }
  if (strong_convexity_ > smoothness_) {
    throw std::invalid_argument("mu must not exceed L");
  }
  ValidateNoise(noise_);
  if (noise_.kind == NoiseKind::kMinibatch &&
      (fn_->num_examples() == 0 || noise_.batch_size > fn_->num_examples())) {
    throw std::invalid_argument(
        "minibatch noise needs a finite-sum objective with batch <= N");
  }
  if (x_star_.has_value()) {
    if (x_star_->size() != fn_->dim()) {
      throw std::invalid_argument("x_star has the wrong dimension");
    }
    if (std::abs(fn_->Value(*x_star_) - f_star_) > 1e-12 ||
        fn_->Gradient(*x_star_).norm() > 1e-10) {
      throw std::invalid_argument(name_ +
                                  ": x_star is not a certified minimizer");
    }
  }
}

std::optional<double> ObjectiveSpec::directional_constant() const {
  // With rho < 1 every draw is a positive multiple of grad f.
  if (noise_.kind == NoiseKind::kMultiplicativeBounded) return 1.0;
  return std::nullopt;
}

ObjectiveSpec ObjectiveSpec::WithNoise(NoiseModel noise) const {
  return ObjectiveSpec(name_, fn_, smoothness_, strong_convexity_, f_star_,
                       x_star_, noise);
}

double EvalF(const ObjectiveSpec& problem, const Vector& x) {
  CheckDim(problem, x);
  return problem.function().Value(x);
}

Vector EvalGrad(const ObjectiveSpec& problem, const Vector& x) {
  CheckDim(problem, x);
  return problem.function().Gradient(x);
}

StochasticGradientSample SampleStochasticGrad(const ObjectiveSpec& problem,
                                              const Vector& x,
                                              RandomStream& stream) {
  CheckDim(problem, x);
  if (problem.noise().kind == NoiseKind::kMinibatch) {
    return SampleStochasticGrad(problem, x, Vector(), stream);
  }
  return SampleStochasticGrad(problem, x, problem.function().Gradient(x),
                              stream);
}

StochasticGradientSample SampleStochasticGrad(const ObjectiveSpec& problem,
                                              const Vector& x,
                                              const Vector& exact_grad,
                                              RandomStream& stream) {
  CheckDim(problem, x);
  StochasticGradientSample sample;
  sample.draw_id = MixBits(stream.key() ^ stream.position());
  const NoiseModel& noise = problem.noise();
  switch (noise.kind) {
    case NoiseKind::kMultiplicativeBounded: {
      const double b = stream.Uniform(-noise.rho, noise.rho);
      sample.g = (1.0 + b) * exact_grad;
      break;
    }
    case NoiseKind::kAdditiveGaussian: {
      sample.g = exact_grad;
      for (Eigen::Index i = 0; i < sample.g.size(); ++i) {
        sample.g(i) += noise.scale * stream.StandardNormal();
      }
      break;
    }
    case NoiseKind::kMinibatch: {
      const std::size_t n = problem.function().num_examples();
      const std::size_t b = noise.batch_size;
      std::vector<std::size_t> batch;
      if (b == n) {
        batch.resize(n);
        std::iota(batch.begin(), batch.end(), std::size_t{0});
      } else {
        // Floyd's sampling without replacement; std::set keeps it sorted.
        std::set<std::size_t> chosen;
        for (std::size_t j = n - b; j < n; ++j) {
          const std::size_t pick = stream.Index(j + 1);
          if (!chosen.insert(pick).second) chosen.insert(j);
        }
        batch.assign(chosen.begin(), chosen.end());
      }
      sample.g = problem.function().BatchGradient(x, batch);
      break;
    }
  }
  return sample;
}

ObjectiveSpec MakeQuadratic(int d, double mu, double L, std::uint64_t seed,
                            NoiseModel noise) {
  if (d < 1) throw std::invalid_argument("quadratic: d must be >= 1");
  if (!(mu > 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("quadratic: mu and L must be positive");
  }
  if (mu > L) throw std::invalid_argument("quadratic: mu > L");
  if (d == 1 && mu != L) {
    throw std::invalid_argument(
        "quadratic: a 1-D spectrum cannot have distinct extremes mu < L");
  }
  Vector lambda(d);
  lambda(0) = mu;
  lambda(d - 1) = L;
  RandomStream stream = CounterRng(seed).Stream(StreamPurpose::kFixture, 0);
  for (int i = 1; i < d - 1; ++i) lambda(i) = stream.Uniform(mu, L);
  std::sort(lambda.begin(), lambda.end());
  return MakeDiagonalQuadratic(lambda, noise);
}

ObjectiveSpec MakeDiagonalQuadratic(const Vector& eigenvalues,
                                    NoiseModel noise) {
  if (eigenvalues.size() < 1) {
    throw std::invalid_argument("quadratic: d must be >= 1");
  }
  if (!(eigenvalues.minCoeff() > 0.0) || !eigenvalues.allFinite()) {
    throw std::invalid_argument("quadratic: eigenvalues must be positive");
  }
  const int d = static_cast<int>(eigenvalues.size());
  return ObjectiveSpec("quadratic",
                       std::make_shared<DiagonalQuadratic>(eigenvalues),
                       eigenvalues.maxCoeff(), eigenvalues.minCoeff(), 0.0,
                       Vector::Zero(d), noise);
}

ObjectiveSpec MakeBoundedCell(int d, NoiseModel noise) {
  if (d < 1) throw std::invalid_argument("boundedcell: d must be >= 1");
  return ObjectiveSpec("boundedcell", std::make_shared<BoundedCell>(d),
                       kBoundedCellSmoothness, 0.0, 0.0, Vector::Zero(d),
                       noise);
}

ObjectiveSpec MakeLogistic(const Matrix& features, const Vector& labels,
                           std::size_t batch_size, double l2) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0 || features.cols() == 0) {
    throw std::invalid_argument("logistic: empty feature matrix");
  }
  if (static_cast<std::size_t>(labels.size()) != n) {
    throw std::invalid_argument("logistic: one label per row required");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw std::invalid_argument("logistic: labels must be -1 or +1");
    }
  }
  if (batch_size < 1 || batch_size > n) {
    throw std::invalid_argument("logistic: batch_size must be in [1, N]");
  }
  if (!(l2 >= 0.0)) throw std::invalid_argument("logistic: l2 must be >= 0");

  auto fn = std::make_shared<Logistic>(features, labels, l2);
  const Matrix gram = features.transpose() * features;
  const double op_norm_sq =
      Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  const double L = op_norm_sq / (4.0 * static_cast<double>(n)) + l2;

  std::optional<Vector> x_star;
  double f_star = 0.0;
  if (l2 > 0.0) {
    Vector minimizer = NewtonMinimize(*fn);
    f_star = fn->Value(minimizer);
    x_star = std::move(minimizer);
  }
  return ObjectiveSpec("logistic", fn, L, l2, f_star, std::move(x_star),
                       NoiseModel::Minibatch(batch_size));
}

LogisticData LoadLogisticCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ": non-numeric field '" + field +
                                    "'");
      }
    }
    if (row.size() < 2) {
      throw std::invalid_argument(path + ": need >= 1 feature and a label");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument(path + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  LogisticData data{Matrix(n, d), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
    data.labels(i) = rows[i][d];
  }
  return data;
}

LogisticData SynthesizeLogisticData(std::size_t n, int d, double separation,
                                    std::uint64_t seed) {
  if (n == 0 || d < 1) {
    throw std::invalid_argument("synthetic logistic: need n >= 1, d >= 1");
  }
  RandomStream stream = CounterRng(seed).Stream(StreamPurpose::kFixture, 1);
  LogisticData data{Matrix(static_cast<Eigen::Index>(n), d),
                    Vector(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    const double y = stream.Uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    data.labels(i) = y;
    for (int j = 0; j < d; ++j) {
      data.features(i, j) = stream.StandardNormal();
    }
    data.features(i, 0) += 0.5 * separation * y;
  }
  return data;
}

}  // namespace dpdescent
