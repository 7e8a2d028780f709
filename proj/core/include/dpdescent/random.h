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

#ifndef DPDESCENT_RANDOM_H_
#define DPDESCENT_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace dpdescent {

// Each kind of randomness gets its own family of streams, so that switching
// one source off (e.g. privacy noise in an ablation) leaves every other draw
// unchanged.
enum class StreamPurpose : std::uint64_t {
  kSampling = 1,      // stochastic-gradient randomness
  kPrivacyNoise = 2,  // Gaussian mechanism
  kDiagnostics = 3,   // Monte Carlo estimates of eta and D
  kInitialization = 4,
  kFixture = 5,  // problem construction (spectra, synthetic data)
};

// A counter-based stream: the n-th output is a pure function of (key, n).
// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  double Uniform(double lo, double hi);
  double StandardNormal();
  // Uniform over {0, ..., n - 1}.
  std::size_t Index(std::size_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_;
};

// Splittable generator identified by (experiment seed, replicate index).
// Streams are addressed by (purpose, index), where index is usually the
// iteration counter t or a Monte Carlo draw number.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t replicate = 0)
      : seed_(seed), replicate_(replicate) {}

  RandomStream Stream(StreamPurpose purpose, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replicate() const { return replicate_; }

 private:
  std::uint64_t seed_;
  std::uint64_t replicate_;
};

// SplitMix64 finalizer.
std::uint64_t MixBits(std::uint64_t z);

}  // namespace dpdescent

#endif  // DPDESCENT_RANDOM_H_
