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

#include "dpdescent/random.h"

namespace dpdescent {
namespace {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t MixBits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RandomStream::result_type RandomStream::operator()() {
  ++counter_;
  return MixBits(key_ + counter_ * kGoldenGamma);
}

double RandomStream::Uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(*this);
}

double RandomStream::StandardNormal() { return normal_(*this); }

std::size_t RandomStream::Index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
}

RandomStream CounterRng::Stream(StreamPurpose purpose,
                                std::uint64_t index) const {
  std::uint64_t h = MixBits(seed_ ^ 0x6a09e667f3bcc909ULL);
  h = MixBits(h ^ (replicate_ + kGoldenGamma));
  h = MixBits(h ^ (static_cast<std::uint64_t>(purpose) * kGoldenGamma));
  h = MixBits(h ^ (index + 0x3c6ef372fe94f82bULL));
  return RandomStream(h);
}

}  // namespace dpdescent
