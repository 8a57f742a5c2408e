// Copyright 2026 The qstab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSTAB_RANDOM_H_
#define QSTAB_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace qstab {

std::uint64_t SplitMix64(std::uint64_t x);

// Splits a root seed into an independent named stream, optionally indexed
// (e.g. per trajectory or per worker).
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view stream,
                         std::initializer_list<std::uint64_t> indices = {});

// Counter-based Gaussian source: the k-th variate is a pure function of
// (seed, k), so equal seeds give bit-identical sequences on every thread.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  // Standard normal variate at an absolute index; does not advance.
  double StandardNormalAt(std::uint64_t index) const;
  // Uniform variate in (0, 1] at an absolute index; does not advance.
  double UniformAt(std::uint64_t index) const;

  double NextStandardNormal() { return StandardNormalAt(counter_++); }
  double NextUniform() { return UniformAt(counter_++); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace qstab

#endif  // QSTAB_RANDOM_H_
