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

#include "qstab/random.h"

#include <cmath>
#include <numbers>

namespace qstab {
namespace {

std::uint64_t Mix(std::uint64_t seed, std::uint64_t counter, std::uint64_t lane) {
  return SplitMix64(SplitMix64(seed ^ (0xA0761D6478BD642FULL * (lane + 1))) +
                    0x9E3779B97F4A7C15ULL * (counter + 1));
}

double ToUnitInterval(std::uint64_t bits) {
  // (0, 1]: never zero so log() stays finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t root, std::string_view stream,
                         std::initializer_list<std::uint64_t> indices) {
  // FNV-1a over the stream name, then fold in the indices.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : stream) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  std::uint64_t out = SplitMix64(root ^ SplitMix64(h));
  for (std::uint64_t index : indices) out = SplitMix64(out ^ SplitMix64(index));
  return out;
}

double NoiseStream::UniformAt(std::uint64_t index) const {
  return ToUnitInterval(Mix(seed_, index, 0));
}

double NoiseStream::StandardNormalAt(std::uint64_t index) const {
  const double u1 = ToUnitInterval(Mix(seed_, index, 1));
  const double u2 = ToUnitInterval(Mix(seed_, index, 2));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace qstab
