//
// Copyright 2026 The mahadp Authors
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
//
#ifndef MAHADP_RNG_H_
#define MAHADP_RNG_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace mahadp {

// Identifies the generator, the sub-stream mixing function and the variate
// algorithms below. Bump whenever any of them changes the produced stream.
inline constexpr std::string_view kRngVersion =
    "xoshiro256**/splitmix64-streams/polar-normal/marsaglia-tsang-gamma v1";

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
uint64_t Mix64(uint64_t x);

// Folds a sequence of integers into one 64-bit stream key. Order matters:
// DeriveStreamKey({a, b}) != DeriveStreamKey({b, a}) in general.
//
//   h = 0x6a09e667f3bcc909
//   for v in values: h = Mix64(h ^ Mix64(v + 0x9e3779b97f4a7c15))
uint64_t DeriveStreamKey(std::initializer_list<uint64_t> values);

// xoshiro256** seeded through SplitMix64. Value type; copying forks the
// stream. Not thread-safe; give each worker its own instance.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Independent sub-stream identified by (seed, stream).
  static Rng ForStream(uint64_t seed, uint64_t stream) {
    return Rng(DeriveStreamKey({seed, stream}));
  }

  uint64_t NextU64();

  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double UniformOpen();

  // Standard normal via the Marsaglia polar method. The second variate of
  // each pair is cached in the generator state.
  double StandardNormal();

 private:
  std::array<uint64_t, 4> s_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Gamma(shape, scale) variate, mean shape * scale. Marsaglia-Tsang squeeze
// for shape >= 1; shape < 1 boosts through shape + 1 and a uniform power.
double SampleGamma(Rng& rng, double shape, double scale);

}  // namespace mahadp

#endif  // MAHADP_RNG_H_
