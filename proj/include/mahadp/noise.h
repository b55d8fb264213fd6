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
#ifndef MAHADP_NOISE_H_
#define MAHADP_NOISE_H_

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mahadp/geometry.h"
#include "mahadp/rng.h"

namespace mahadp {

// One draw Z = Y * A^{1/2} X together with the radius Y ~ Gamma(m, 1/epsilon)
// and the unit direction X that generated it. ‖Z‖_{M,lambda} == Y.
struct NoiseSample {
  Eigen::VectorXd z;
  double radius = 0.0;
  Eigen::VectorXd direction;
};

// Draws noise with density proportional to exp(-epsilon * ‖z‖_{M,lambda}):
//   N ~ N(0, I_m), X = N / ‖N‖_2, Y ~ Gamma(m, 1/epsilon), Z = Y A^{1/2} X.
// A zero N (probability zero) is redrawn. Throws UsageError if epsilon <= 0.
NoiseSample DrawNoise(const RegularizedMetric& metric, double epsilon, Rng& rng);

// Same draw and same generator consumption as DrawNoise, writing Z into `z`
// and using `scratch` (size m) for the direction. Returns Y.
double DrawNoiseInto(const RegularizedMetric& metric, double epsilon, Rng& rng,
                     Eigen::Ref<Eigen::VectorXd> z,
                     Eigen::Ref<Eigen::VectorXd> scratch);

// -epsilon * ‖z‖_{M,lambda}; the normalizing constant is omitted.
double LogUnnormalizedDensity(const RegularizedMetric& metric, double epsilon,
                              const Eigen::Ref<const Eigen::VectorXd>& z);

// Seeded sampler holding its own generator state. Copying forks the stream.
class NoiseSampler {
 public:
  NoiseSampler(std::shared_ptr<const RegularizedMetric> metric, double epsilon,
               uint64_t seed);
  NoiseSampler(std::shared_ptr<const RegularizedMetric> metric, double epsilon,
               Rng rng);

  NoiseSample Sample();

  // Identical to `count` successive Sample() calls. Throws UsageError if
  // count == 0.
  std::vector<NoiseSample> SampleBatch(size_t count);

  const RegularizedMetric& metric() const { return *metric_; }
  double epsilon() const { return epsilon_; }

 private:
  std::shared_ptr<const RegularizedMetric> metric_;
  double epsilon_;
  Rng rng_;
};

}  // namespace mahadp

#endif  // MAHADP_NOISE_H_
