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
#include "mahadp/noise.h"

#include <cmath>
#include <string>

#include "mahadp/error.h"

namespace mahadp {
namespace {

void CheckEpsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw UsageError("epsilon must be positive and finite, got " +
                     std::to_string(epsilon));
  }
}

}  // namespace

double DrawNoiseInto(const RegularizedMetric& metric, double epsilon, Rng& rng,
                     Eigen::Ref<Eigen::VectorXd> z,
                     Eigen::Ref<Eigen::VectorXd> scratch) {
  const Eigen::Index m = metric.dim();
  double norm = 0.0;
  do {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      scratch[i] = rng.StandardNormal();
      sq += scratch[i] * scratch[i];
    }
    norm = std::sqrt(sq);
  } while (norm == 0.0);
  scratch /= norm;
  const double radius = SampleGamma(rng, static_cast<double>(m), 1.0 / epsilon);
  if (metric.is_identity()) {
    z = scratch * radius;
  } else {
    z.noalias() = metric.sqrt_factor() * scratch;
    z *= radius;
  }
  return radius;
}

NoiseSample DrawNoise(const RegularizedMetric& metric, double epsilon, Rng& rng) {
  CheckEpsilon(epsilon);
  NoiseSample sample;
  sample.z.resize(metric.dim());
  sample.direction.resize(metric.dim());
  sample.radius = DrawNoiseInto(metric, epsilon, rng, sample.z, sample.direction);
  return sample;
}

double LogUnnormalizedDensity(const RegularizedMetric& metric, double epsilon,
                              const Eigen::Ref<const Eigen::VectorXd>& z) {
  CheckEpsilon(epsilon);
  return -epsilon * metric.Norm(z);
}

NoiseSampler::NoiseSampler(std::shared_ptr<const RegularizedMetric> metric,
                           double epsilon, uint64_t seed)
    : NoiseSampler(std::move(metric), epsilon, Rng(seed)) {}

NoiseSampler::NoiseSampler(std::shared_ptr<const RegularizedMetric> metric,
                           double epsilon, Rng rng)
    : metric_(std::move(metric)), epsilon_(epsilon), rng_(rng) {
  if (metric_ == nullptr) throw UsageError("noise sampler needs a metric");
  CheckEpsilon(epsilon_);
}

NoiseSample NoiseSampler::Sample() { return DrawNoise(*metric_, epsilon_, rng_); }

std::vector<NoiseSample> NoiseSampler::SampleBatch(size_t count) {
  if (count == 0) throw UsageError("sample batch count must be >= 1");
  std::vector<NoiseSample> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(Sample());
  return out;
}

}  // namespace mahadp
