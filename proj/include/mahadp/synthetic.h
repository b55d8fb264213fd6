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
#ifndef MAHADP_SYNTHETIC_H_
#define MAHADP_SYNTHETIC_H_

#include <cstdint>

#include <Eigen/Dense>

#include "mahadp/embeddings.h"
#include "mahadp/rng.h"

namespace mahadp {

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Eigen::MatrixXd RandomOrthogonal(int m, Rng& rng);

// xi_i proportional to decay^i, rescaled so that the sum is m.
Eigen::VectorXd DecayingSpectrum(int m, double decay);

// Q diag(xi) Q' for a random rotation Q and eigenvalues drawn uniformly from
// [min_eigenvalue, max_eigenvalue] before rescaling to trace m.
Eigen::MatrixXd RandomTraceNormalizedSpd(int m, Rng& rng,
                                         double min_eigenvalue = 0.05,
                                         double max_eigenvalue = 1.0);

struct AnisotropicSpec {
  size_t vocab_size = 2000;
  int dim = 50;
  double decay = 0.9;   // eigenvalue ratio between consecutive axes
  double scale = 1.0;   // overall standard deviation multiplier
  uint64_t seed = 0;
};

// Gaussian point cloud with covariance scale^2 Q diag(xi) Q', xi from
// DecayingSpectrum. Words are "w0", "w1", ...
EmbeddingStore MakeAnisotropicEmbeddings(const AnisotropicSpec& spec);

// Points uniform in an axis-aligned box whose side along axis k is
// side * stretch^-k, so the covariance is anisotropic. Words are "v0", ...
EmbeddingStore MakeAuditVocabulary(size_t vocab_size, int dim, uint64_t seed,
                                   double side = 3.0, double stretch = 2.0);

}  // namespace mahadp

#endif  // MAHADP_SYNTHETIC_H_
