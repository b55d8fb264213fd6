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
#include "mahadp/synthetic.h"

#include <cmath>
#include <string>
#include <vector>

#include "mahadp/error.h"

namespace mahadp {

Eigen::MatrixXd RandomOrthogonal(int m, Rng& rng) {
  Eigen::MatrixXd g(m, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) g(i, j) = rng.StandardNormal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::VectorXd DecayingSpectrum(int m, double decay) {
  if (m < 1 || !(decay > 0.0)) throw UsageError("bad spectrum parameters");
  Eigen::VectorXd xi(m);
  double v = 1.0;
  for (int i = 0; i < m; ++i, v *= decay) xi[i] = v;
  return xi * (static_cast<double>(m) / xi.sum());
}

Eigen::MatrixXd RandomTraceNormalizedSpd(int m, Rng& rng, double min_eigenvalue,
                                         double max_eigenvalue) {
  if (m < 1 || !(min_eigenvalue > 0.0) || max_eigenvalue < min_eigenvalue) {
    throw UsageError("bad random covariance parameters");
  }
  Eigen::VectorXd xi(m);
  for (int i = 0; i < m; ++i) {
    xi[i] = min_eigenvalue + (max_eigenvalue - min_eigenvalue) * rng.UniformOpen();
  }
  xi *= static_cast<double>(m) / xi.sum();
  const Eigen::MatrixXd q = RandomOrthogonal(m, rng);
  Eigen::MatrixXd sigma = q * xi.asDiagonal() * q.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  // Pin the trace against rounding drift.
  sigma *= static_cast<double>(m) / sigma.trace();
  return sigma;
}

EmbeddingStore MakeAnisotropicEmbeddings(const AnisotropicSpec& spec) {
  if (spec.vocab_size < 2 || spec.dim < 1) throw UsageError("bad synthetic embedding size");
  Rng rng(DeriveStreamKey({spec.seed, 0x5359'4e54ULL}));
  const Eigen::MatrixXd q = RandomOrthogonal(spec.dim, rng);
  const Eigen::VectorXd root = DecayingSpectrum(spec.dim, spec.decay).array().sqrt();
  const Eigen::MatrixXd transform = spec.scale * q * root.asDiagonal();

  RowMatrix matrix(static_cast<Eigen::Index>(spec.vocab_size), spec.dim);
  Eigen::VectorXd g(spec.dim);
  std::vector<std::string> words;
  words.reserve(spec.vocab_size);
  for (size_t i = 0; i < spec.vocab_size; ++i) {
    for (int k = 0; k < spec.dim; ++k) g[k] = rng.StandardNormal();
    matrix.row(static_cast<Eigen::Index>(i)) = (transform * g).transpose();
    words.push_back("w" + std::to_string(i));
  }
  return EmbeddingStore(std::move(words), std::move(matrix));
}

EmbeddingStore MakeAuditVocabulary(size_t vocab_size, int dim, uint64_t seed,
                                   double side, double stretch) {
  if (vocab_size < 2 || dim < 1) throw UsageError("bad audit vocabulary size");
  Rng rng(DeriveStreamKey({seed, 0x4155'4454ULL}));
  RowMatrix matrix(static_cast<Eigen::Index>(vocab_size), dim);
  std::vector<std::string> words;
  for (size_t i = 0; i < vocab_size; ++i) {
    double extent = side;
    for (int k = 0; k < dim; ++k, extent /= stretch) {
      matrix(static_cast<Eigen::Index>(i), k) = extent * rng.UniformOpen();
    }
    words.push_back("v" + std::to_string(i));
  }
  return EmbeddingStore(std::move(words), std::move(matrix));
}

}  // namespace mahadp
