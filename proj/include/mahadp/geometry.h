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
#ifndef MAHADP_GEOMETRY_H_
#define MAHADP_GEOMETRY_H_

#include <memory>

#include <Eigen/Dense>

#include "mahadp/embeddings.h"

namespace mahadp {

inline constexpr double kDefaultEigenvalueFloor = 1e-8;

// sqrt(x'x). Throws UsageError on non-finite input.
double EuclideanNorm(const Eigen::Ref<const Eigen::VectorXd>& x);

// Covariance of the embedding rows rescaled to trace m, with its symmetric
// eigensystem. Eigenvalues are sorted descending and clamped from below at
// `eigenvalue_floor()`; `sigma()` keeps the unclamped (symmetrized) matrix.
class ScaledCovariance {
 public:
  // Mean-centred sample covariance S (divisor |V| - 1), then
  // Sigma = m * S / trace(S). Throws DataError when trace(S) == 0.
  static ScaledCovariance FromEmbeddings(
      const EmbeddingStore& store,
      double eigenvalue_floor = kDefaultEigenvalueFloor);

  // Takes Sigma as given; it must be symmetric-ish, PSD up to rounding and
  // have trace m within 1e-8 relative.
  static ScaledCovariance FromScaledMatrix(
      const Eigen::MatrixXd& sigma,
      double eigenvalue_floor = kDefaultEigenvalueFloor);

  // Rebuilds from persisted parts without re-running the eigensolver.
  static ScaledCovariance FromParts(Eigen::MatrixXd sigma,
                                    Eigen::VectorXd eigenvalues,
                                    Eigen::MatrixXd eigenvectors,
                                    double eigenvalue_floor,
                                    int clamped_count);

  int dim() const { return static_cast<int>(sigma_.rows()); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  double min_eigenvalue() const { return eigenvalues_[eigenvalues_.size() - 1]; }
  double eigenvalue_floor() const { return eigenvalue_floor_; }
  int clamped_count() const { return clamped_count_; }
  double trace() const { return sigma_.trace(); }

 private:
  ScaledCovariance() = default;
  static ScaledCovariance Decompose(Eigen::MatrixXd sigma, double floor);

  Eigen::MatrixXd sigma_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  double eigenvalue_floor_ = kDefaultEigenvalueFloor;
  int clamped_count_ = 0;
};

struct NormBounds {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
};

// The matrix A = lambda * Sigma + (1 - lambda) * I and the two factors the
// mechanism needs, both built from Sigma's eigensystem:
//   sqrt_factor = Q diag(sqrt(a_i)) Q',  inv_factor = Q diag(1 / a_i) Q'
// with a_i = lambda * xi_i + 1 - lambda. When every a_i is exactly 1
// (lambda == 0) both factors are the exact identity.
class RegularizedMetric {
 public:
  // Throws UsageError unless 0 <= lambda <= 1.
  RegularizedMetric(std::shared_ptr<const ScaledCovariance> cov, double lambda);

  const ScaledCovariance& covariance() const { return *cov_; }
  double lambda() const { return lambda_; }
  int dim() const { return cov_->dim(); }
  bool is_identity() const { return identity_; }
  const Eigen::VectorXd& a_eigenvalues() const { return a_eigenvalues_; }
  const Eigen::MatrixXd& sqrt_factor() const { return sqrt_factor_; }
  const Eigen::MatrixXd& inv_factor() const { return inv_factor_; }

  // Dense A (for checks; the mechanism only uses the factors).
  Eigen::MatrixXd Matrix() const;

  // sqrt(x' A^{-1} x). Throws UsageError on dimension mismatch or non-finite x.
  double Norm(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // (|x|_2 / sqrt(lambda m + 1 - lambda), Norm(x), |x|_2 / sqrt(lambda c + 1 -
  // lambda)) with c the post-floor minimum eigenvalue. Throws DataError if
  // the value leaves [lower, upper] by more than 1e-9 relative, which can only
  // happen if the factorization is wrong.
  NormBounds SandwichBounds(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::shared_ptr<const ScaledCovariance> cov_;
  double lambda_;
  bool identity_ = false;
  Eigen::VectorXd a_eigenvalues_;
  Eigen::MatrixXd sqrt_factor_;
  Eigen::MatrixXd inv_factor_;
};

}  // namespace mahadp

#endif  // MAHADP_GEOMETRY_H_
