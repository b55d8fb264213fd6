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
#include "mahadp/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mahadp/error.h"

namespace mahadp {

double EuclideanNorm(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!x.allFinite()) throw UsageError("euclidean norm of a non-finite vector");
  return std::sqrt(x.squaredNorm());
}

ScaledCovariance ScaledCovariance::FromEmbeddings(const EmbeddingStore& store,
                                                  double eigenvalue_floor) {
  if (store.size() < 2) throw DataError("covariance needs at least 2 embeddings");
  const RowMatrix& x = store.matrix();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd s = (centered.transpose() * centered) /
                      static_cast<double>(store.size() - 1);
  const double trace = s.trace();
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw DataError("sample covariance has zero trace (all embeddings identical)");
  }
  s *= static_cast<double>(store.dim()) / trace;
  return Decompose(std::move(s), eigenvalue_floor);
}

ScaledCovariance ScaledCovariance::FromScaledMatrix(const Eigen::MatrixXd& sigma,
                                                    double eigenvalue_floor) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw UsageError("covariance must be a non-empty square matrix");
  }
  if (!sigma.allFinite()) throw DataError("covariance has non-finite entries");
  const double m = static_cast<double>(sigma.rows());
  if (std::abs(sigma.trace() - m) > 1e-8 * m) {
    throw UsageError("scaled covariance must have trace m = " +
                     std::to_string(sigma.rows()) + ", got " +
                     std::to_string(sigma.trace()));
  }
  return Decompose(sigma, eigenvalue_floor);
}

ScaledCovariance ScaledCovariance::FromParts(Eigen::MatrixXd sigma,
                                             Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors,
                                             double eigenvalue_floor,
                                             int clamped_count) {
  const Eigen::Index m = sigma.rows();
  if (sigma.cols() != m || eigenvalues.size() != m || eigenvectors.rows() != m ||
      eigenvectors.cols() != m || m < 1) {
    throw DataError("inconsistent covariance dimensions");
  }
  ScaledCovariance cov;
  cov.sigma_ = std::move(sigma);
  cov.eigenvalues_ = std::move(eigenvalues);
  cov.eigenvectors_ = std::move(eigenvectors);
  cov.eigenvalue_floor_ = eigenvalue_floor;
  cov.clamped_count_ = clamped_count;
  return cov;
}

ScaledCovariance ScaledCovariance::Decompose(Eigen::MatrixXd sigma, double floor) {
  if (!(floor > 0.0) || !std::isfinite(floor)) {
    throw UsageError("eigenvalue floor must be positive");
  }
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success) {
    throw DataError("eigendecomposition of the covariance failed");
  }
  const Eigen::Index m = sigma.rows();
  ScaledCovariance cov;
  cov.eigenvalue_floor_ = floor;
  cov.eigenvalues_.resize(m);
  cov.eigenvectors_.resize(m, m);
  // Eigen sorts ascending; store descending.
  for (Eigen::Index i = 0; i < m; ++i) {
    double xi = solver.eigenvalues()[m - 1 - i];
    if (xi < floor) {
      xi = floor;
      ++cov.clamped_count_;
    }
    cov.eigenvalues_[i] = xi;
    cov.eigenvectors_.col(i) = solver.eigenvectors().col(m - 1 - i);
  }
  cov.sigma_ = std::move(sigma);
  return cov;
}

RegularizedMetric::RegularizedMetric(std::shared_ptr<const ScaledCovariance> cov,
                                     double lambda)
    : cov_(std::move(cov)), lambda_(lambda) {
  if (cov_ == nullptr) throw UsageError("regularized metric needs a covariance");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw UsageError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  const Eigen::Index m = cov_->dim();
  a_eigenvalues_ = (lambda_ * cov_->eigenvalues().array() + (1.0 - lambda_)).matrix();
  identity_ = (a_eigenvalues_.array() == 1.0).all();
  if (identity_) {
    sqrt_factor_ = Eigen::MatrixXd::Identity(m, m);
    inv_factor_ = Eigen::MatrixXd::Identity(m, m);
    return;
  }
  const Eigen::MatrixXd& q = cov_->eigenvectors();
  const Eigen::VectorXd root = a_eigenvalues_.array().sqrt();
  const Eigen::VectorXd inverse = a_eigenvalues_.array().inverse();
  sqrt_factor_.noalias() = q * root.asDiagonal() * q.transpose();
  inv_factor_.noalias() = q * inverse.asDiagonal() * q.transpose();
  sqrt_factor_ = 0.5 * (sqrt_factor_ + sqrt_factor_.transpose()).eval();
  inv_factor_ = 0.5 * (inv_factor_ + inv_factor_.transpose()).eval();
}

Eigen::MatrixXd RegularizedMetric::Matrix() const {
  const Eigen::MatrixXd& q = cov_->eigenvectors();
  if (identity_) return Eigen::MatrixXd::Identity(dim(), dim());
  return q * a_eigenvalues_.asDiagonal() * q.transpose();
}

double RegularizedMetric::Norm(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) {
    throw UsageError("vector dimension " + std::to_string(x.size()) +
                     " does not match metric dimension " + std::to_string(dim()));
  }
  if (!x.allFinite()) throw UsageError("norm of a non-finite vector");
  if (identity_) return std::sqrt(x.squaredNorm());
  return std::sqrt(std::max(0.0, x.dot(inv_factor_ * x)));
}

NormBounds RegularizedMetric::SandwichBounds(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double m = static_cast<double>(dim());
  const double c = cov_->min_eigenvalue();
  const double euclid = EuclideanNorm(x);
  NormBounds b;
  b.value = Norm(x);
  b.lower = euclid / std::sqrt(lambda_ * m + 1.0 - lambda_);
  b.upper = euclid / std::sqrt(lambda_ * c + 1.0 - lambda_);
  constexpr double kTol = 1e-9;
  if (b.value < b.lower * (1.0 - kTol) || b.value > b.upper * (1.0 + kTol)) {
    throw DataError("norm sandwich violated: " + std::to_string(b.lower) +
                    " <= " + std::to_string(b.value) + " <= " +
                    std::to_string(b.upper) + " fails");
  }
  return b;
}

}  // namespace mahadp
