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
// Independent reference computations for tests. Nothing here calls into the
// code paths it is used to check beyond the public RNG primitives.
#ifndef MAHADP_TESTS_ORACLES_H_
#define MAHADP_TESTS_ORACLES_H_

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mahadp/embeddings.h"
#include "mahadp/rng.h"

namespace mahadp::testing {

// O(|V| m) scan with the direct squared difference; ties keep the first row.
inline std::pair<size_t, double> BruteForceNearest(const RowMatrix& rows,
                                                   const Eigen::VectorXd& q,
                                                   std::ptrdiff_t skip = -1) {
  size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (i == skip) continue;
    double sq = 0.0;
    for (Eigen::Index k = 0; k < rows.cols(); ++k) {
      const double d = q[k] - rows(i, k);
      sq += d * d;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = static_cast<size_t>(i);
    }
  }
  return {best, std::sqrt(best_sq)};
}

// Composite Simpson rule with n (even) panels.
template <typename F>
double Simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// For planar noise with density (eps^2 / 2 pi) exp(-eps |u|), the marginal of
// one coordinate is (eps^2 / pi) |x| K1(eps |x|). Returns P(U_x >= t), t > 0.
inline double PlanarLaplaceTail(double eps, double t) {
  auto marginal = [eps](double x) {
    return eps * eps / std::numbers::pi * x * std::cyl_bessel_k(1.0, eps * x);
  };
  const double upper = t + 60.0 / eps;
  return Simpson(marginal, t, upper, 20000);
}

// Spherical multivariate Laplace noise, written out from scratch on the
// shared generator: direction from m normals, radius Gamma(m, 1/eps).
inline Eigen::VectorXd ReferenceLaplaceNoise(Rng& rng, int m, double eps) {
  Eigen::VectorXd n(m);
  double norm = 0.0;
  do {
    double sq = 0.0;
    for (int i = 0; i < m; ++i) {
      n[i] = rng.StandardNormal();
      sq += n[i] * n[i];
    }
    norm = std::sqrt(sq);
  } while (norm == 0.0);
  n /= norm;
  const double radius = SampleGamma(rng, static_cast<double>(m), 1.0 / eps);
  return n * radius;
}

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
};

// Weighted least squares of y on x.
inline Regression WeightedFit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  Regression r;
  r.slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
  r.intercept = (sy - r.slope * sx) / sw;
  return r;
}

// Bins planar samples on a square grid of side `cell` and regresses
// log(count) on the norm of each cell centre (cells with >= min_count hits,
// weighted by count). For density proportional to exp(-eps * norm(z)) the
// slope is -eps.
template <typename NormFn>
double LogDensitySlope(const std::vector<Eigen::Vector2d>& samples, NormFn norm,
                       double cell, int min_count = 30) {
  std::map<std::pair<long, long>, int> counts;
  for (const auto& z : samples) {
    ++counts[{static_cast<long>(std::floor(z[0] / cell)),
              static_cast<long>(std::floor(z[1] / cell))}];
  }
  std::vector<double> xs, ys, ws;
  for (const auto& [key, c] : counts) {
    if (c < min_count) continue;
    const Eigen::Vector2d centre((key.first + 0.5) * cell, (key.second + 0.5) * cell);
    xs.push_back(norm(centre));
    ys.push_back(std::log(static_cast<double>(c)));
    ws.push_back(static_cast<double>(c));
  }
  return WeightedFit(xs, ys, ws).slope;
}

}  // namespace mahadp::testing

#endif  // MAHADP_TESTS_ORACLES_H_
