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
#ifndef MAHADP_COVARIANCE_IO_H_
#define MAHADP_COVARIANCE_IO_H_

#include <filesystem>
#include <string_view>

#include "mahadp/geometry.h"

namespace mahadp {

inline constexpr std::string_view kCovarianceFormatVersion = "mahadp-covariance v1";

// Persists a ScaledCovariance as a JSON descriptor `<stem>.json` plus a
// binary payload `<stem>.bin` next to it.
//
// Binary payload (all little-endian):
//   8 bytes   magic "MDPCOV01"
//   uint64    m
//   m   f64   eigenvalues (descending, post-floor)
//   m*m f64   eigenvectors, row-major (column j is eigenvector j)
//   m*m f64   sigma, row-major
//
// Output is a pure function of the covariance, so reruns are byte-identical.
// Returns the path of the JSON descriptor.
std::filesystem::path WriteCovarianceSidecar(const ScaledCovariance& cov,
                                             const std::filesystem::path& stem);

// Accepts the descriptor path written above. Throws DataError on a magic,
// version or size mismatch.
ScaledCovariance ReadCovarianceSidecar(const std::filesystem::path& json_path);

}  // namespace mahadp

#endif  // MAHADP_COVARIANCE_IO_H_
