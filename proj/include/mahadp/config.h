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
#ifndef MAHADP_CONFIG_H_
#define MAHADP_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mahadp/embeddings.h"
#include "mahadp/geometry.h"
#include "mahadp/mechanism.h"

namespace mahadp {

// Everything that determines a run's output. Serialized as "key = value"
// lines; lists are comma-separated; '#' starts a comment line.
struct RunConfig {
  std::string embedding_path;
  EmbeddingFormat embedding_format = EmbeddingFormat::kGloveText;
  // Corpus files whose token union restricts the vocabulary.
  std::vector<std::string> vocab_paths;
  std::string covariance_path;  // sidecar descriptor; computed when empty
  std::vector<double> epsilon_grid = {1, 5, 10, 20, 40};
  std::vector<double> lambda_grid = {0, 0.25, 0.5, 0.75, 1};
  int repetitions = 100;
  uint64_t seed = 20210401;
  OovPolicy oov_policy = OovPolicy::kPassThrough;
  bool lowercase = false;
  double eigenvalue_floor = kDefaultEigenvalueFloor;
  std::string output_dir = "mahadp_out";

  // Throws UsageError on a non-positive epsilon, lambda outside [0, 1],
  // repetitions < 1 or a non-positive eigenvalue floor.
  void Validate() const;

  bool operator==(const RunConfig&) const = default;
};

std::string SerializeRunConfig(const RunConfig& config);

// Unknown keys and malformed values throw UsageError. Keys not present keep
// their defaults.
RunConfig ParseRunConfig(std::string_view text);
RunConfig LoadRunConfig(const std::string& path);

// Shortest decimal that round-trips.
std::string FormatDouble(double v);
std::vector<double> ParseDoubleList(std::string_view text);

}  // namespace mahadp

#endif  // MAHADP_CONFIG_H_
