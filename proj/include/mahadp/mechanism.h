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
#ifndef MAHADP_MECHANISM_H_
#define MAHADP_MECHANISM_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mahadp/embeddings.h"
#include "mahadp/geometry.h"

namespace mahadp {

enum class OovPolicy { kPassThrough, kDrop, kError };

std::string_view ToString(OovPolicy policy);
OovPolicy ParseOovPolicy(std::string_view text);

struct PerturbationConfig {
  double epsilon = 1.0;
  double lambda = 0.0;
  uint64_t seed = 0;
  OovPolicy oov_policy = OovPolicy::kPassThrough;
  bool lowercase = false;
  // Test hook: every noise vector is multiplied by this factor. Any value
  // other than 1 voids the privacy guarantee; the audit uses 0.5 to check
  // that it can detect a broken mechanism.
  double fault_noise_scale = 1.0;

  // Throws UsageError unless epsilon > 0 and 0 <= lambda <= 1.
  void Validate() const;
};

// Per-token sub-stream for position `position` of record `record_id`:
// DeriveStreamKey({record_id, position}).
uint64_t TokenStreamId(uint64_t record_id, uint64_t position);

// Whitespace split; ASCII letters folded to lower case when requested.
// Punctuation stays attached to its token.
std::vector<std::string> Tokenize(std::string_view text, bool lowercase);

struct TokenCounts {
  uint64_t perturbed = 0;
  uint64_t passed_through = 0;
  uint64_t dropped = 0;
};

struct PerturbedString {
  std::vector<std::string> tokens;
  TokenCounts counts;
};

// Adds noise with density proportional to exp(-epsilon ‖z‖_{M,lambda}) to a
// word's embedding and returns the Euclidean-nearest vocabulary word.
// Immutable; safe to share between threads.
class Mechanism {
 public:
  Mechanism(std::shared_ptr<const NearestNeighborIndex> index,
            std::shared_ptr<const RegularizedMetric> metric,
            PerturbationConfig config);

  // Builds the regularized metric for config.lambda from `cov`.
  static Mechanism Create(std::shared_ptr<const NearestNeighborIndex> index,
                          std::shared_ptr<const ScaledCovariance> cov,
                          PerturbationConfig config);

  const NearestNeighborIndex& index() const { return *index_; }
  const EmbeddingStore& store() const { return index_->store(); }
  const RegularizedMetric& metric() const { return *metric_; }
  const std::shared_ptr<const RegularizedMetric>& shared_metric() const {
    return metric_;
  }
  const PerturbationConfig& config() const { return config_; }

  // The noise draw used for `stream_id` (after the fault scale).
  Eigen::VectorXd Noise(uint64_t stream_id) const;

  // Vocabulary id in, vocabulary id out, using sub-stream
  // (config.seed, stream_id).
  size_t PerturbId(size_t id, uint64_t stream_id) const;

  // out[k] = PerturbId(id, stream_ids[k]); one batched neighbor search.
  void PerturbIdBatch(size_t id, std::span<const uint64_t> stream_ids,
                      std::span<size_t> out) const;

  // Out-of-vocabulary words follow config.oov_policy: returned unchanged,
  // dropped (nullopt), or rejected with DataError.
  std::optional<std::string> PerturbWord(std::string_view word,
                                         uint64_t stream_id) const;

  // Perturbs each token independently with stream TokenStreamId(record_id, i).
  PerturbedString PerturbString(std::span<const std::string> tokens,
                                uint64_t record_id) const;

 private:
  std::shared_ptr<const NearestNeighborIndex> index_;
  std::shared_ptr<const RegularizedMetric> metric_;
  PerturbationConfig config_;
};

struct CorpusOptions {
  // Records are "label<TAB>text"; the label is copied through untouched.
  bool tsv = false;
  // Abort on the first unparseable record instead of copying it through.
  bool strict = false;
  int threads = 1;
  size_t chunk_records = 4096;
};

struct CorpusSummary {
  uint64_t records = 0;
  uint64_t tokens_perturbed = 0;
  uint64_t tokens_passed_through = 0;
  uint64_t tokens_dropped = 0;
  uint64_t parse_failures = 0;
  std::vector<uint64_t> failed_lines;  // 1-based

  std::string ToJson() const;
};

// One record per input line; record_id is the 0-based line ordinal. Output
// lines are written in input order whatever the thread count. Lines that are
// not valid UTF-8, or lack a TAB in TSV mode, are copied through unchanged
// and counted as parse failures (DataError in strict mode).
CorpusSummary PerturbCorpus(const Mechanism& mech, std::istream& input,
                            std::ostream& output, const CorpusOptions& options);

}  // namespace mahadp

#endif  // MAHADP_MECHANISM_H_
