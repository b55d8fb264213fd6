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
#ifndef MAHADP_EMBEDDINGS_H_
#define MAHADP_EMBEDDINGS_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

namespace mahadp {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EmbeddingFormat {
  kGloveText,     // "token v1 ... vm" per line
  kWord2VecText,  // same, preceded by a "|V| m" header line
};

std::string_view ToString(EmbeddingFormat format);
EmbeddingFormat ParseEmbeddingFormat(std::string_view text);

// Non-fatal findings while loading an embedding file.
struct LoadDiagnostics {
  size_t duplicate_tokens = 0;
  size_t filtered_out = 0;
  std::optional<size_t> header_vocab_size;
  std::vector<std::string> warnings;
};

// Vocabulary plus its |V| x m embedding matrix. Row i is the vector of
// words()[i]. Immutable after construction.
class EmbeddingStore {
 public:
  // Throws DataError unless words are unique, |V| == rows >= 2, m >= 1 and
  // every entry is finite.
  EmbeddingStore(std::vector<std::string> words, RowMatrix matrix);

  // Parses `path`. Duplicate tokens keep their first occurrence and are
  // reported through `diagnostics`. When `vocab_filter` is set, only those
  // tokens are kept (file order is preserved).
  static EmbeddingStore Load(
      const std::filesystem::path& path, EmbeddingFormat format,
      const std::unordered_set<std::string>* vocab_filter = nullptr,
      LoadDiagnostics* diagnostics = nullptr);

  size_t size() const { return words_.size(); }
  int dim() const { return static_cast<int>(matrix_.cols()); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(size_t id) const { return words_[id]; }
  const RowMatrix& matrix() const { return matrix_; }
  auto row(size_t id) const { return matrix_.row(static_cast<Eigen::Index>(id)); }

  std::optional<size_t> Find(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  RowMatrix matrix_;
  std::unordered_map<std::string, size_t> ids_;
};

// Writes `store` in glove-text format with round-trip precision.
void WriteGloveText(const EmbeddingStore& store,
                    const std::filesystem::path& path);

struct Neighbor {
  size_t id = 0;
  double distance = 0.0;
};

// Exact Euclidean nearest-neighbor search over an EmbeddingStore.
//
// Candidates are screened with the expansion |q|^2 - 2 q.x + |x|^2 (one
// matrix product per query block); every row whose screened distance lies
// within a rounding slack of the minimum is then re-scored with the direct
// sum of squared differences. The returned neighbor is the exact argmin of
// that direct distance, ties going to the smallest vocabulary id.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(std::shared_ptr<const EmbeddingStore> store);

  const EmbeddingStore& store() const { return *store_; }
  const std::shared_ptr<const EmbeddingStore>& shared_store() const {
    return store_;
  }
  const Eigen::VectorXd& squared_norms() const { return squared_norms_; }

  // Throws UsageError on dimension mismatch or non-finite query.
  Neighbor Nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const;

  // One result per column of `queries` (m x B).
  std::vector<Neighbor> NearestBatch(const Eigen::MatrixXd& queries) const;

  // As NearestBatch, but row exclude[j] is ineligible for query j.
  std::vector<Neighbor> NearestBatchExcluding(
      const Eigen::MatrixXd& queries, const std::vector<size_t>& exclude) const;

 private:
  std::vector<Neighbor> Search(const Eigen::MatrixXd& queries,
                               const std::vector<size_t>* exclude) const;

  std::shared_ptr<const EmbeddingStore> store_;
  Eigen::VectorXd squared_norms_;
};

// Result of a nearest-word lookup.
struct NearestWordResult {
  std::string_view word;
  size_t id = 0;
  double distance = 0.0;
};

NearestWordResult NearestWord(const NearestNeighborIndex& index,
                              const Eigen::Ref<const Eigen::VectorXd>& query);

// Density heterogeneity of an embedding space, from each word's distance to
// its nearest other word.
struct CorpusProfile {
  size_t vocab_size = 0;
  double d_max = 0.0;
  double d_min = 0.0;
  double ratio_max_min = 0.0;      // +inf when d_min == 0
  double mean_top50_sparse = 0.0;  // mean of the 50 largest distances
  double mean_top50_dense = 0.0;   // mean of the 50 smallest distances
  double ratio_sparse_dense = 0.0;
  std::vector<double> nearest_distances;  // indexed by vocabulary id
};

CorpusProfile ComputeCorpusProfile(const NearestNeighborIndex& index);

// {d_max, d_min, ratio_max_min, mean_top50_sparse, mean_top50_dense,
//  ratio_sparse_dense}; infinite ratios are written as null.
std::string CorpusProfileJson(const CorpusProfile& profile);

}  // namespace mahadp

#endif  // MAHADP_EMBEDDINGS_H_
