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
#include "mahadp/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "mahadp/error.h"

namespace mahadp {
namespace {

std::string LineError(const std::filesystem::path& path, size_t line,
                      const std::string& what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

// Splits on runs of spaces/tabs. Views point into `line`.
std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool ParseDouble(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool ParseSize(std::string_view text, size_t& out) {
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::string_view ToString(EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::kGloveText:
      return "glove-text";
    case EmbeddingFormat::kWord2VecText:
      return "word2vec-text";
  }
  return "unknown";
}

EmbeddingFormat ParseEmbeddingFormat(std::string_view text) {
  if (text == "glove-text" || text == "glove") return EmbeddingFormat::kGloveText;
  if (text == "word2vec-text" || text == "word2vec") {
    return EmbeddingFormat::kWord2VecText;
  }
  throw UsageError("unknown embedding format '" + std::string(text) +
                   "' (expected glove-text or word2vec-text)");
}

EmbeddingStore::EmbeddingStore(std::vector<std::string> words, RowMatrix matrix)
    : words_(std::move(words)), matrix_(std::move(matrix)) {
  if (words_.size() < 2) {
    throw DataError("embedding store needs at least 2 words, got fewer than 2 words (" +
                    std::to_string(words_.size()) + ")");
  }
  if (static_cast<size_t>(matrix_.rows()) != words_.size()) {
    throw DataError("embedding matrix has " + std::to_string(matrix_.rows()) +
                    " rows for " + std::to_string(words_.size()) + " words");
  }
  if (matrix_.cols() < 1) throw DataError("embedding dimension must be >= 1");
  if (!matrix_.allFinite()) throw DataError("embedding matrix has non-finite entries");
  ids_.reserve(words_.size());
  for (size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], i).second) {
      throw DataError("duplicate word in embedding store: '" + words_[i] + "'");
    }
  }
}

std::optional<size_t> EmbeddingStore::Find(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore EmbeddingStore::Load(
    const std::filesystem::path& path, EmbeddingFormat format,
    const std::unordered_set<std::string>* vocab_filter,
    LoadDiagnostics* diagnostics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());

  LoadDiagnostics local;
  LoadDiagnostics& diag = diagnostics != nullptr ? *diagnostics : local;

  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  std::optional<size_t> dim;
  std::optional<size_t> header_dim;
  size_t records = 0;
  bool expect_header = format == EmbeddingFormat::kWord2VecText;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = SplitFields(line);
    if (fields.empty()) continue;

    if (expect_header) {
      expect_header = false;
      size_t n = 0, m = 0;
      if (fields.size() != 2 || !ParseSize(fields[0], n) ||
          !ParseSize(fields[1], m) || m == 0) {
        throw DataError(LineError(path, line_no,
                                  "malformed word2vec header (expected '|V| m')"));
      }
      diag.header_vocab_size = n;
      header_dim = m;
      continue;
    }

    if (fields.size() < 2) {
      throw DataError(LineError(path, line_no, "malformed line (token without values)"));
    }
    const size_t m = fields.size() - 1;
    if (!dim) {
      if (header_dim && *header_dim != m) {
        throw DataError(LineError(path, line_no,
                                  "inconsistent dimension: header says " +
                                      std::to_string(*header_dim) + ", line has " +
                                      std::to_string(m)));
      }
      dim = m;
    } else if (*dim != m) {
      throw DataError(LineError(path, line_no,
                                "inconsistent dimension: expected " +
                                    std::to_string(*dim) + ", got " +
                                    std::to_string(m)));
    }
    ++records;

    const size_t offset = values.size();
    values.resize(offset + m);
    for (size_t j = 0; j < m; ++j) {
      double v = 0.0;
      if (!ParseDouble(fields[j + 1], v) || !std::isfinite(v)) {
        throw DataError(LineError(path, line_no,
                                  "malformed value '" + std::string(fields[j + 1]) + "'"));
      }
      values[offset + j] = v;
    }

    std::string token(fields[0]);
    const bool keep = vocab_filter == nullptr || vocab_filter->contains(token);
    if (!keep) {
      ++diag.filtered_out;
      values.resize(offset);
      continue;
    }
    if (!seen.insert(token).second) {
      ++diag.duplicate_tokens;
      diag.warnings.push_back(LineError(path, line_no,
                                        "duplicate token '" + token +
                                            "' ignored (first occurrence kept)"));
      values.resize(offset);
      continue;
    }
    words.push_back(std::move(token));
  }

  if (diag.header_vocab_size && *diag.header_vocab_size != records) {
    diag.warnings.push_back(path.string() + ": header declares " +
                            std::to_string(*diag.header_vocab_size) +
                            " vectors but file has " + std::to_string(records));
  }
  if (words.size() < 2) {
    throw DataError(path.string() + ": fewer than 2 words after loading" +
                    (vocab_filter != nullptr ? std::string(" and filtering") : "") +
                    " (" + std::to_string(words.size()) + ")");
  }

  const auto rows = static_cast<Eigen::Index>(words.size());
  const auto cols = static_cast<Eigen::Index>(*dim);
  RowMatrix matrix = Eigen::Map<const RowMatrix>(values.data(), rows, cols);
  return EmbeddingStore(std::move(words), std::move(matrix));
}

void WriteGloveText(const EmbeddingStore& store,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[32];
  for (size_t i = 0; i < store.size(); ++i) {
    out << store.word(i);
    for (int j = 0; j < store.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), " %.17g", store.matrix()(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

NearestNeighborIndex::NearestNeighborIndex(
    std::shared_ptr<const EmbeddingStore> store)
    : store_(std::move(store)) {
  if (store_ == nullptr) throw UsageError("nearest-neighbor index needs a store");
  squared_norms_ = store_->matrix().rowwise().squaredNorm();
}

Neighbor NearestNeighborIndex::Nearest(
    const Eigen::Ref<const Eigen::VectorXd>& query) const {
  Eigen::MatrixXd q = query;
  return Search(q, nullptr).front();
}

std::vector<Neighbor> NearestNeighborIndex::NearestBatch(
    const Eigen::MatrixXd& queries) const {
  return Search(queries, nullptr);
}

std::vector<Neighbor> NearestNeighborIndex::NearestBatchExcluding(
    const Eigen::MatrixXd& queries, const std::vector<size_t>& exclude) const {
  if (exclude.size() != static_cast<size_t>(queries.cols())) {
    throw UsageError("exclusion list must have one entry per query");
  }
  return Search(queries, &exclude);
}

std::vector<Neighbor> NearestNeighborIndex::Search(
    const Eigen::MatrixXd& queries, const std::vector<size_t>* exclude) const {
  const RowMatrix& x = store_->matrix();
  const Eigen::Index n = x.rows();
  if (queries.rows() != x.cols()) {
    throw UsageError("query dimension " + std::to_string(queries.rows()) +
                     " does not match embedding dimension " +
                     std::to_string(x.cols()));
  }
  if (!queries.allFinite()) throw UsageError("query has non-finite entries");

  const double max_norm = squared_norms_.maxCoeff();
  constexpr Eigen::Index kBlock = 256;
  std::vector<Neighbor> result(static_cast<size_t>(queries.cols()));
  Eigen::MatrixXd dots;
  std::vector<Eigen::Index> candidates;

  for (Eigen::Index b0 = 0; b0 < queries.cols(); b0 += kBlock) {
    const Eigen::Index bn = std::min(kBlock, queries.cols() - b0);
    const auto block = queries.middleCols(b0, bn);
    dots.noalias() = x * block;
    for (Eigen::Index j = 0; j < bn; ++j) {
      const auto q = block.col(j);
      const double qn = q.squaredNorm();
      const Eigen::Index skip =
          exclude != nullptr ? static_cast<Eigen::Index>((*exclude)[b0 + j]) : -1;

      double best_screen = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i == skip) continue;
        const double d = squared_norms_[i] - 2.0 * dots(i, j) + qn;
        if (d < best_screen) best_screen = d;
      }
      const double slack =
          1e-9 * (qn + max_norm) + 4.0 * std::numeric_limits<double>::min();
      candidates.clear();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i == skip) continue;
        const double d = squared_norms_[i] - 2.0 * dots(i, j) + qn;
        if (d <= best_screen + slack) candidates.push_back(i);
      }

      Neighbor best{0, std::numeric_limits<double>::infinity()};
      double best_sq = std::numeric_limits<double>::infinity();
      for (Eigen::Index i : candidates) {
        double sq = 0.0;
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
          const double diff = q[k] - x(i, k);
          sq += diff * diff;
        }
        if (sq < best_sq) {  // candidates ascend, so ties keep the smaller id
          best_sq = sq;
          best.id = static_cast<size_t>(i);
        }
      }
      best.distance = std::sqrt(best_sq);
      result[static_cast<size_t>(b0 + j)] = best;
    }
  }
  return result;
}

NearestWordResult NearestWord(const NearestNeighborIndex& index,
                              const Eigen::Ref<const Eigen::VectorXd>& query) {
  const Neighbor n = index.Nearest(query);
  return {index.store().word(n.id), n.id, n.distance};
}

CorpusProfile ComputeCorpusProfile(const NearestNeighborIndex& index) {
  const EmbeddingStore& store = index.store();
  const size_t n = store.size();
  if (n < 2) throw DataError("corpus profile needs at least 2 words");

  CorpusProfile profile;
  profile.vocab_size = n;
  profile.nearest_distances.resize(n);

  constexpr size_t kBlock = 512;
  for (size_t b0 = 0; b0 < n; b0 += kBlock) {
    const size_t bn = std::min(kBlock, n - b0);
    Eigen::MatrixXd queries =
        store.matrix().middleRows(static_cast<Eigen::Index>(b0),
                                  static_cast<Eigen::Index>(bn)).transpose();
    std::vector<size_t> exclude(bn);
    std::iota(exclude.begin(), exclude.end(), b0);
    const auto found = index.NearestBatchExcluding(queries, exclude);
    for (size_t j = 0; j < bn; ++j) profile.nearest_distances[b0 + j] = found[j].distance;
  }

  std::vector<double> sorted = profile.nearest_distances;
  std::sort(sorted.begin(), sorted.end());
  profile.d_min = sorted.front();
  profile.d_max = sorted.back();
  const size_t k = std::min<size_t>(50, n);
  profile.mean_top50_dense =
      std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(k), 0.0) /
      static_cast<double>(k);
  profile.mean_top50_sparse =
      std::accumulate(sorted.end() - static_cast<long>(k), sorted.end(), 0.0) /
      static_cast<double>(k);
  const double inf = std::numeric_limits<double>::infinity();
  profile.ratio_max_min = profile.d_min > 0.0 ? profile.d_max / profile.d_min : inf;
  profile.ratio_sparse_dense = profile.mean_top50_dense > 0.0
                                   ? profile.mean_top50_sparse / profile.mean_top50_dense
                                   : inf;
  return profile;
}

std::string CorpusProfileJson(const CorpusProfile& profile) {
  auto number = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  nlohmann::ordered_json j;
  j["vocab_size"] = profile.vocab_size;
  j["d_max"] = profile.d_max;
  j["d_min"] = profile.d_min;
  j["ratio_max_min"] = number(profile.ratio_max_min);
  j["mean_top50_sparse"] = profile.mean_top50_sparse;
  j["mean_top50_dense"] = profile.mean_top50_dense;
  j["ratio_sparse_dense"] = number(profile.ratio_sparse_dense);
  return j.dump(2);
}

}  // namespace mahadp
