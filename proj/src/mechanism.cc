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
#include "mahadp/mechanism.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "mahadp/error.h"
#include "mahadp/noise.h"
#include "mahadp/parallel.h"
#include "mahadp/rng.h"

namespace mahadp {
namespace {

bool IsValidUtf8(std::string_view s) {
  size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    size_t len = 0;
    uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Overlong forms, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && (cp < 0x10000 || cp > 0x10ffff)) ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::string Join(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

struct RecordResult {
  std::string line;
  TokenCounts counts;
  bool parse_failure = false;
};

}  // namespace

std::string_view ToString(OovPolicy policy) {
  switch (policy) {
    case OovPolicy::kPassThrough:
      return "pass-through";
    case OovPolicy::kDrop:
      return "drop";
    case OovPolicy::kError:
      return "error";
  }
  return "unknown";
}

OovPolicy ParseOovPolicy(std::string_view text) {
  if (text == "pass-through") return OovPolicy::kPassThrough;
  if (text == "drop") return OovPolicy::kDrop;
  if (text == "error") return OovPolicy::kError;
  throw UsageError("unknown oov policy '" + std::string(text) +
                   "' (expected pass-through, drop or error)");
}

void PerturbationConfig::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw UsageError("epsilon must be positive and finite");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("lambda must lie in [0, 1]");
  if (!(fault_noise_scale > 0.0) || !std::isfinite(fault_noise_scale)) {
    throw UsageError("fault noise scale must be positive");
  }
}

uint64_t TokenStreamId(uint64_t record_id, uint64_t position) {
  return DeriveStreamKey({record_id, position});
}

std::vector<std::string> Tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> tokens;
  size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      std::string token(text.substr(start, i - start));
      if (lowercase) {
        for (char& c : token) {
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
      }
      tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

Mechanism::Mechanism(std::shared_ptr<const NearestNeighborIndex> index,
                     std::shared_ptr<const RegularizedMetric> metric,
                     PerturbationConfig config)
    : index_(std::move(index)), metric_(std::move(metric)), config_(config) {
  if (index_ == nullptr || metric_ == nullptr) {
    throw UsageError("mechanism needs an index and a metric");
  }
  config_.Validate();
  if (metric_->dim() != index_->store().dim()) {
    throw UsageError("metric dimension " + std::to_string(metric_->dim()) +
                     " does not match embedding dimension " +
                     std::to_string(index_->store().dim()));
  }
  if (metric_->lambda() != config_.lambda) {
    throw UsageError("metric lambda does not match the perturbation config");
  }
}

Mechanism Mechanism::Create(std::shared_ptr<const NearestNeighborIndex> index,
                            std::shared_ptr<const ScaledCovariance> cov,
                            PerturbationConfig config) {
  config.Validate();
  auto metric = std::make_shared<const RegularizedMetric>(std::move(cov), config.lambda);
  return Mechanism(std::move(index), std::move(metric), config);
}

Eigen::VectorXd Mechanism::Noise(uint64_t stream_id) const {
  Rng rng = Rng::ForStream(config_.seed, stream_id);
  Eigen::VectorXd z(metric_->dim());
  Eigen::VectorXd scratch(metric_->dim());
  DrawNoiseInto(*metric_, config_.epsilon, rng, z, scratch);
  if (config_.fault_noise_scale != 1.0) z *= config_.fault_noise_scale;
  return z;
}

size_t Mechanism::PerturbId(size_t id, uint64_t stream_id) const {
  size_t out = 0;
  PerturbIdBatch(id, std::span<const uint64_t>(&stream_id, 1), std::span<size_t>(&out, 1));
  return out;
}

void Mechanism::PerturbIdBatch(size_t id, std::span<const uint64_t> stream_ids,
                               std::span<size_t> out) const {
  if (id >= store().size()) throw UsageError("vocabulary id out of range");
  if (out.size() != stream_ids.size()) {
    throw UsageError("output span must match the number of streams");
  }
  const Eigen::Index m = metric_->dim();
  const Eigen::Index k = static_cast<Eigen::Index>(stream_ids.size());
  const Eigen::VectorXd origin = store().row(id).transpose();
  Eigen::MatrixXd queries(m, k);
  Eigen::VectorXd scratch(m);
  for (Eigen::Index j = 0; j < k; ++j) {
    Rng rng = Rng::ForStream(config_.seed, stream_ids[static_cast<size_t>(j)]);
    auto col = queries.col(j);
    DrawNoiseInto(*metric_, config_.epsilon, rng, col, scratch);
    if (config_.fault_noise_scale != 1.0) col *= config_.fault_noise_scale;
    col += origin;
  }
  const auto found = index_->NearestBatch(queries);
  for (size_t j = 0; j < found.size(); ++j) out[j] = found[j].id;
}

std::optional<std::string> Mechanism::PerturbWord(std::string_view word,
                                                  uint64_t stream_id) const {
  const auto id = store().Find(word);
  if (!id) {
    switch (config_.oov_policy) {
      case OovPolicy::kPassThrough:
        return std::string(word);
      case OovPolicy::kDrop:
        return std::nullopt;
      case OovPolicy::kError:
        throw DataError("out-of-vocabulary token '" + std::string(word) + "'");
    }
  }
  return store().word(PerturbId(*id, stream_id));
}

PerturbedString Mechanism::PerturbString(std::span<const std::string> tokens,
                                         uint64_t record_id) const {
  PerturbedString result;
  result.tokens.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    const auto id = store().Find(tokens[i]);
    if (id) {
      result.tokens.push_back(store().word(PerturbId(*id, TokenStreamId(record_id, i))));
      ++result.counts.perturbed;
      continue;
    }
    switch (config_.oov_policy) {
      case OovPolicy::kPassThrough:
        result.tokens.push_back(tokens[i]);
        ++result.counts.passed_through;
        break;
      case OovPolicy::kDrop:
        ++result.counts.dropped;
        break;
      case OovPolicy::kError:
        throw DataError("out-of-vocabulary token '" + tokens[i] + "'");
    }
  }
  return result;
}

std::string CorpusSummary::ToJson() const {
  nlohmann::ordered_json j;
  j["records"] = records;
  j["tokens_perturbed"] = tokens_perturbed;
  j["tokens_passed_through"] = tokens_passed_through;
  j["tokens_dropped"] = tokens_dropped;
  j["parse_failures"] = parse_failures;
  j["failed_lines"] = failed_lines;
  return j.dump();
}

CorpusSummary PerturbCorpus(const Mechanism& mech, std::istream& input,
                            std::ostream& output, const CorpusOptions& options) {
  CorpusSummary summary;
  const size_t chunk = std::max<size_t>(1, options.chunk_records);
  std::vector<std::string> lines;
  std::vector<RecordResult> results;
  uint64_t base = 0;
  bool done = false;

  while (!done) {
    lines.clear();
    std::string line;
    while (lines.size() < chunk) {
      if (!std::getline(input, line)) {
        done = true;
        break;
      }
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
    if (input.bad()) throw DataError("I/O error while reading the corpus");

    results.assign(lines.size(), RecordResult{});
    ParallelFor(lines.size(), options.threads, [&](size_t i) {
      const std::string& raw = lines[i];
      RecordResult& r = results[i];
      const uint64_t record_id = base + i;
      std::string_view label;
      std::string_view text = raw;
      bool ok = IsValidUtf8(raw);
      if (ok && options.tsv) {
        const size_t tab = raw.find('\t');
        if (tab == std::string::npos) {
          ok = false;
        } else {
          label = std::string_view(raw).substr(0, tab);
          text = std::string_view(raw).substr(tab + 1);
        }
      }
      if (!ok) {
        if (options.strict) {
          throw DataError("corpus line " + std::to_string(record_id + 1) +
                          ": unparseable record");
        }
        r.parse_failure = true;
        r.line = raw;
        return;
      }
      const auto tokens = Tokenize(text, mech.config().lowercase);
      PerturbedString perturbed = mech.PerturbString(tokens, record_id);
      r.counts = perturbed.counts;
      if (options.tsv) {
        r.line.assign(label);
        r.line += '\t';
        r.line += Join(perturbed.tokens);
      } else {
        r.line = Join(perturbed.tokens);
      }
    });

    for (size_t i = 0; i < results.size(); ++i) {
      const RecordResult& r = results[i];
      output << r.line << '\n';
      ++summary.records;
      if (r.parse_failure) {
        ++summary.parse_failures;
        summary.failed_lines.push_back(base + i + 1);
      }
      summary.tokens_perturbed += r.counts.perturbed;
      summary.tokens_passed_through += r.counts.passed_through;
      summary.tokens_dropped += r.counts.dropped;
    }
    if (!output) throw DataError("I/O error while writing the perturbed corpus");
    base += lines.size();
  }
  return summary;
}

}  // namespace mahadp
