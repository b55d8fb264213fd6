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
#include "mahadp/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mahadp/error.h"

namespace mahadp {
namespace {

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view text) {
  std::vector<std::string_view> parts;
  if (Trim(text).empty()) return parts;
  size_t start = 0;
  for (;;) {
    const size_t comma = text.find(',', start);
    parts.push_back(Trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

double ParseDouble(std::string_view text, std::string_view key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("config key '" + std::string(key) + "': bad number '" +
                     std::string(text) + "'");
  }
  return v;
}

template <typename Int>
Int ParseInt(std::string_view text, std::string_view key) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("config key '" + std::string(key) + "': bad integer '" +
                     std::string(text) + "'");
  }
  return v;
}

bool ParseBool(std::string_view text, std::string_view key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("config key '" + std::string(key) + "': bad boolean '" +
                   std::string(text) + "'");
}

std::string JoinDoubles(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += FormatDouble(values[i]);
  }
  return out;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<double> ParseDoubleList(std::string_view text) {
  std::vector<double> out;
  for (std::string_view part : SplitCommas(text)) out.push_back(ParseDouble(part, "list"));
  return out;
}

void RunConfig::Validate() const {
  if (epsilon_grid.empty()) throw UsageError("epsilon grid is empty");
  if (lambda_grid.empty()) throw UsageError("lambda grid is empty");
  for (double e : epsilon_grid) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw UsageError("epsilon values must be positive, got " + FormatDouble(e));
    }
  }
  for (double l : lambda_grid) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw UsageError("lambda values must lie in [0, 1], got " + FormatDouble(l));
    }
  }
  if (repetitions < 1) throw UsageError("repetitions must be >= 1");
  if (!(eigenvalue_floor > 0.0)) throw UsageError("eigenvalue floor must be positive");
}

std::string SerializeRunConfig(const RunConfig& c) {
  std::ostringstream out;
  out << "# mahadp effective run configuration\n";
  out << "embedding_path = " << c.embedding_path << '\n';
  out << "embedding_format = " << ToString(c.embedding_format) << '\n';
  out << "vocab_paths = ";
  for (size_t i = 0; i < c.vocab_paths.size(); ++i) {
    out << (i > 0 ? "," : "") << c.vocab_paths[i];
  }
  out << '\n';
  out << "covariance_path = " << c.covariance_path << '\n';
  out << "epsilon_grid = " << JoinDoubles(c.epsilon_grid) << '\n';
  out << "lambda_grid = " << JoinDoubles(c.lambda_grid) << '\n';
  out << "repetitions = " << c.repetitions << '\n';
  out << "seed = " << c.seed << '\n';
  out << "oov_policy = " << ToString(c.oov_policy) << '\n';
  out << "lowercase = " << (c.lowercase ? "true" : "false") << '\n';
  out << "eigenvalue_floor = " << FormatDouble(c.eigenvalue_floor) << '\n';
  out << "output_dir = " << c.output_dir << '\n';
  return out.str();
}

RunConfig ParseRunConfig(std::string_view text) {
  RunConfig c;
  size_t line_no = 0;
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key == "embedding_path") {
      c.embedding_path = value;
    } else if (key == "embedding_format") {
      c.embedding_format = ParseEmbeddingFormat(value);
    } else if (key == "vocab_paths") {
      c.vocab_paths.clear();
      for (std::string_view p : SplitCommas(value)) c.vocab_paths.emplace_back(p);
    } else if (key == "covariance_path") {
      c.covariance_path = value;
    } else if (key == "epsilon_grid") {
      c.epsilon_grid.clear();
      for (std::string_view p : SplitCommas(value)) c.epsilon_grid.push_back(ParseDouble(p, key));
    } else if (key == "lambda_grid") {
      c.lambda_grid.clear();
      for (std::string_view p : SplitCommas(value)) c.lambda_grid.push_back(ParseDouble(p, key));
    } else if (key == "repetitions") {
      c.repetitions = ParseInt<int>(value, key);
    } else if (key == "seed") {
      c.seed = ParseInt<uint64_t>(value, key);
    } else if (key == "oov_policy") {
      c.oov_policy = ParseOovPolicy(value);
    } else if (key == "lowercase") {
      c.lowercase = ParseBool(value, key);
    } else if (key == "eigenvalue_floor") {
      c.eigenvalue_floor = ParseDouble(value, key);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" +
                       std::string(key) + "'");
    }
  }
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str());
}

}  // namespace mahadp
