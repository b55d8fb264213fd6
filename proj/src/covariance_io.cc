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
#include "mahadp/covariance_io.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "json.hpp"
#include "mahadp/error.h"

namespace mahadp {
namespace {

constexpr std::array<char, 8> kMagic = {'M', 'D', 'P', 'C', 'O', 'V', '0', '1'};

void PutU64(std::vector<char>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutF64(std::vector<char>& out, double v) { PutU64(out, std::bit_cast<uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::vector<char>& data) : data_(data) {}

  uint64_t U64() {
    if (pos_ + 8 > data_.size()) throw DataError("covariance payload truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  size_t remaining() const { return data_.size() - pos_; }
  void Skip(size_t n) { pos_ += n; }

 private:
  const std::vector<char>& data_;
  size_t pos_ = 0;
};

void PutRowMajor(std::vector<char>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) PutF64(out, m(i, j));
  }
}

Eigen::MatrixXd GetRowMajor(Reader& in, Eigen::Index m) {
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = in.F64();
  }
  return out;
}

}  // namespace

std::filesystem::path WriteCovarianceSidecar(const ScaledCovariance& cov,
                                             const std::filesystem::path& stem) {
  std::filesystem::path json_path = stem;
  json_path += ".json";
  std::filesystem::path bin_path = stem;
  bin_path += ".bin";

  const auto m = static_cast<Eigen::Index>(cov.dim());
  std::vector<char> payload(kMagic.begin(), kMagic.end());
  payload.reserve(8 + 8 + 8 * static_cast<size_t>(m + 2 * m * m));
  PutU64(payload, static_cast<uint64_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) PutF64(payload, cov.eigenvalues()[i]);
  PutRowMajor(payload, cov.eigenvectors());
  PutRowMajor(payload, cov.sigma());

  {
    std::ofstream out(bin_path, std::ios::binary | std::ios::trunc);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw DataError("cannot write " + bin_path.string());
  }

  nlohmann::ordered_json j;
  j["format"] = std::string(kCovarianceFormatVersion);
  j["magic"] = std::string(kMagic.begin(), kMagic.end());
  j["dim"] = m;
  j["eigenvalue_floor"] = cov.eigenvalue_floor();
  j["clamped_count"] = cov.clamped_count();
  j["trace"] = cov.trace();
  j["min_eigenvalue"] = cov.min_eigenvalue();
  j["binary"] = bin_path.filename().string();
  j["layout"] = "magic[8] u64:m f64[m]:eigenvalues f64[m*m]:eigenvectors(row-major) "
                "f64[m*m]:sigma(row-major), little-endian";
  std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + json_path.string());
  return json_path;
}

ScaledCovariance ReadCovarianceSidecar(const std::filesystem::path& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw DataError("cannot open covariance descriptor " + json_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed covariance descriptor: " + std::string(e.what()));
  }
  if (j.value("format", "") != kCovarianceFormatVersion) {
    throw DataError("unsupported covariance format in " + json_path.string());
  }
  const auto m = j.at("dim").get<Eigen::Index>();
  const double floor = j.at("eigenvalue_floor").get<double>();
  const int clamped = j.at("clamped_count").get<int>();
  const auto bin_path = json_path.parent_path() / j.at("binary").get<std::string>();

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open covariance payload " + bin_path.string());
  const std::vector<char> data((std::istreambuf_iterator<char>(bin)),
                               std::istreambuf_iterator<char>());
  if (data.size() < kMagic.size() ||
      std::memcmp(data.data(), kMagic.data(), kMagic.size()) != 0) {
    throw DataError("bad magic in covariance payload " + bin_path.string());
  }
  Reader reader(data);
  reader.Skip(kMagic.size());
  if (reader.U64() != static_cast<uint64_t>(m)) {
    throw DataError("covariance payload dimension does not match descriptor");
  }
  if (reader.remaining() != 8 * static_cast<size_t>(m + 2 * m * m)) {
    throw DataError("covariance payload has unexpected size");
  }
  Eigen::VectorXd eigenvalues(m);
  for (Eigen::Index i = 0; i < m; ++i) eigenvalues[i] = reader.F64();
  Eigen::MatrixXd eigenvectors = GetRowMajor(reader, m);
  Eigen::MatrixXd sigma = GetRowMajor(reader, m);
  return ScaledCovariance::FromParts(std::move(sigma), std::move(eigenvalues),
                                     std::move(eigenvectors), floor, clamped);
}

}  // namespace mahadp
