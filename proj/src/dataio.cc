// Copyright 2026 The qdiana Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================

#include "qdiana/dataio.h"

#include <zlib.h>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>

#include "qdiana/error.h"
#include "qdiana/rng.h"

namespace qdiana {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

bool ParseDouble(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool ParseIndex(std::string_view token, std::uint64_t& out) {
  if (token.empty()) return false;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

double NormalizeLabel(std::string_view token, std::size_t line) {
  double raw = 0.0;
  if (!ParseDouble(token, raw)) {
    throw ParseError(line, "label '" + std::string(token) + "' is not numeric");
  }
  if (raw == 1.0) return 1.0;
  if (raw == 0.0 || raw == -1.0) return -1.0;
  throw ParseError(line, "label '" + std::string(token) +
                             "' is not one of {0, 1, -1, +1}");
}

std::string Gunzip(const std::string& compressed) {
  z_stream stream{};
  if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK) {
    throw Error(ErrorKind::kIo, "zlib initialization failed");
  }
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  stream.avail_in = static_cast<uInt>(compressed.size());
  std::string out;
  char buffer[1 << 15];
  int status = Z_OK;
  do {
    stream.next_out = reinterpret_cast<Bytef*>(buffer);
    stream.avail_out = sizeof(buffer);
    status = inflate(&stream, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&stream);
      throw Error(ErrorKind::kIo, "corrupt gzip stream");
    }
    out.append(buffer, sizeof(buffer) - stream.avail_out);
  } while (status != Z_STREAM_END);
  inflateEnd(&stream);
  return out;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset ParseLibsvm(std::string_view text) {
  Dataset dataset;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text.remove_prefix(newline == std::string_view::npos ? text.size() : newline + 1);
    ++line_no;
    line = Trim(line);
    if (line.empty()) continue;

    DataRow row;
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < line.size() && IsSpace(line[pos])) ++pos;
      const std::size_t start = pos;
      while (pos < line.size() && !IsSpace(line[pos])) ++pos;
      return line.substr(start, pos - start);
    };
    row.label = NormalizeLabel(next_token(), line_no);
    std::int64_t previous = -1;
    for (std::string_view token = next_token(); !token.empty(); token = next_token()) {
      const std::size_t colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "malformed feature token '" + std::string(token) + "'");
      }
      std::uint64_t index = 0;
      double value = 0.0;
      if (!ParseIndex(token.substr(0, colon), index) || index == 0 ||
          index > std::numeric_limits<std::uint32_t>::max()) {
        throw ParseError(line_no, "bad feature index in '" + std::string(token) + "'");
      }
      if (!ParseDouble(token.substr(colon + 1), value)) {
        throw ParseError(line_no, "non-numeric feature value in '" + std::string(token) + "'");
      }
      const auto zero_based = static_cast<std::int64_t>(index - 1);
      if (zero_based <= previous) {
        throw ParseError(line_no, "feature indices must be strictly increasing");
      }
      previous = zero_based;
      row.features.indices.push_back(static_cast<std::uint32_t>(zero_based));
      row.features.values.push_back(value);
      dataset.dim = std::max(dataset.dim, static_cast<std::size_t>(zero_based) + 1);
    }
    dataset.rows.push_back(std::move(row));
  }
  if (dataset.rows.empty()) {
    throw Error(ErrorKind::kEmptyDataset, "dataset has no rows");
  }
  return dataset;
}

Dataset ReadLibsvmFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open dataset '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
      static_cast<unsigned char>(bytes[1]) == 0x8b) {
    bytes = Gunzip(bytes);
  }
  return ParseLibsvm(bytes);
}

std::string ToLibsvm(const Dataset& dataset) {
  std::string out;
  for (const DataRow& row : dataset.rows) {
    out += row.label > 0 ? "1" : "-1";
    for (std::size_t k = 0; k < row.features.indices.size(); ++k) {
      out += ' ';
      out += std::to_string(std::uint64_t{row.features.indices[k]} + 1);
      out += ':';
      out += FormatDouble(row.features.values[k]);
    }
    out += '\n';
  }
  return out;
}

FiniteSumProblem Partition(const Dataset& dataset, std::size_t n,
                           std::uint64_t seed, const PartitionOptions& options) {
  if (dataset.rows.empty()) throw Error(ErrorKind::kEmptyDataset, "dataset has no rows");
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "worker count must be positive");
  if (dataset.rows.size() < n) {
    throw Error(ErrorKind::kInsufficientData,
                "dataset has " + std::to_string(dataset.rows.size()) +
                    " rows but " + std::to_string(n) + " workers were requested");
  }
  std::vector<std::size_t> order(dataset.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.shuffle) {
    Rng rng = DeriveStream(seed, kMasterId, Purpose::kPartition, 0);
    for (std::size_t t = order.size(); t > 1; --t) {
      std::swap(order[t - 1], order[static_cast<std::size_t>(rng.Below(t))]);
    }
  }
  const std::size_t m = dataset.rows.size() / n;
  const std::size_t dropped = dataset.rows.size() - m * n;
  if (dropped > 0) {
    spdlog::warn("partition: dropping {} trailing row(s) to give {} workers {} rows each",
                 dropped, n, m);
  }
  std::vector<LogisticComponent> components;
  components.reserve(n * m);
  for (std::size_t k = 0; k < n * m; ++k) {
    const DataRow& row = dataset.rows[order[k]];
    LogisticComponent c;
    c.label = row.label;
    c.features = row.features;
    if (options.normalize_rows) {
      const double norm = std::sqrt(c.features.SquaredNorm());
      if (norm > 0.0) {
        for (double& v : c.features.values) v /= norm;
      }
    }
    components.push_back(std::move(c));
  }
  const double lambda2 = options.lambda2.value_or(1.0 / static_cast<double>(n * m));
  return FiniteSumProblem::Logistic(std::max<std::size_t>(dataset.dim, 1), n, m,
                                    std::move(components), lambda2,
                                    options.regularizer);
}

FiniteSumProblem SynthProblem(LossKind kind, std::size_t dim, std::size_t n,
                              std::size_t m, std::uint64_t seed,
                              const SynthOptions& options) {
  if (dim == 0 || n == 0 || m == 0) {
    throw Error(ErrorKind::kInvalidInput, "d, n and m must be positive");
  }
  const double lambda2 = options.lambda2.value_or(1.0 / static_cast<double>(n * m));
  const auto d = static_cast<Eigen::Index>(dim);
  Rng rng = DeriveStream(seed, kMasterId, Purpose::kSynth, 0);

  if (kind == LossKind::kLogistic) {
    Vector planted(d);
    for (Eigen::Index k = 0; k < d; ++k) planted[k] = rng.Normal();
    std::vector<LogisticComponent> components;
    components.reserve(n * m);
    for (std::size_t c = 0; c < n * m; ++c) {
      Vector a(d);
      for (Eigen::Index k = 0; k < d; ++k) a[k] = rng.Normal();
      a /= a.norm();
      LogisticComponent comp;
      comp.features.indices.resize(dim);
      std::iota(comp.features.indices.begin(), comp.features.indices.end(), 0u);
      comp.features.values.assign(a.data(), a.data() + d);
      comp.label = a.dot(planted) >= 0.0 ? 1.0 : -1.0;
      if (rng.Bernoulli(options.label_flip)) comp.label = -comp.label;
      components.push_back(std::move(comp));
    }
    return FiniteSumProblem::Logistic(dim, n, m, std::move(components), lambda2,
                                      options.regularizer);
  }

  if (!(options.condition >= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "quadratic condition must be >= 1");
  }
  Vector spectrum(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double t = d == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(d - 1);
    spectrum[k] = std::pow(options.condition, -t);
  }
  std::vector<QuadraticComponent> components;
  components.reserve(n * m);
  for (std::size_t c = 0; c < n * m; ++c) {
    Matrix gauss(d, d);
    for (Eigen::Index k = 0; k < gauss.size(); ++k) gauss.data()[k] = rng.Normal();
    const Matrix rotation = Eigen::HouseholderQR<Matrix>(gauss).householderQ();
    Matrix hessian = rotation * spectrum.asDiagonal() * rotation.transpose();
    hessian = 0.5 * (hessian + hessian.transpose()).eval();
    Vector center(d);
    for (Eigen::Index k = 0; k < d; ++k) center[k] = rng.Normal();
    components.push_back({std::move(hessian), std::move(center)});
  }
  return FiniteSumProblem::Quadratic(dim, n, m, std::move(components), lambda2,
                                     options.regularizer);
}

}  // namespace qdiana
