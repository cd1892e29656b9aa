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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdiana/problems.h"

namespace qdiana {

struct DataRow {
  double label = 1.0;  // normalized to -1 / +1
  SparseRow features;  // 0-based indices

  bool operator==(const DataRow&) const = default;
};

struct Dataset {
  std::vector<DataRow> rows;
  std::size_t dim = 0;  // max index + 1

  bool operator==(const Dataset&) const = default;
};

// `<label> <idx>:<val> ...` per line, 1-based indices. Labels {0, 1, -1, +1}
// are mapped to {-1, +1}. Throws ParseError (with line number) on malformed
// lines and kEmptyDataset when no rows are present.
Dataset ParseLibsvm(std::string_view text);

// Reads a local file; gzip input is detected by its magic bytes.
Dataset ReadLibsvmFile(const std::filesystem::path& path);

// Inverse of ParseLibsvm; values are printed with 17 significant digits.
std::string ToLibsvm(const Dataset& dataset);

struct PartitionOptions {
  std::optional<double> lambda2;  // default 1 / (n m)
  bool normalize_rows = true;     // scale rows to unit l2 norm
  bool shuffle = true;            // seed-keyed permutation before splitting
  Regularizer regularizer;
};

// Permutes rows by `seed`, then hands m = floor(rows / n) contiguous rows to
// each worker. Trailing rows are dropped with a warning.
FiniteSumProblem Partition(const Dataset& dataset, std::size_t n,
                           std::uint64_t seed,
                           const PartitionOptions& options = {});

struct SynthOptions {
  std::optional<double> lambda2;  // default 1 / (n m)
  double label_flip = 0.1;        // logistic: probability of flipping a label
  double condition = 10.0;        // quadratic: L / mu of each component
  Regularizer regularizer;
};

// Seeded synthetic problems. Logistic: unit-norm Gaussian rows, labels from a
// planted linear model with `label_flip` flips. Quadratic: random rotations of
// a geometric spectrum in [1/condition, 1] with Gaussian centers.
FiniteSumProblem SynthProblem(LossKind kind, std::size_t dim, std::size_t n,
                              std::size_t m, std::uint64_t seed,
                              const SynthOptions& options = {});

}  // namespace qdiana
