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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdiana/engine.h"

namespace qdiana {

// Grid for the `sweep` subcommand; an empty axis keeps the base value.
struct SweepSpec {
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<std::size_t> block_size;

  bool empty() const { return alpha.empty() && gamma.empty() && block_size.empty(); }
};

struct ExperimentFile {
  RunConfig run;
  std::optional<std::filesystem::path> output_path;  // CSV
  std::optional<std::filesystem::path> binary_path;  // binary trace
  SweepSpec sweep;
};

// Parses a JSON experiment description. Unknown keys and type errors raise
// ConfigError naming the dotted key path. Relative dataset paths are resolved
// against `base_dir`.
ExperimentFile ParseExperiment(std::string_view json_text,
                               const std::filesystem::path& base_dir = {});

ExperimentFile LoadExperiment(const std::filesystem::path& path);

// Canonical JSON rendering of a run configuration (used as the config echo).
std::string DescribeConfig(const RunConfig& config);

Regime ParseRegime(std::string_view name);

}  // namespace qdiana
