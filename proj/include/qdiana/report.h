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

#include <iosfwd>
#include <string>
#include <vector>

#include "qdiana/engine.h"

namespace qdiana {

// Column order of trace CSV files.
inline constexpr const char* kCsvHeader =
    "k,f_gap,dist_sq,lyapunov,H,D,grad_norm_sq,bits_up_cum,bits_down_cum,wall_ms";

// Header plus one row per record; reals use 17 significant digits so that
// ReadCsv recovers them exactly.
void WriteCsv(const std::vector<TraceRecord>& records, std::ostream& out);
std::string ToCsv(const std::vector<TraceRecord>& records);

// Throws ParseError on a wrong header or malformed row.
std::vector<TraceRecord> ReadCsv(std::istream& in);

struct PlotSeries {
  std::string label;
  std::vector<TraceRecord> records;
};

// Standalone SVG with four log-scale panels: f_gap and dist_sq against
// iterations and against cumulative uplink bits.
std::string RenderSvg(const std::vector<PlotSeries>& series);

}  // namespace qdiana
