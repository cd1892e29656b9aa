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

#include "qdiana/report.h"

#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "qdiana/error.h"

namespace qdiana {
namespace {

std::vector<TraceRecord> Sample() {
  TraceRecord a;
  a.k = 0;
  a.f_gap = 0.1;
  a.dist_sq = 1.0 / 3.0;
  a.lyapunov = 2.5e-300;
  a.H = 7.0;
  a.D = 1e-17;
  a.grad_norm_sq = 0.123456789012345678;
  a.bits_up_cum = 0;
  a.bits_down_cum = 0;
  TraceRecord b = a;
  b.k = 10;
  b.f_gap = 3.0e-12;
  b.bits_up_cum = 12345678901234ULL;
  b.bits_down_cum = 640;
  b.wall_ms = 1.5;
  return {a, b};
}

TEST(CsvTest, HeaderAndRoundTrip) {
  const std::vector<TraceRecord> records = Sample();
  const std::string csv = ToCsv(records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  std::istringstream in(csv);
  EXPECT_EQ(ReadCsv(in), records);
}

TEST(CsvTest, NanRoundTrips) {
  std::vector<TraceRecord> records = Sample();
  records[0].D = std::numeric_limits<double>::quiet_NaN();
  const std::string csv = ToCsv(records);
  EXPECT_NE(csv.find(",nan,"), std::string::npos);
  std::istringstream in(csv);
  const std::vector<TraceRecord> back = ReadCsv(in);
  EXPECT_TRUE(std::isnan(back[0].D));
  EXPECT_EQ(ToCsv(back), csv);
}

TEST(CsvTest, MalformedInput) {
  std::istringstream bad_header("k,f\n");
  EXPECT_THROW(ReadCsv(bad_header), ParseError);
  std::istringstream short_row(std::string(kCsvHeader) + "\n1,2,3\n");
  try {
    ReadCsv(short_row);
    FAIL() << "short row accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream bad_number(std::string(kCsvHeader) + "\n0,x,0,0,0,0,0,0,0,0\n");
  EXPECT_THROW(ReadCsv(bad_number), ParseError);
}

TEST(SvgTest, RendersPanelsAndLegend) {
  const std::string svg = RenderSvg({{"diana <a&b>", Sample()}, {"vr", Sample()}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  EXPECT_EQ(polylines, 8u);
  EXPECT_NE(svg.find("diana &lt;a&amp;b&gt;"), std::string::npos);
  EXPECT_NE(svg.find("uplink bits"), std::string::npos);
}

TEST(SvgTest, EmptySeries) {
  const std::string svg = RenderSvg({});
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace qdiana
